use super::{measurable_at, rho, Backend, Pos};
use crate::claim::ClaimSpec;
use crate::driver::DriverSpec;
use crate::error::{invalid, Result};
use crate::mc::mean_stderr;
use crate::query::BackendTag;
use crate::scalar::Scalar;

#[derive(Debug, Clone, PartialEq)]
pub struct GammaRow<S> {
    pub s: S,
    pub t: S,
    pub u: S,
    /// Tree node on level `s`; `None` for Monte Carlo path means.
    pub node: Option<usize>,
    pub gamma: S,
    /// `int_t^u g(s, v, 0) dv` for single generators with an integrable zero section.
    pub closed_form: Option<S>,
    pub stderr: Option<S>,
}

/// Horizon-longevity increments `gamma(s, t, u, X) = rho_su(X) - rho_st(X)`.
#[derive(Debug, Clone, PartialEq)]
pub struct GammaReport<S> {
    pub backend: BackendTag,
    pub rows: Vec<GammaRow<S>>,
}

impl<S: Scalar> GammaReport<S> {
    pub fn max_abs_error(&self) -> Option<S> {
        self.rows
            .iter()
            .map(|r| r.closed_form.map(|c| (r.gamma - c).abs()))
            .try_fold(S::zero(), |m, e| e.map(|e| m.max(e)))
    }

    pub fn min_gamma(&self) -> S {
        self.rows.iter().map(|r| r.gamma).fold(S::infinity(), S::min)
    }
}

/// `int_t^u g(s, v, 0) dv` when the zero section has an exact antiderivative.
pub fn zero_section_integral<S: Scalar>(d: &DriverSpec<S>, s: S, t: S, u: S) -> Option<S> {
    match d {
        DriverSpec::Constant { a } | DriverSpec::Linear { a, .. } | DriverSpec::Entropic { a, .. } | DriverSpec::Abs { a, .. } => {
            a.integral(t, u)
        }
        DriverSpec::VolterraLinear { b, .. } => b.integral_in_s(s, t, u),
        DriverSpec::VolterraQuadratic { a, .. } => a.integral_in_s(s, t, u),
        _ => None,
    }
}

/// `gamma(s, t, u, X)` for every `u` in `u_grid`, with the claim measurable at `t`.
///
/// Both evaluations share the tree or the path ensemble.
pub fn gamma_surface<S: Scalar>(b: &Backend<'_, S>, d: &DriverSpec<S>, c: &ClaimSpec<S>, s: S, t: S, u_grid: &[S]) -> Result<GammaReport<S>> {
    let (si, ti) = (b.level(s)?, b.level(t)?);
    if si > ti {
        return invalid("gamma needs s <= t");
    }
    let x = measurable_at(b, c, ti)?;
    let short = rho(b, d, &Pos::Claim(&x), si, ti)?;
    let mut rows = Vec::new();
    for &u in u_grid {
        let ui = b.level(u)?;
        if ui < ti {
            return invalid("u_grid must not precede t");
        }
        let long = rho(b, d, &Pos::Claim(&x), si, ui)?;
        let closed = if d.is_family() { None } else { zero_section_integral(d, s, t, u) };
        match b {
            Backend::Tree(_) => {
                for (j, (&a, &bb)) in long.values.iter().zip(&short.values).enumerate() {
                    rows.push(GammaRow { s, t, u, node: Some(j), gamma: a - bb, closed_form: closed, stderr: None });
                }
            }
            Backend::Mc(e, _) => {
                let se = match (&long.pathwise, &short.pathwise) {
                    (Some(p), Some(q)) => {
                        let diff: Vec<S> = p.iter().zip(q).map(|(&a, &b)| a - b).collect();
                        mean_stderr(&diff, e.config().antithetic).1
                    }
                    _ => S::nan(),
                };
                rows.push(GammaRow {
                    s,
                    t,
                    u,
                    node: None,
                    gamma: long.estimate() - short.estimate(),
                    closed_form: closed,
                    stderr: Some(se),
                });
            }
        }
    }
    Ok(GammaReport { backend: b.tag(), rows })
}
