use super::paths::PathEnsemble;
use super::regression::{dot, Basis, LeastSquares};
use crate::claim::{ClaimKind, ClaimSpec};
use crate::driver::DriverSpec;
use crate::error::{invalid, unsupported, Error, Result};
use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverConfig<S> {
    /// Total degree of the monomial basis.
    pub degree: usize,
    /// Euclidean cap on `|Z|`.
    pub z_clip: S,
}

impl<S: Scalar> Default for SolverConfig<S> {
    fn default() -> Self {
        Self { degree: 3, z_clip: S::lit(10.0) }
    }
}

/// Result of one backward regression sweep, evaluated at `level`.
#[derive(Debug, Clone)]
pub struct McSolution<S> {
    pub level: usize,
    pub claim_level: usize,
    pub horizon_level: usize,
    /// `Y` at `level` on every path.
    pub values: Vec<S>,
    /// `Z` at `level` on every path (`M * d`, zero when `level` is on the deterministic tail).
    pub z: Vec<S>,
    /// Path mean of `values`.
    pub estimate: S,
    /// Standard error of the path mean of `pathwise`.
    pub stderr: S,
    /// Pathwise representation `-X + sum_k g(t_k, Z_k) dt` (plus tail offset) on every path.
    pub pathwise: Vec<S>,
    /// Coefficients of `E[Y_{k+1} | B_{t_k}]` for `k` in `level..claim_level` (empty elsewhere).
    pub y_fits: Vec<Vec<S>>,
    /// Deterministic offsets between the claim and solve horizons.
    pub tail: Vec<S>,
}

fn tail_offsets<S: Scalar>(e: &PathEnsemble<S>, g: &DriverSpec<S>, t_frozen: Option<S>, from: usize, to: usize) -> Vec<S> {
    let grid = e.grid();
    let z0 = vec![S::zero(); e.dim()];
    let mut out = vec![S::zero(); to - from + 1];
    for k in (from..to).rev() {
        let t = t_frozen.unwrap_or(grid.time(k));
        let nxt = out[k + 1 - from];
        out[k - from] = nxt + g.g(t, grid.time(k), nxt, &z0) * grid.dt(k);
    }
    out
}

/// Mean of `v` and the standard error of the mean, pairing antithetic paths.
pub fn mean_stderr<S: Scalar>(v: &[S], antithetic: bool) -> (S, S) {
    let m = v.len();
    let mean = v.iter().copied().sum::<S>() / S::from_usize_lossy(m);
    let samples: Vec<S> = if antithetic {
        v.chunks(2).map(|p| (p[0] + p[p.len() - 1]) * S::half()).collect()
    } else {
        v.to_vec()
    };
    let n = samples.len();
    if n < 2 {
        return (mean, S::zero());
    }
    let mu = samples.iter().copied().sum::<S>() / S::from_usize_lossy(n);
    let var = samples.iter().map(|&x| (x - mu) * (x - mu)).sum::<S>() / S::from_usize_lossy(n - 1);
    (mean, (var / S::from_usize_lossy(n)).sqrt())
}

struct Sweep<'a, S: Scalar> {
    e: &'a PathEnsemble<S>,
    g: &'a DriverSpec<S>,
    t_frozen: Option<S>,
    cfg: SolverConfig<S>,
}

impl<S: Scalar> Sweep<'_, S> {
    /// Regresses from `terminal` at level `top` down to level `stop`.
    fn run(&self, top: usize, mut y: Vec<S>, stop: usize, claim_level: usize, horizon_level: usize, tail: Vec<S>) -> Result<McSolution<S>> {
        let e = self.e;
        let (m, d) = (e.paths(), e.dim());
        let grid = e.grid();
        let top_values = y.clone();
        let mut acc = vec![S::zero(); m];
        let mut zs = vec![S::zero(); m * d];
        let mut fits = vec![Vec::new(); top.max(stop)];
        let mut rows: Vec<S> = Vec::new();
        let mut z = vec![S::zero(); d];
        for k in (stop..top).rev() {
            let tk = grid.time(k);
            let dt = grid.dt(k);
            let degree = if tk > S::zero() { self.cfg.degree } else { 0 };
            let scale = if tk > S::zero() { tk.sqrt() } else { S::one() };
            let basis = Basis::new(d, degree, scale);
            let nb = basis.len();
            rows.resize(m * nb, S::zero());
            for i in 0..m {
                basis.eval_into(e.state(k, i), &mut rows[i * nb..(i + 1) * nb]);
            }
            let ls = LeastSquares::new(&rows, nb, k)?;
            let beta = ls.solve(&rows, &y);
            let fitted: Vec<S> = rows.chunks(nb).map(|r| dot(r, &beta)).collect();
            let gammas: Vec<Vec<S>> = (0..d)
                .map(|c| {
                    let mut rhs = vec![S::zero(); nb];
                    for i in 0..m {
                        let w = (y[i] - fitted[i]) * e.increment(k, i, c);
                        let r = &rows[i * nb..(i + 1) * nb];
                        for a in 0..nb {
                            rhs[a] = rhs[a] + r[a] * w;
                        }
                    }
                    ls.solve_normal(rhs)
                })
                .collect();
            let t = self.t_frozen.unwrap_or(tk);
            for i in 0..m {
                let r = &rows[i * nb..(i + 1) * nb];
                for c in 0..d {
                    z[c] = dot(r, &gammas[c]) / dt;
                }
                let norm = z.iter().fold(S::zero(), |a, &x| a + x * x).sqrt();
                if norm > self.cfg.z_clip {
                    let f = self.cfg.z_clip / norm;
                    z.iter_mut().for_each(|x| *x = *x * f);
                }
                let gi = self.g.g(t, tk, fitted[i], &z) * dt;
                y[i] = fitted[i] + gi;
                acc[i] = acc[i] + gi;
                if k == stop {
                    zs[i * d..(i + 1) * d].copy_from_slice(&z);
                }
            }
            if let Some(bad) = y.iter().position(|v| !v.is_finite()) {
                return Err(Error::Numerical { level: k, msg: format!("non-finite value on path {bad}") });
            }
            fits[k] = beta;
        }
        let pathwise: Vec<S> = top_values.iter().zip(&acc).map(|(&a, &b)| a + b).collect();
        let (estimate, _) = mean_stderr(&y, false);
        let (_, stderr) = mean_stderr(&pathwise, e.config().antithetic);
        Ok(McSolution {
            level: stop,
            claim_level,
            horizon_level,
            values: y,
            z: zs,
            estimate,
            stderr,
            pathwise,
            y_fits: fits,
            tail,
        })
    }
}

fn check_dims<S: Scalar>(e: &PathEnsemble<S>, d: &DriverSpec<S>) -> Result<()> {
    d.validate()?;
    if let Some(n) = d.dim() {
        if n != e.dim() {
            return invalid(format!("generator expects dimension {n}, ensemble has {}", e.dim()));
        }
    }
    Ok(())
}

/// Shared driver for claim and value terminals: `x` holds `X` on every path at `claim_level`.
fn solve_from<S: Scalar>(
    e: &PathEnsemble<S>,
    d: &DriverSpec<S>,
    claim_level: usize,
    x: Vec<S>,
    s: usize,
    horizon: S,
    cfg: SolverConfig<S>,
) -> Result<McSolution<S>> {
    check_dims(e, d)?;
    let h = e.grid().index_of(horizon)?;
    if claim_level > h {
        return invalid("claim horizon exceeds the solve horizon");
    }
    if s > claim_level {
        return invalid("evaluation time is past the claim horizon");
    }
    let g = d.member(horizon)?;
    if g.supports_y() && claim_level < h {
        return unsupported("y-dependent generators need the claim horizon to equal the solve horizon");
    }
    if !(cfg.z_clip > S::zero()) {
        return invalid("z_clip must be positive");
    }
    let t_frozen = if g.is_volterra() { Some(e.grid().time(s)) } else { None };
    let tail = tail_offsets(e, g, t_frozen, claim_level, h);
    let terminal = x.iter().map(|&v| tail[0] - v).collect();
    Sweep { e, g, t_frozen, cfg }.run(claim_level, terminal, s, claim_level, h, tail)
}

/// `rho_{s, horizon}(X)` by backward regression.
///
/// Generators with a frozen first argument are evaluated with it fixed at `s`,
/// which is exactly the BSVIE value at `s`.
pub fn mc_solve_bsde<S: Scalar>(
    e: &PathEnsemble<S>,
    d: &DriverSpec<S>,
    c: &ClaimSpec<S>,
    s: S,
    horizon: S,
    cfg: SolverConfig<S>,
) -> Result<McSolution<S>> {
    let si = e.grid().index_of(s)?;
    let h = e.grid().index_of(horizon)?;
    let mut cu = c.validate(e.grid())?;
    if matches!(c.kind, ClaimKind::Constant(_)) {
        cu = h;
    }
    let x = match c.kind {
        ClaimKind::Constant(v) => vec![v; e.paths()],
        _ => e.eval_claim(c)?,
    };
    solve_from(e, d, cu, x, si, horizon, cfg)
}

/// As [`mc_solve_bsde`] with the position given by its values on every path at `level`.
pub fn mc_solve_values<S: Scalar>(
    e: &PathEnsemble<S>,
    d: &DriverSpec<S>,
    level: S,
    values: &[S],
    s: S,
    horizon: S,
    cfg: SolverConfig<S>,
) -> Result<McSolution<S>> {
    if values.len() != e.paths() {
        return invalid("one value per path is required");
    }
    let l = e.grid().index_of(level)?;
    let si = e.grid().index_of(s)?;
    solve_from(e, d, l, values.to_vec(), si, horizon, cfg)
}
