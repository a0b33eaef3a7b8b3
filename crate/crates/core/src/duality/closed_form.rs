use statrs::function::erf::erfc;

use crate::claim::{ClaimKind, ClaimSpec};
use crate::driver::DriverSpec;
use crate::scalar::Scalar;

fn norm_cdf(x: f64) -> f64 {
    0.5 * erfc(-x / std::f64::consts::SQRT_2)
}

fn norm_pdf(x: f64) -> f64 {
    (-0.5 * x * x).exp() / (2.0 * std::f64::consts::PI).sqrt()
}

/// `E[(B - K)^+]` for `B ~ N(m, v)`.
fn bachelier_call(m: f64, v: f64, k: f64) -> f64 {
    if v <= 0.0 {
        return (m - k).max(0.0);
    }
    let sd = v.sqrt();
    let x = (m - k) / sd;
    (m - k) * norm_cdf(x) + sd * norm_pdf(x)
}

/// Exact `rho_{s, horizon}(X)` given the state `b_s = B_s`, when the catalog has one.
///
/// Covered: constant positions under every closed-form generator; `z . B_u + c`
/// under Constant, Linear, Entropic, Abs and both Volterra kinds; calls and puts
/// under Constant and Linear. Returns `None` otherwise.
pub fn closed_form<S: Scalar>(d: &DriverSpec<S>, c: &ClaimSpec<S>, s: S, horizon: S, b_s: &[S]) -> Option<S> {
    let g = d.member(horizon).ok()?;
    let uc = match c.kind {
        ClaimKind::Constant(_) => horizon,
        _ => c.horizon,
    };
    if s > uc || uc > horizon {
        return None;
    }
    // int_s^horizon g(s, v, 0, 0) dv
    let zero_int = match g {
        DriverSpec::Constant { a } | DriverSpec::Linear { a, .. } | DriverSpec::Entropic { a, .. } | DriverSpec::Abs { a, .. } => {
            a.integral(s, horizon)?
        }
        DriverSpec::VolterraLinear { b, .. } => b.integral_in_s(s, s, horizon)?,
        DriverSpec::VolterraQuadratic { a, .. } => a.integral_in_s(s, s, horizon)?,
        _ => return None,
    };
    let tau = uc - s;
    match &c.kind {
        ClaimKind::Constant(v) => Some(zero_int - *v),
        ClaimKind::Linear { z, c: c0 } => {
            if z.len() != b_s.len() {
                return None;
            }
            let zb = z.iter().zip(b_s).fold(S::zero(), |a, (&x, &y)| a + x * y);
            let z2 = z.iter().fold(S::zero(), |a, &x| a + x * x);
            let base = -zb - *c0 + zero_int;
            match g {
                DriverSpec::Constant { .. } => Some(base),
                DriverSpec::Linear { b, .. } => {
                    if b.len() != z.len() {
                        return None;
                    }
                    let zb = z.iter().zip(b).fold(S::zero(), |a, (&x, &y)| a + x * y);
                    Some(base - zb * tau)
                }
                DriverSpec::Entropic { b, .. } => Some(base + *b * z2 * tau * S::half()),
                DriverSpec::Abs { kappa, .. } => Some(base + *kappa * z2.sqrt() * tau),
                DriverSpec::VolterraLinear { a, .. } => {
                    if a.len() != z.len() {
                        return None;
                    }
                    let mut drift = S::zero();
                    for (k, &zc) in a.iter().zip(z) {
                        drift = drift + zc * k.integral_in_s(s, s, uc)?;
                    }
                    Some(base - drift)
                }
                DriverSpec::VolterraQuadratic { b, .. } => Some(base + b.eval(s) * z2 * tau * S::half()),
                _ => None,
            }
        }
        ClaimKind::Call { strike, component } | ClaimKind::Put { strike, component } => {
            let drift = match g {
                DriverSpec::Constant { .. } => S::zero(),
                DriverSpec::Linear { b, .. } => *b.get(*component)? * tau,
                _ => return None,
            };
            let m = (*b_s.get(*component)? + drift).as_f64();
            let k = strike.as_f64();
            let v = tau.as_f64();
            let e = match c.kind {
                ClaimKind::Call { .. } => bachelier_call(m, v, k),
                _ => bachelier_call(m, v, k) - (m - k),
            };
            Some(zero_int - S::lit(e))
        }
        _ => None,
    }
}
