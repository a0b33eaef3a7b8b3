use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::Backend;
use crate::claim::ClaimSpec;
use crate::error::{unsupported, Result};
use crate::scalar::Scalar;

/// Claim shape that can be placed at any horizon.
#[derive(Debug, Clone, PartialEq)]
pub enum ClaimTemplate {
    Constant(f64),
    /// `z B_u + c`
    Linear { z: f64, c: f64 },
    Call { strike: f64 },
    Put { strike: f64 },
    /// Node values uniform in `[-scale, scale]`, drawn from `seed` and the level (tree only).
    RandomNodes { seed: u64, scale: f64 },
}

impl ClaimTemplate {
    /// The claim measurable at grid level `level`.
    pub fn at<S: Scalar>(&self, b: &Backend<'_, S>, level: usize) -> Result<ClaimSpec<S>> {
        let u = b.time(level);
        let l = S::lit;
        Ok(match *self {
            ClaimTemplate::Constant(c) => ClaimSpec::constant(l(c), u),
            ClaimTemplate::Linear { z, c } => ClaimSpec::linear(l(z), l(c), u),
            ClaimTemplate::Call { strike } => ClaimSpec::call(l(strike), u),
            ClaimTemplate::Put { strike } => ClaimSpec::put(l(strike), u),
            ClaimTemplate::RandomNodes { .. } => {
                let Backend::Tree(tree) = b else {
                    return unsupported("random node claims live on the tree backend");
                };
                return self.node_values_at(tree.sqrt_dt(), level, u);
            }
        })
    }

    /// Random node claim on tree level `level` (horizon `u`); other shapes are rejected.
    pub fn node_values_at<S: Scalar>(&self, sqrt_dt: S, level: usize, u: S) -> Result<ClaimSpec<S>> {
        let ClaimTemplate::RandomNodes { seed, scale } = *self else {
            return unsupported("only random node templates are built from the tree level");
        };
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(level as u64);
        let values = (0..=level).map(|_| S::lit(rng.gen_range(-scale..=scale))).collect();
        Ok(ClaimSpec::node_values(values, sqrt_dt, u))
    }

    pub fn is_tree_only(&self) -> bool {
        matches!(self, ClaimTemplate::RandomNodes { .. })
    }
}

/// Seeded fuzz corpus cycling through constants, linear claims, calls, puts and
/// (when `tree`) bounded random node functions.
pub fn claim_corpus(seed: u64, n: usize, tree: bool) -> Vec<ClaimTemplate> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let kinds = if tree { 5 } else { 4 };
    (0..n)
        .map(|i| match i % kinds {
            0 => ClaimTemplate::Constant(rng.gen_range(-1.0..=1.0)),
            1 => ClaimTemplate::Linear { z: rng.gen_range(-1.0..=1.0), c: rng.gen_range(-0.5..=0.5) },
            2 => ClaimTemplate::Call { strike: rng.gen_range(-0.5..=0.5) },
            3 => ClaimTemplate::Put { strike: rng.gen_range(-0.5..=0.5) },
            _ => ClaimTemplate::RandomNodes { seed: rng.gen(), scale: 1.0 },
        })
        .collect()
}

/// Every `(t_s, t_t, t_u)` with `s <= t <= u` on the grid, lexicographic.
pub fn all_triples<S: Scalar>(times: &[S]) -> Vec<(S, S, S)> {
    let n = times.len();
    let mut out = Vec::new();
    for s in 0..n {
        for t in s..n {
            for u in t..n {
                out.push((times[s], times[t], times[u]));
            }
        }
    }
    out
}

/// Every `(t_t, t_u)` with `t <= u` on the grid, lexicographic.
pub fn all_pairs<S: Scalar>(times: &[S]) -> Vec<(S, S)> {
    let n = times.len();
    let mut out = Vec::new();
    for t in 0..n {
        for u in t..n {
            out.push((times[t], times[u]));
        }
    }
    out
}
