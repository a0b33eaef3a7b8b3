//! JSON documents for drivers and claims.
//!
//! ```json
//! {"kind": "linear", "b": 0.3, "a": 0.1}
//! {"kind": "constant", "a": {"scale": 1.0, "rate": -0.5}}
//! {"kind": "volterra_linear", "a": 0.0, "b": {"c0": 1.0, "ct": -1.0, "cs": 0.0}}
//! {"kind": "family", "members": [{"horizon": 0.5, "driver": {"kind": "abs", "kappa": 0.5}}]}
//! {"kind": "call", "strike": 0.1, "horizon": 1.0}
//! ```

use serde::{Deserialize, Serialize};

use crate::claim::{ClaimKind, ClaimSpec};
use crate::diagnostics::ClaimTemplate;
use crate::driver::{DriverSpec, Family};
use crate::error::{invalid, Result};
use crate::scalar::Scalar;
use crate::timefn::{KernelFn, TimeFn};

/// `a(t)`: a number, `{"c0", "c1"}` for `c0 + c1 t`, or `{"scale", "rate"}` for `scale e^{rate t}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum TimeFnDoc {
    Const(f64),
    Affine { c0: f64, c1: f64 },
    Exp { scale: f64, rate: f64 },
}

impl Default for TimeFnDoc {
    fn default() -> Self {
        TimeFnDoc::Const(0.0)
    }
}

impl TimeFnDoc {
    pub fn to_fn<S: Scalar>(&self) -> TimeFn<S> {
        match *self {
            TimeFnDoc::Const(c) => TimeFn::Const(S::lit(c)),
            TimeFnDoc::Affine { c0, c1 } => TimeFn::Affine { c0: S::lit(c0), c1: S::lit(c1) },
            TimeFnDoc::Exp { scale, rate } => TimeFn::Exp { scale: S::lit(scale), rate: S::lit(rate) },
        }
    }
}

/// `k(t, s)`: a number or `{"c0", "ct", "cs"}` for `c0 + ct t + cs s`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum KernelDoc {
    Const(f64),
    Affine { c0: f64, ct: f64, cs: f64 },
}

impl Default for KernelDoc {
    fn default() -> Self {
        KernelDoc::Const(0.0)
    }
}

impl KernelDoc {
    pub fn to_fn<S: Scalar>(&self) -> KernelFn<S> {
        match *self {
            KernelDoc::Const(c) => KernelFn::Const(S::lit(c)),
            KernelDoc::Affine { c0, ct, cs } => KernelFn::Affine { c0: S::lit(c0), ct: S::lit(ct), cs: S::lit(cs) },
        }
    }
}

/// A number or a vector of numbers.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum VecDoc {
    Scalar(f64),
    Vector(Vec<f64>),
}

impl VecDoc {
    fn to_vec<S: Scalar>(&self) -> Vec<S> {
        match self {
            VecDoc::Scalar(x) => vec![S::lit(*x)],
            VecDoc::Vector(v) => v.iter().map(|&x| S::lit(x)).collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MemberDoc {
    pub horizon: f64,
    pub driver: DriverDoc,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum DriverDoc {
    Constant {
        a: TimeFnDoc,
    },
    Linear {
        b: VecDoc,
        #[serde(default)]
        a: TimeFnDoc,
    },
    Entropic {
        b: f64,
        #[serde(default)]
        a: TimeFnDoc,
    },
    Abs {
        kappa: f64,
        #[serde(default)]
        a: TimeFnDoc,
    },
    VolterraLinear {
        #[serde(default)]
        a: KernelDoc,
        b: KernelDoc,
    },
    VolterraQuadratic {
        b: TimeFnDoc,
        #[serde(default)]
        a: KernelDoc,
    },
    Family {
        members: Vec<MemberDoc>,
    },
}

impl DriverDoc {
    pub fn from_json(text: &str) -> std::result::Result<Self, serde_json::Error> {
        serde_json::from_str(text)
    }

    pub fn to_spec<S: Scalar>(&self) -> Result<DriverSpec<S>> {
        let d = match self {
            DriverDoc::Constant { a } => DriverSpec::Constant { a: a.to_fn() },
            DriverDoc::Linear { b, a } => DriverSpec::Linear { b: b.to_vec(), a: a.to_fn() },
            DriverDoc::Entropic { b, a } => DriverSpec::Entropic { b: S::lit(*b), a: a.to_fn() },
            DriverDoc::Abs { kappa, a } => DriverSpec::Abs { kappa: S::lit(*kappa), a: a.to_fn() },
            DriverDoc::VolterraLinear { a, b } => DriverSpec::VolterraLinear { a: vec![a.to_fn()], b: b.to_fn() },
            DriverDoc::VolterraQuadratic { b, a } => DriverSpec::VolterraQuadratic { b: b.to_fn(), a: a.to_fn() },
            DriverDoc::Family { members } => {
                let m = members
                    .iter()
                    .map(|m| Ok((S::lit(m.horizon), m.driver.to_spec()?)))
                    .collect::<Result<Vec<_>>>()?;
                DriverSpec::Family(Family::new(m)?)
            }
        };
        d.validate()?;
        Ok(d)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ClaimDoc {
    Constant {
        value: f64,
        #[serde(default)]
        horizon: Option<f64>,
    },
    Linear {
        z: VecDoc,
        #[serde(default)]
        c: f64,
        #[serde(default)]
        horizon: Option<f64>,
    },
    Call {
        strike: f64,
        #[serde(default)]
        component: usize,
        #[serde(default)]
        horizon: Option<f64>,
    },
    Put {
        strike: f64,
        #[serde(default)]
        component: usize,
        #[serde(default)]
        horizon: Option<f64>,
    },
    /// Bounded random function of the tree node (tree backend only).
    RandomNodes {
        seed: u64,
        #[serde(default = "unit")]
        scale: f64,
        #[serde(default)]
        horizon: Option<f64>,
    },
}

fn unit() -> f64 {
    1.0
}

impl ClaimDoc {
    pub fn from_json(text: &str) -> std::result::Result<Self, serde_json::Error> {
        serde_json::from_str(text)
    }

    pub fn horizon(&self) -> Option<f64> {
        match *self {
            ClaimDoc::Constant { horizon, .. }
            | ClaimDoc::Linear { horizon, .. }
            | ClaimDoc::Call { horizon, .. }
            | ClaimDoc::Put { horizon, .. }
            | ClaimDoc::RandomNodes { horizon, .. } => horizon,
        }
    }

    /// Horizon-free shape used by the diagnostics (one-dimensional claims only).
    pub fn template(&self) -> Result<ClaimTemplate> {
        Ok(match self {
            ClaimDoc::Constant { value, .. } => ClaimTemplate::Constant(*value),
            ClaimDoc::Linear { z: VecDoc::Scalar(z), c, .. } => ClaimTemplate::Linear { z: *z, c: *c },
            ClaimDoc::Linear { z: VecDoc::Vector(z), c, .. } if z.len() == 1 => ClaimTemplate::Linear { z: z[0], c: *c },
            ClaimDoc::Call { strike, component: 0, .. } => ClaimTemplate::Call { strike: *strike },
            ClaimDoc::Put { strike, component: 0, .. } => ClaimTemplate::Put { strike: *strike },
            ClaimDoc::RandomNodes { seed, scale, .. } => ClaimTemplate::RandomNodes { seed: *seed, scale: *scale },
            _ => return invalid("diagnostics take one-dimensional claims"),
        })
    }

    /// The claim at `horizon`, or at its own horizon when `horizon` is `None`.
    ///
    /// Random node claims need the tree step `sqrt_dt` and the level of the horizon.
    pub fn to_spec<S: Scalar>(&self, horizon: Option<f64>, tree: Option<(S, usize)>) -> Result<ClaimSpec<S>> {
        let Some(h) = horizon.or(self.horizon()) else {
            return invalid("claim has no horizon");
        };
        let u = S::lit(h);
        let kind = match self {
            ClaimDoc::Constant { value, .. } => ClaimKind::Constant(S::lit(*value)),
            ClaimDoc::Linear { z, c, .. } => ClaimKind::Linear { z: z.to_vec(), c: S::lit(*c) },
            ClaimDoc::Call { strike, component, .. } => ClaimKind::Call { strike: S::lit(*strike), component: *component },
            ClaimDoc::Put { strike, component, .. } => ClaimKind::Put { strike: S::lit(*strike), component: *component },
            ClaimDoc::RandomNodes { .. } => {
                let Some((sqrt_dt, level)) = tree else {
                    return invalid("random node claims need the tree backend");
                };
                return ClaimTemplate::node_values_at(&self.template()?, sqrt_dt, level, u);
            }
        };
        Ok(ClaimSpec { horizon: u, kind })
    }
}
