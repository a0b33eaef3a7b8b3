//! Run manifest schema and validation.

use std::collections::BTreeMap;

use fdrisk::document::{ClaimDoc, DriverDoc};
use fdrisk::{BackendTag, TimeGrid};
use serde::de::DeserializeOwned;
use serde::Deserialize;
use serde_json::Value;

use crate::error::CliError;

fn default_tolerance() -> f64 {
    1e-9
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridDoc {
    #[serde(rename = "T")]
    pub horizon: f64,
    #[serde(rename = "N")]
    pub steps: usize,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct McDoc {
    pub paths: usize,
    pub seed: u64,
    #[serde(default = "McDoc::default_degree")]
    pub degree: usize,
    #[serde(default = "McDoc::default_clip")]
    pub z_clip: f64,
    #[serde(default)]
    pub antithetic: bool,
    #[serde(default = "McDoc::default_dim")]
    pub dim: usize,
}

impl McDoc {
    fn default_degree() -> usize {
        3
    }
    fn default_clip() -> f64 {
        10.0
    }
    fn default_dim() -> usize {
        1
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputDoc {
    #[serde(default = "OutputDoc::default_dir")]
    pub dir: String,
    #[serde(default = "OutputDoc::default_formats")]
    pub formats: Vec<Format>,
}

impl OutputDoc {
    fn default_dir() -> String {
        "out".into()
    }
    fn default_formats() -> Vec<Format> {
        vec![Format::Csv, Format::Json]
    }
}

impl Default for OutputDoc {
    fn default() -> Self {
        Self { dir: Self::default_dir(), formats: Self::default_formats() }
    }
}

#[derive(Debug, Clone, Deserialize)]
pub struct DriverEntry {
    pub id: String,
    #[serde(flatten)]
    pub doc: DriverDoc,
}

#[derive(Debug, Clone, Deserialize)]
pub struct ClaimEntry {
    pub id: String,
    #[serde(flatten)]
    pub doc: ClaimDoc,
}

/// Top level of a manifest; tasks are kept raw and parsed by type.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawManifest {
    backend: BackendTag,
    grid: GridDoc,
    #[serde(default)]
    mc: Option<McDoc>,
    #[serde(default = "default_tolerance")]
    tolerance: f64,
    #[serde(default)]
    drivers: Vec<DriverEntry>,
    #[serde(default)]
    claims: Vec<ClaimEntry>,
    #[serde(default)]
    tasks: Vec<Value>,
    #[serde(default)]
    output: OutputDoc,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QGridDoc {
    pub min: f64,
    pub max: f64,
    pub points: usize,
}

impl QGridDoc {
    pub fn values(&self) -> Vec<f64> {
        if self.points < 2 {
            return vec![self.min];
        }
        let h = (self.max - self.min) / (self.points - 1) as f64;
        (0..self.points).map(|i| self.min + h * i as f64).collect()
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CorpusDoc {
    #[serde(default)]
    pub seed: Option<u64>,
    pub count: usize,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SampleDoc {
    pub count: usize,
    #[serde(default)]
    pub seed: Option<u64>,
    pub q_max: f64,
    pub q_grid: QGridDoc,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolveTask {
    pub id: String,
    #[serde(rename = "type")]
    _type: String,
    pub driver: String,
    pub claim: String,
    #[serde(default)]
    pub s: f64,
    #[serde(default)]
    pub horizon: Option<f64>,
    /// Verdict against the closed form, when one exists.
    #[serde(default)]
    pub tolerance: Option<f64>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SurfaceTask {
    pub id: String,
    #[serde(rename = "type")]
    _type: String,
    pub driver: String,
    pub claim: String,
    pub s: Vec<f64>,
    pub horizons: Vec<f64>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GammaTask {
    pub id: String,
    #[serde(rename = "type")]
    _type: String,
    pub driver: String,
    pub claim: String,
    #[serde(default)]
    pub s: f64,
    pub t: f64,
    pub u: Vec<f64>,
    #[serde(default)]
    pub tolerance: Option<f64>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CheckTask {
    pub id: String,
    #[serde(rename = "type")]
    _type: String,
    pub driver: String,
    #[serde(default)]
    pub claims: Vec<String>,
    #[serde(default)]
    pub corpus: Option<CorpusDoc>,
    #[serde(default)]
    pub times: Option<Vec<f64>>,
    #[serde(default)]
    pub tolerance: Option<f64>,
    /// Second generator and the two terminal claims of a horizon comparison.
    #[serde(default)]
    pub driver2: Option<String>,
    #[serde(default)]
    pub claim1: Option<String>,
    #[serde(default)]
    pub claim2: Option<String>,
    /// Sampled measures for the penalty relations.
    #[serde(default)]
    pub sample: Option<SampleDoc>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DualTask {
    pub id: String,
    #[serde(rename = "type")]
    _type: String,
    pub driver: String,
    pub claim: String,
    #[serde(default)]
    pub s: f64,
    #[serde(default)]
    pub t: Option<f64>,
    pub q_grid: QGridDoc,
    #[serde(default)]
    pub newton: bool,
    #[serde(default)]
    pub tolerance: Option<f64>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RecoverTask {
    pub id: String,
    #[serde(rename = "type")]
    _type: String,
    pub driver: String,
    #[serde(default)]
    pub horizon: Option<f64>,
    pub s: Vec<f64>,
    pub z: Vec<f64>,
    /// Finite-difference step in grid steps.
    #[serde(default = "RecoverTask::default_eps_steps")]
    pub eps_steps: usize,
    #[serde(default)]
    pub richardson: bool,
    #[serde(default)]
    pub tolerance: Option<f64>,
}

impl RecoverTask {
    fn default_eps_steps() -> usize {
        4
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PenaltyTask {
    pub id: String,
    #[serde(rename = "type")]
    _type: String,
    pub driver: String,
    /// Constant kernel of the measure on `[s, t]`.
    pub q: f64,
    #[serde(default)]
    pub s: f64,
    pub t: f64,
}

#[derive(Debug, Clone)]
pub enum TaskKind {
    Solve(SolveTask),
    Surface(SurfaceTask),
    Gamma(GammaTask),
    Check(fdrisk::diagnostics::Property, CheckTask),
    Dual(DualTask),
    Recover(RecoverTask),
    Penalty(PenaltyTask),
}

#[derive(Debug, Clone)]
pub struct Task {
    pub index: usize,
    pub type_name: String,
    pub kind: TaskKind,
}

impl Task {
    pub fn id(&self) -> &str {
        match &self.kind {
            TaskKind::Solve(t) => &t.id,
            TaskKind::Surface(t) => &t.id,
            TaskKind::Gamma(t) => &t.id,
            TaskKind::Check(_, t) => &t.id,
            TaskKind::Dual(t) => &t.id,
            TaskKind::Recover(t) => &t.id,
            TaskKind::Penalty(t) => &t.id,
        }
    }

    pub fn pointer(&self) -> String {
        format!("/tasks/{}", self.index)
    }
}

/// Validated manifest.
#[derive(Debug, Clone)]
pub struct Manifest {
    pub backend: BackendTag,
    pub grid: GridDoc,
    pub mc: Option<McDoc>,
    pub tolerance: f64,
    pub drivers: BTreeMap<String, (usize, DriverDoc)>,
    pub claims: BTreeMap<String, (usize, ClaimDoc)>,
    pub tasks: Vec<Task>,
    pub output: OutputDoc,
}

fn from_value<T: DeserializeOwned>(v: &Value, prefix: &str) -> Result<T, CliError> {
    serde_path_to_error::deserialize(v).map_err(|e| {
        let path = e.path().to_string();
        let ptr = if path == "." { String::new() } else { pointer_from_path(&path) };
        CliError::config(format!("{prefix}{ptr}"), e.into_inner().to_string())
    })
}

/// `a.b[2].c` -> `/a/b/2/c`
fn pointer_from_path(path: &str) -> String {
    let mut out = String::new();
    for seg in path.split('.') {
        let mut rest = seg;
        if let Some(i) = rest.find('[') {
            let (name, idx) = rest.split_at(i);
            if !name.is_empty() {
                out.push('/');
                out.push_str(name);
            }
            rest = idx;
            for part in rest.split(['[', ']']).filter(|p| !p.is_empty()) {
                out.push('/');
                out.push_str(part);
            }
        } else {
            out.push('/');
            out.push_str(rest);
        }
    }
    out
}

fn safe_id(id: &str) -> bool {
    !id.is_empty() && id.chars().all(|c| c.is_ascii_alphanumeric() || matches!(c, '_' | '-' | '.')) && !id.starts_with('.')
}

struct TimeCheck<'a> {
    grid: &'a TimeGrid<f64>,
}

impl TimeCheck<'_> {
    fn one(&self, t: f64, ptr: String) -> Result<(), CliError> {
        if self.grid.contains(t) {
            Ok(())
        } else {
            Err(CliError::config(ptr, format!("time {t} is not a grid point")))
        }
    }

    fn many(&self, ts: &[f64], ptr: &str) -> Result<(), CliError> {
        ts.iter().enumerate().try_for_each(|(i, &t)| self.one(t, format!("{ptr}/{i}")))
    }
}

impl Manifest {
    pub fn parse(text: &str) -> Result<Self, CliError> {
        let value: Value = serde_json::from_str(text).map_err(|e| CliError::config(String::new(), format!("invalid JSON: {e}")))?;
        let raw: RawManifest = from_value(&value, "")?;
        if !(raw.grid.horizon > 0.0) || raw.grid.steps == 0 {
            return Err(CliError::config("/grid", "grid needs T > 0 and N >= 1"));
        }
        let grid = TimeGrid::uniform(raw.grid.horizon, raw.grid.steps).map_err(|e| CliError::config("/grid", e.to_string()))?;
        match (raw.backend, &raw.mc) {
            (BackendTag::Mc, None) => return Err(CliError::config("/mc", "the mc backend needs an mc section with a seed")),
            (BackendTag::Mc, Some(m)) if m.paths == 0 => return Err(CliError::config("/mc/paths", "paths must be positive")),
            _ => {}
        }
        if !(raw.tolerance >= 0.0) {
            return Err(CliError::config("/tolerance", "tolerance must be non-negative"));
        }
        let check = TimeCheck { grid: &grid };

        let mut drivers = BTreeMap::new();
        for (i, d) in raw.drivers.into_iter().enumerate() {
            let ptr = format!("/drivers/{i}");
            if let DriverDoc::Family { members } = &d.doc {
                for (j, m) in members.iter().enumerate() {
                    check.one(m.horizon, format!("{ptr}/members/{j}/horizon"))?;
                }
            }
            d.doc.to_spec::<f64>().map_err(|e| CliError::config(ptr.clone(), e.to_string()))?;
            if drivers.insert(d.id.clone(), (i, d.doc)).is_some() {
                return Err(CliError::config(format!("{ptr}/id"), format!("duplicate driver id {:?}", d.id)));
            }
        }
        let mut claims = BTreeMap::new();
        for (i, c) in raw.claims.into_iter().enumerate() {
            let ptr = format!("/claims/{i}");
            if let Some(h) = c.doc.horizon() {
                check.one(h, format!("{ptr}/horizon"))?;
            }
            if claims.insert(c.id.clone(), (i, c.doc)).is_some() {
                return Err(CliError::config(format!("{ptr}/id"), format!("duplicate claim id {:?}", c.id)));
            }
        }

        let mut tasks = Vec::new();
        let mut seen = std::collections::BTreeSet::new();
        for (i, v) in raw.tasks.iter().enumerate() {
            let ptr = format!("/tasks/{i}");
            let Some(type_name) = v.get("type").and_then(Value::as_str) else {
                return Err(CliError::config(format!("{ptr}/type"), "task needs a string type"));
            };
            let kind = match type_name {
                "solve" => TaskKind::Solve(from_value(v, &ptr)?),
                "surface" => TaskKind::Surface(from_value(v, &ptr)?),
                "gamma" => TaskKind::Gamma(from_value(v, &ptr)?),
                "dual" => TaskKind::Dual(from_value(v, &ptr)?),
                "recover-driver" => TaskKind::Recover(from_value(v, &ptr)?),
                "penalty" => TaskKind::Penalty(from_value(v, &ptr)?),
                other => match other.strip_prefix("check:").and_then(fdrisk::diagnostics::Property::parse) {
                    Some(p) => TaskKind::Check(p, from_value(v, &ptr)?),
                    None => return Err(CliError::config(format!("{ptr}/type"), format!("unknown task type {other:?}"))),
                },
            };
            let task = Task { index: i, type_name: type_name.to_string(), kind };
            if !safe_id(task.id()) {
                return Err(CliError::config(format!("{ptr}/id"), "task ids use letters, digits, '_', '-' and '.'"));
            }
            if !seen.insert(task.id().to_string()) {
                return Err(CliError::config(format!("{ptr}/id"), format!("duplicate task id {:?}", task.id())));
            }
            validate_task(&task, &check, &drivers, &claims, raw.backend)?;
            tasks.push(task);
        }
        Ok(Self { backend: raw.backend, grid: raw.grid, mc: raw.mc, tolerance: raw.tolerance, drivers, claims, tasks, output: raw.output })
    }

    pub fn time_grid(&self) -> TimeGrid<f64> {
        TimeGrid::uniform(self.grid.horizon, self.grid.steps).expect("validated grid")
    }
}

fn validate_task(
    task: &Task,
    check: &TimeCheck<'_>,
    drivers: &BTreeMap<String, (usize, DriverDoc)>,
    claims: &BTreeMap<String, (usize, ClaimDoc)>,
    backend: BackendTag,
) -> Result<(), CliError> {
    let ptr = task.pointer();
    let driver = |id: &str, field: &str| {
        if drivers.contains_key(id) {
            Ok(())
        } else {
            Err(CliError::config(format!("{ptr}/{field}"), format!("unknown driver {id:?}")))
        }
    };
    let claim = |id: &str, field: &str| {
        if claims.contains_key(id) {
            Ok(())
        } else {
            Err(CliError::config(format!("{ptr}/{field}"), format!("unknown claim {id:?}")))
        }
    };
    let tree_only = |what: &str| {
        if backend == BackendTag::Tree {
            Ok(())
        } else {
            Err(CliError::config(format!("{ptr}/type"), format!("{what} runs on the tree backend only")))
        }
    };
    match &task.kind {
        TaskKind::Solve(t) => {
            driver(&t.driver, "driver")?;
            claim(&t.claim, "claim")?;
            check.one(t.s, format!("{ptr}/s"))?;
            if let Some(h) = t.horizon {
                check.one(h, format!("{ptr}/horizon"))?;
            }
        }
        TaskKind::Surface(t) => {
            driver(&t.driver, "driver")?;
            claim(&t.claim, "claim")?;
            check.many(&t.s, &format!("{ptr}/s"))?;
            check.many(&t.horizons, &format!("{ptr}/horizons"))?;
        }
        TaskKind::Gamma(t) => {
            driver(&t.driver, "driver")?;
            claim(&t.claim, "claim")?;
            check.one(t.s, format!("{ptr}/s"))?;
            check.one(t.t, format!("{ptr}/t"))?;
            check.many(&t.u, &format!("{ptr}/u"))?;
        }
        TaskKind::Check(p, t) => {
            use fdrisk::diagnostics::Property as P;
            driver(&t.driver, "driver")?;
            for (i, c) in t.claims.iter().enumerate() {
                claim(c, &format!("claims/{i}"))?;
            }
            if let Some(ts) = &t.times {
                check.many(ts, &format!("{ptr}/times"))?;
            }
            match p {
                P::HorizonComparison => {
                    tree_only("horizon comparison")?;
                    let need = |o: &Option<String>, f: &str| {
                        o.clone().ok_or_else(|| CliError::config(format!("{ptr}/{f}"), format!("horizon comparison needs {f}")))
                    };
                    driver(&need(&t.driver2, "driver2")?, "driver2")?;
                    claim(&need(&t.claim1, "claim1")?, "claim1")?;
                    claim(&need(&t.claim2, "claim2")?, "claim2")?;
                }
                P::Cocycle | P::WeakCocycle | P::SubPenalty => {
                    tree_only("penalty relations")?;
                    if t.sample.is_none() {
                        return Err(CliError::config(format!("{ptr}/sample"), "penalty relations need a measure sample"));
                    }
                }
                P::Normalization => {}
                _ => {
                    if t.claims.is_empty() && t.corpus.is_none() {
                        return Err(CliError::config(format!("{ptr}/claims"), "give claims or a corpus"));
                    }
                }
            }
        }
        TaskKind::Dual(t) => {
            tree_only("the dual representation")?;
            driver(&t.driver, "driver")?;
            claim(&t.claim, "claim")?;
            check.one(t.s, format!("{ptr}/s"))?;
            if let Some(x) = t.t {
                check.one(x, format!("{ptr}/t"))?;
            }
            if t.q_grid.points == 0 {
                return Err(CliError::config(format!("{ptr}/q_grid/points"), "q grid needs at least one point"));
            }
        }
        TaskKind::Recover(t) => {
            driver(&t.driver, "driver")?;
            if let Some(h) = t.horizon {
                check.one(h, format!("{ptr}/horizon"))?;
            }
            check.many(&t.s, &format!("{ptr}/s"))?;
            if t.eps_steps == 0 {
                return Err(CliError::config(format!("{ptr}/eps_steps"), "eps_steps must be positive"));
            }
        }
        TaskKind::Penalty(t) => {
            driver(&t.driver, "driver")?;
            check.one(t.s, format!("{ptr}/s"))?;
            check.one(t.t, format!("{ptr}/t"))?;
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn path_to_pointer() {
        assert_eq!(pointer_from_path("grid.N"), "/grid/N");
        assert_eq!(pointer_from_path("drivers[2].b"), "/drivers/2/b");
        assert_eq!(pointer_from_path("q_grid.points"), "/q_grid/points");
    }

    #[test]
    fn ids() {
        assert!(safe_id("gamma-1.a"));
        assert!(!safe_id("../x"));
        assert!(!safe_id(""));
    }
}
