//! Task execution.

use std::collections::BTreeMap;

use fdrisk::diagnostics::{
    all_pairs, all_triples, check_acceptance_inclusion, check_horizon_comparison, check_penalty_relations, check_structure,
    check_time_consistency, claim_corpus, gamma_surface, recover_driver, Backend, ClaimTemplate, ConsistencyReport, PenaltySample,
    Property, MC_SE_MULT,
};
use fdrisk::duality::{build_tree_density, closed_form, penalty_mc, MeasureSpec};
use fdrisk::mc::{mc_solve_bsde, simulate_paths, EnsembleConfig, PathEnsemble, SolverConfig};
use fdrisk::tree::{tree_dual_sup, tree_penalty, tree_rho, DualOptions, TreeModel};
use fdrisk::{BackendTag, Claim, Driver, TimeGrid};
use serde_json::Value;

use crate::manifest::{CheckTask, DualTask, GammaTask, Manifest, PenaltyTask, RecoverTask, SolveTask, SurfaceTask, Task, TaskKind};
use crate::output::{json_num, num, opt_num, Table};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    /// Computed, no verdict requested.
    Done,
    Pass,
    Fail,
    Error,
}

impl Status {
    pub fn as_str(self) -> &'static str {
        match self {
            Status::Done => "done",
            Status::Pass => "pass",
            Status::Fail => "fail",
            Status::Error => "error",
        }
    }

    fn verdict(ok: bool) -> Self {
        if ok {
            Status::Pass
        } else {
            Status::Fail
        }
    }
}

pub struct Outcome {
    pub status: Status,
    pub table: Option<Table>,
    pub metrics: BTreeMap<String, Value>,
    pub notes: Vec<String>,
    pub error: Option<String>,
}

impl Outcome {
    fn new(status: Status, table: Table) -> Self {
        Self { status, table: Some(table), metrics: BTreeMap::new(), notes: Vec::new(), error: None }
    }

    fn metric(mut self, k: &str, v: f64) -> Self {
        self.metrics.insert(k.into(), json_num(v));
        self
    }

    pub fn failed(msg: String) -> Self {
        Self { status: Status::Error, table: None, metrics: BTreeMap::new(), notes: Vec::new(), error: Some(msg) }
    }
}

/// Shared, immutable state for all tasks of a run.
pub struct Context<'m> {
    pub manifest: &'m Manifest,
    pub grid: TimeGrid<f64>,
    pub tree: Option<TreeModel<f64>>,
    pub ensemble: Option<PathEnsemble<f64>>,
    pub mc_cfg: SolverConfig<f64>,
    /// Overrides every verdict tolerance when set.
    pub tolerance: Option<f64>,
}

type TaskResult = Result<Outcome, String>;

fn err(e: fdrisk::Error) -> String {
    e.to_string()
}

impl<'m> Context<'m> {
    pub fn new(manifest: &'m Manifest, tolerance: Option<f64>) -> Result<Self, String> {
        let grid = manifest.time_grid();
        let (tree, ensemble, mc_cfg) = match manifest.backend {
            BackendTag::Tree => (Some(TreeModel::new(grid.clone()).map_err(err)?), None, SolverConfig::default()),
            BackendTag::Mc => {
                let m = manifest.mc.as_ref().expect("validated mc section");
                let cfg = EnsembleConfig { paths: m.paths, dim: m.dim, seed: m.seed, antithetic: m.antithetic };
                let e = simulate_paths(&grid, cfg).map_err(err)?;
                (None, Some(e), SolverConfig { degree: m.degree, z_clip: m.z_clip })
            }
        };
        Ok(Self { manifest, grid, tree, ensemble, mc_cfg, tolerance })
    }

    fn backend(&self) -> Backend<'_, f64> {
        match (&self.tree, &self.ensemble) {
            (Some(t), _) => Backend::Tree(t),
            (None, Some(e)) => Backend::Mc(e, self.mc_cfg),
            _ => unreachable!("context holds one backend"),
        }
    }

    fn tag(&self) -> &'static str {
        match self.manifest.backend {
            BackendTag::Tree => "tree",
            BackendTag::Mc => "mc",
        }
    }

    fn seed(&self) -> u64 {
        self.manifest.mc.as_ref().map(|m| m.seed).unwrap_or(0)
    }

    fn tol(&self, task: Option<f64>) -> f64 {
        self.tolerance.or(task).unwrap_or(self.manifest.tolerance)
    }

    fn driver(&self, id: &str) -> Result<Driver, String> {
        self.manifest.drivers[id].1.to_spec().map_err(err)
    }

    fn template(&self, id: &str) -> Result<ClaimTemplate, String> {
        self.manifest.claims[id].1.template().map_err(err)
    }

    /// The claim at its own horizon, or at `fallback` when it declares none.
    fn claim(&self, id: &str, fallback: f64) -> Result<Claim, String> {
        let doc = &self.manifest.claims[id].1;
        let h = doc.horizon().unwrap_or(fallback);
        self.claim_at(id, h)
    }

    fn claim_at(&self, id: &str, h: f64) -> Result<Claim, String> {
        let doc = &self.manifest.claims[id].1;
        let tree = match &self.tree {
            Some(t) => Some((t.sqrt_dt(), t.level(h).map_err(err)?)),
            None => None,
        };
        doc.to_spec(Some(h), tree).map_err(err)
    }

    pub fn run(&self, task: &Task) -> Outcome {
        let r = match &task.kind {
            TaskKind::Solve(t) => self.solve(t),
            TaskKind::Surface(t) => self.surface(t),
            TaskKind::Gamma(t) => self.gamma(t),
            TaskKind::Check(p, t) => self.check(*p, t),
            TaskKind::Dual(t) => self.dual(t),
            TaskKind::Recover(t) => self.recover(t),
            TaskKind::Penalty(t) => self.penalty(t),
        };
        r.unwrap_or_else(|e| Outcome::failed(format!("task {}: {e}", task.id())))
    }

    /// Appends the value rows; returns the root value, its standard error and the
    /// largest deviation from the closed form.
    fn value_rows(&self, table: &mut Table, d: &Driver, c: &Claim, s: f64, h: f64) -> Result<(f64, Option<f64>, Option<f64>), String> {
        match (&self.tree, &self.ensemble) {
            (Some(tree), _) => {
                let v = tree_rho(tree, d, c, s, h).map_err(err)?;
                let si = tree.level(s).map_err(err)?;
                let mut dev: Option<f64> = None;
                for (j, &y) in v.iter().enumerate() {
                    let b = tree.b(si, j);
                    let cf = closed_form(d, c, s, h, &[b]);
                    if let Some(cf) = cf {
                        dev = Some(dev.unwrap_or(0.0).max((y - cf).abs()));
                    }
                    table.push(vec![num(s), num(h), j.to_string(), num(b), num(y), String::new(), opt_num(cf), self.tag().into()]);
                }
                Ok((v[0], None, dev))
            }
            (None, Some(e)) => {
                let sol = mc_solve_bsde(e, d, c, s, h, self.mc_cfg).map_err(err)?;
                let cf = if s == 0.0 { closed_form(d, c, s, h, &vec![0.0; e.dim()]) } else { None };
                table.push(vec![
                    num(s),
                    num(h),
                    String::new(),
                    String::new(),
                    num(sol.estimate),
                    num(sol.stderr),
                    opt_num(cf),
                    self.tag().into(),
                ]);
                Ok((sol.estimate, Some(sol.stderr), cf.map(|cf| (sol.estimate - cf).abs())))
            }
            _ => unreachable!(),
        }
    }

    const VALUE_COLUMNS: [&'static str; 8] = ["s", "horizon", "node", "b", "value", "stderr", "closed_form", "backend"];

    fn solve(&self, t: &SolveTask) -> TaskResult {
        let d = self.driver(&t.driver)?;
        let h = t.horizon.or(self.manifest.claims[&t.claim].1.horizon()).unwrap_or(self.grid.horizon());
        let c = self.claim(&t.claim, h)?;
        let mut table = Table::new(&Self::VALUE_COLUMNS);
        let (v, se, dev) = self.value_rows(&mut table, &d, &c, t.s, h)?;
        let status = match (t.tolerance, dev) {
            (Some(tol), Some(dev)) => Status::verdict(dev <= self.tol(Some(tol)) + MC_SE_MULT * se.unwrap_or(0.0)),
            (Some(_), None) => return Err("tolerance given but no closed form is available".into()),
            _ => Status::Done,
        };
        let mut o = Outcome::new(status, table).metric("value", v);
        if let Some(se) = se {
            o = o.metric("stderr", se);
        }
        if let Some(dev) = dev {
            o = o.metric("closed_form_error", dev);
        }
        Ok(o)
    }

    fn surface(&self, t: &SurfaceTask) -> TaskResult {
        let d = self.driver(&t.driver)?;
        let mut table = Table::new(&Self::VALUE_COLUMNS);
        let own = self.manifest.claims[&t.claim].1.horizon();
        for &h in &t.horizons {
            if own.is_some_and(|c| c > h + 1e-12) {
                continue;
            }
            let c = self.claim(&t.claim, h)?;
            for &s in t.s.iter().filter(|&&s| s <= h + 1e-12) {
                self.value_rows(&mut table, &d, &c, s, h)?;
            }
        }
        let n = table.len() as f64;
        Ok(Outcome::new(Status::Done, table).metric("entries", n))
    }

    fn gamma(&self, t: &GammaTask) -> TaskResult {
        let d = self.driver(&t.driver)?;
        let c = self.claim_at(&t.claim, t.t)?;
        let rep = gamma_surface(&self.backend(), &d, &c, t.s, t.t, &t.u).map_err(err)?;
        let mut table = Table::new(&["s", "t", "u", "gamma", "closed_form", "stderr", "backend", "node"]);
        let tol = t.tolerance.map(|x| self.tol(Some(x)));
        let mut ok = true;
        for r in &rep.rows {
            if let (Some(tol), Some(cf)) = (tol, r.closed_form) {
                let allow = tol + MC_SE_MULT * r.stderr.unwrap_or(0.0);
                ok &= (r.gamma - cf).abs() <= allow;
            }
            table.push(vec![
                num(r.s),
                num(r.t),
                num(r.u),
                num(r.gamma),
                opt_num(r.closed_form),
                opt_num(r.stderr),
                self.tag().into(),
                r.node.map(|j| j.to_string()).unwrap_or_default(),
            ]);
        }
        let status = if tol.is_some() { Status::verdict(ok) } else { Status::Done };
        let mut o = Outcome::new(status, table).metric("min_gamma", rep.min_gamma());
        if let Some(e) = rep.max_abs_error() {
            o = o.metric("max_abs_error", e);
        }
        Ok(o)
    }

    fn templates(&self, t: &CheckTask) -> Result<Vec<ClaimTemplate>, String> {
        let mut out = t.claims.iter().map(|c| self.template(c)).collect::<Result<Vec<_>, _>>()?;
        if let Some(c) = &t.corpus {
            out.extend(claim_corpus(c.seed.unwrap_or(self.seed()), c.count, self.tree.is_some()));
        }
        Ok(out)
    }

    fn check(&self, p: Property, t: &CheckTask) -> TaskResult {
        let d = self.driver(&t.driver)?;
        let tol = self.tol(t.tolerance);
        let b = self.backend();
        let times = t.times.clone().unwrap_or_else(|| self.grid.times().to_vec());
        let triples = all_triples(&times);
        let rep: ConsistencyReport<f64> = match p {
            Property::StrongTc | Property::WeakTc | Property::OrderTc | Property::SubTc | Property::HLongevity => {
                check_time_consistency(p, &b, &d, &self.templates(t)?, &triples, tol)
            }
            Property::Restriction | Property::Normalization => check_structure(p, &b, &d, &self.templates(t)?, &all_pairs(&times), tol),
            Property::AcceptanceInclusion => check_acceptance_inclusion(&b, &d, &self.templates(t)?, &triples, tol),
            Property::HorizonComparison => {
                let tree = self.tree.as_ref().expect("validated tree backend");
                let d2 = self.driver(t.driver2.as_deref().expect("validated"))?;
                let x1 = self.claim(t.claim1.as_deref().expect("validated"), self.grid.horizon())?;
                let x2 = self.claim(t.claim2.as_deref().expect("validated"), self.grid.horizon())?;
                check_horizon_comparison(tree, &d, &d2, &x1, &x2, tol)
            }
            Property::Cocycle | Property::WeakCocycle | Property::SubPenalty => {
                let tree = self.tree.as_ref().expect("validated tree backend");
                let s = t.sample.as_ref().expect("validated sample");
                let sample = PenaltySample {
                    count: s.count,
                    seed: s.seed.unwrap_or(self.seed()),
                    q_max: s.q_max,
                    q_grid: s.q_grid.values(),
                    claims: self.templates(t)?,
                };
                check_penalty_relations(p, tree, &d, &triples, &sample, tol)
            }
        }
        .map_err(err)?;
        let mut table = Table::new(&["property", "s", "t", "u", "item", "violation", "allowance", "passed", "in_long", "in_short"]);
        for (i, r) in rep.rows.iter().enumerate() {
            let (a, c) = rep.memberships.get(i).map(|&(a, c)| (a.to_string(), c.to_string())).unwrap_or_default();
            table.push(vec![
                p.name().into(),
                num(r.s),
                num(r.t),
                num(r.u),
                r.item.to_string(),
                num(r.violation),
                num(r.allowance),
                r.passed().to_string(),
                a,
                c,
            ]);
        }
        let mut o = Outcome::new(Status::verdict(rep.passed()), table)
            .metric("worst_violation", rep.worst_violation)
            .metric("worst_signed", rep.worst_signed)
            .metric("tolerance", tol);
        if let Some(w) = rep.witness {
            o.metrics.insert("witness_row".into(), Value::from(w));
        }
        o.notes = rep.notes;
        Ok(o)
    }

    fn dual(&self, t: &DualTask) -> TaskResult {
        let tree = self.tree.as_ref().expect("validated tree backend");
        let d = self.driver(&t.driver)?;
        let own = self.manifest.claims[&t.claim].1.horizon();
        let horizon = t.t.or(own).unwrap_or(self.grid.horizon());
        let c = self.claim(&t.claim, horizon)?;
        let q_grid = t.q_grid.values();
        let du = tree_dual_sup(tree, &d, &c, t.s, horizon, &q_grid, DualOptions { newton_refine: t.newton }).map_err(err)?;
        let primal = tree_rho(tree, &d, &c, t.s, horizon).map_err(err)?;
        let si = tree.level(t.s).map_err(err)?;
        let mut table = Table::new(&["s", "t", "node", "dual", "primal", "gap", "q_star"]);
        let mut gap = 0.0_f64;
        for (j, (&dv, &pv)) in du.values.iter().zip(&primal).enumerate() {
            gap = gap.max(pv - dv);
            let q = if si < tree.level(horizon).map_err(err)? { num(du.argmax.q(si, j)) } else { String::new() };
            table.push(vec![num(t.s), num(horizon), j.to_string(), num(dv), num(pv), num(pv - dv), q]);
        }
        let status = match t.tolerance {
            Some(x) => Status::verdict(gap <= self.tol(Some(x))),
            None => Status::Done,
        };
        Ok(Outcome::new(status, table).metric("max_gap", gap).metric("dual_root", du.values[0]))
    }

    fn recover(&self, t: &RecoverTask) -> TaskResult {
        let d = self.driver(&t.driver)?;
        let h = t.horizon.unwrap_or(self.grid.horizon());
        let eps = t.eps_steps as f64 * self.grid.dt(0);
        let rep = recover_driver(&self.backend(), &d, h, &t.s, &t.z, eps, t.richardson).map_err(err)?;
        let mut table = Table::new(&["s", "z", "g_hat", "g_true", "error", "backend"]);
        for r in &rep.rows {
            table.push(vec![num(r.s), num(r.z), num(r.g_hat), num(r.g_true), num(r.error()), self.tag().into()]);
        }
        let e = rep.max_error();
        let status = match t.tolerance {
            Some(x) => Status::verdict(e <= self.tol(Some(x))),
            None => Status::Done,
        };
        Ok(Outcome::new(status, table).metric("max_error", e).metric("eps", eps))
    }

    fn penalty(&self, t: &PenaltyTask) -> TaskResult {
        let d = self.driver(&t.driver)?;
        let m = MeasureSpec::constant(t.q, t.s, t.t);
        let mut table = Table::new(&["s", "t", "q", "node", "penalty", "stderr", "backend"]);
        let root = match (&self.tree, &self.ensemble) {
            (Some(tree), _) => {
                let tm = build_tree_density(tree, &m).map_err(err)?;
                let v = tree_penalty(tree, &d, &tm, t.s, t.t).map_err(err)?;
                for (j, &a) in v.iter().enumerate() {
                    table.push(vec![num(t.s), num(t.t), num(t.q), j.to_string(), num(a), String::new(), self.tag().into()]);
                }
                v[0]
            }
            (None, Some(e)) => {
                let (a, se) = penalty_mc(e, &d, &m, t.s, t.t).map_err(err)?;
                table.push(vec![num(t.s), num(t.t), num(t.q), String::new(), num(a), num(se), self.tag().into()]);
                a
            }
            _ => unreachable!(),
        };
        Ok(Outcome::new(Status::Done, table).metric("penalty", root))
    }
}
