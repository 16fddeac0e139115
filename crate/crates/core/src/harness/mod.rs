//! Randomized theorem suites.
//!
//! Each suite draws seeded instances, checks a hypothesis with the
//! membership predicates, and asserts the conclusion. Trials whose
//! instance misses the hypothesis are skipped and counted with the failing
//! predicate. Every trial runs from its own seed `derive_seed(seed, index)`,
//! so any failure can be replayed in isolation with [`replay`].
//!
//! In finite dimension hyponormal, quasinormal, paranormal and
//! k-paranormal matrices are all normal, so the corresponding root theorems
//! hold vacuously; their suites still run and say so in `notes`. The
//! substantive content is carried by the k-quasi decomposition, the
//! scalar-root lemma, the normaloid counterexample, and the Embry and
//! Fuglede-Putnam checks.

mod suites;

use std::collections::BTreeMap;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::classes::Classifier;
use crate::linalg::TolerancePolicy;
use crate::rng;
use crate::{Error, Result};

pub use suites::gcd;

/// Named residuals of one trial.
pub type Residuals = BTreeMap<String, f64>;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Failure {
    pub trial: usize,
    pub seed: u64,
    pub residuals: Residuals,
    pub instance_ref: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reason: Option<String>,
}

/// Something a suite wants on record beyond pass/fail, such as the
/// confirmation that the normaloid counterexample behaves as claimed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Observation {
    pub trial: usize,
    pub seed: u64,
    pub kind: String,
    pub details: BTreeMap<String, serde_json::Value>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TheoremReport {
    pub theorem_id: String,
    pub trials: usize,
    pub passes: usize,
    pub skips: usize,
    pub skip_reasons: BTreeMap<String, usize>,
    pub failures: Vec<Failure>,
    /// Largest value of every residual over the non-skipped trials.
    pub max_residuals: Residuals,
    pub observations: Vec<Observation>,
    pub notes: Vec<String>,
    pub params: serde_json::Value,
    pub tolerances: TolerancePolicy,
    pub seed: u64,
    pub wall_time_ms: u64,
    /// More than 90% of the trials were skipped.
    pub skip_budget_exceeded: bool,
}

impl TheoremReport {
    pub fn ok(&self) -> bool {
        self.failures.is_empty() && !self.skip_budget_exceeded
    }

    /// The report with wall time zeroed; two runs with the same
    /// configuration produce identical canonical reports.
    pub fn canonical(&self) -> Self {
        Self {
            wall_time_ms: 0,
            ..self.clone()
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serialization is infallible")
    }
}

/// Fraction of trials that may be skipped before a suite is flagged.
pub const SKIP_BUDGET: f64 = 0.9;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HarnessConfig {
    pub trials: usize,
    pub min_dim: usize,
    pub max_dim: usize,
    pub seed: u64,
    pub tol: TolerancePolicy,
    /// Root order for the root suites; each suite has its own default.
    pub n: Option<u32>,
    pub k: Option<u32>,
    /// First exponent of the coprime suite.
    pub m: Option<u32>,
    pub kmax: u32,
    /// `(n, k)` pairs cycled by the decomposition suite.
    pub nk_pairs: Vec<(u32, u32)>,
    /// Negates every conclusion; used to test failure reporting.
    pub inject_failure: bool,
}

impl Default for HarnessConfig {
    fn default() -> Self {
        Self {
            trials: 50,
            min_dim: 2,
            max_dim: 8,
            seed: 0,
            tol: TolerancePolicy::default(),
            n: None,
            k: None,
            m: None,
            kmax: 3,
            nk_pairs: vec![(2, 1), (3, 1), (3, 2)],
            inject_failure: false,
        }
    }
}

impl HarnessConfig {
    pub fn validate(&self) -> Result<()> {
        self.tol.validate()?;
        if self.min_dim < 1 || self.min_dim > self.max_dim {
            return Err(Error::InvalidSpec(format!(
                "dimension range {}..={} is empty",
                self.min_dim, self.max_dim
            )));
        }
        if self.kmax < 2 {
            return Err(Error::InvalidSpec("kmax must be at least 2".into()));
        }
        if self.nk_pairs.is_empty() || self.nk_pairs.iter().any(|&(n, k)| n == 0 || k == 0) {
            return Err(Error::InvalidSpec("(n, k) pairs must be nonempty and positive".into()));
        }
        Ok(())
    }
}

/// What one trial found.
#[derive(Debug, Clone, PartialEq)]
pub enum Outcome {
    Pass,
    Skip(String),
    Fail(String),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trial {
    pub outcome: Outcome,
    pub residuals: Residuals,
    pub instance_ref: String,
    pub observation: Option<(String, BTreeMap<String, serde_json::Value>)>,
}

impl Trial {
    pub(crate) fn new(instance_ref: impl Into<String>) -> Self {
        Self {
            outcome: Outcome::Pass,
            residuals: Residuals::new(),
            instance_ref: instance_ref.into(),
            observation: None,
        }
    }

    pub(crate) fn residual(&mut self, name: &str, value: f64) -> &mut Self {
        self.residuals.insert(name.to_string(), value);
        self
    }

    pub(crate) fn skip(mut self, reason: impl Into<String>) -> Self {
        self.outcome = Outcome::Skip(reason.into());
        self
    }

    /// Fails unless `cond` holds; the first failing check wins.
    pub(crate) fn check(&mut self, cond: bool, what: &str) {
        if !cond && self.outcome == Outcome::Pass {
            self.outcome = Outcome::Fail(what.to_string());
        }
    }
}

/// Per-trial inputs.
#[derive(Debug, Clone)]
pub struct TrialCtx<'a> {
    pub index: usize,
    pub seed: u64,
    pub dim: usize,
    pub cfg: &'a HarnessConfig,
    pub clf: Classifier,
    instance: std::cell::RefCell<Option<String>>,
}

impl<'a> TrialCtx<'a> {
    pub fn new(cfg: &'a HarnessConfig, index: usize, seed: u64) -> Self {
        let mut s = rng::stream(seed, 1);
        let dim = rng::uniform_index(&mut s, cfg.min_dim, cfg.max_dim);
        let mut clf = Classifier::with_seed(seed);
        clf.tol = cfg.tol;
        Self {
            index,
            seed,
            dim,
            cfg,
            clf,
            instance: Default::default(),
        }
    }

    /// Starts a trial record; the description is kept for error reports.
    pub(crate) fn trial(&self, instance_ref: impl Into<String>) -> Trial {
        let t = Trial::new(instance_ref);
        *self.instance.borrow_mut() = Some(t.instance_ref.clone());
        t
    }

    /// Independent stream for instance choices inside the trial.
    pub fn stream(&self, index: u64) -> rng::Stream {
        rng::stream(self.seed, 2 + index)
    }

    pub fn instance_seed(&self, index: u64) -> u64 {
        rng::derive_seed(self.seed, 1000 + index)
    }
}

type TrialFn = fn(&TrialCtx) -> Result<Trial>;

/// A registered suite.
#[derive(Clone, Copy)]
pub struct Suite {
    pub id: &'static str,
    pub summary: &'static str,
    pub notes: &'static [&'static str],
    /// Largest dimension the suite uses regardless of configuration.
    pub dim_cap: Option<usize>,
    run: TrialFn,
    params: fn(&HarnessConfig) -> Result<serde_json::Value>,
}

impl std::fmt::Debug for Suite {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Suite").field("id", &self.id).finish()
    }
}

/// Suites run by `all`, in report order.
pub fn suites() -> Vec<Suite> {
    suites::registry()
}

/// Every runnable suite id, including informational ones outside `all`.
pub fn suite_ids() -> Vec<&'static str> {
    let mut ids: Vec<&str> = suites().iter().map(|s| s.id).collect();
    ids.push(suites::SEARCH_Q2.id);
    ids
}

pub fn find_suite(id: &str) -> Result<Suite> {
    if id == suites::SEARCH_Q2.id {
        return Ok(suites::SEARCH_Q2);
    }
    suites()
        .into_iter()
        .find(|s| s.id == id)
        .ok_or_else(|| Error::UnknownTheorem(id.to_string()))
}

fn trial_cfg<'a>(suite: &Suite, cfg: &'a HarnessConfig) -> std::borrow::Cow<'a, HarnessConfig> {
    match suite.dim_cap {
        Some(cap) if cfg.max_dim > cap => {
            let mut c = cfg.clone();
            c.max_dim = cap.max(c.min_dim);
            std::borrow::Cow::Owned(c)
        }
        _ => std::borrow::Cow::Borrowed(cfg),
    }
}

fn run_trial(suite: &Suite, cfg: &HarnessConfig, index: usize, seed: u64) -> Trial {
    let ctx = TrialCtx::new(cfg, index, seed);
    let mut trial = match (suite.run)(&ctx) {
        Ok(t) => t,
        Err(e) => {
            let name = ctx.instance.borrow().clone();
            let mut t = Trial::new(name.unwrap_or_else(|| format!("{}#{index}", suite.id)));
            t.outcome = Outcome::Fail(e.to_string());
            t
        }
    };
    if cfg.inject_failure && trial.outcome == Outcome::Pass {
        trial.outcome = Outcome::Fail("injected failure".into());
    }
    trial
}

/// Re-runs one trial from its recorded index and seed.
pub fn replay(id: &str, cfg: &HarnessConfig, index: usize, seed: u64) -> Result<Trial> {
    let suite = find_suite(id)?;
    let cfg = trial_cfg(&suite, cfg);
    Ok(run_trial(&suite, &cfg, index, seed))
}

pub fn run_theorem(id: &str, cfg: &HarnessConfig) -> Result<TheoremReport> {
    cfg.validate()?;
    let suite = find_suite(id)?;
    let params = (suite.params)(cfg)?;
    let cfg = trial_cfg(&suite, cfg);
    let start = Instant::now();
    let mut report = TheoremReport {
        theorem_id: suite.id.to_string(),
        trials: cfg.trials,
        passes: 0,
        skips: 0,
        skip_reasons: BTreeMap::new(),
        failures: Vec::new(),
        max_residuals: Residuals::new(),
        observations: Vec::new(),
        notes: suite.notes.iter().map(|s| s.to_string()).collect(),
        params,
        tolerances: cfg.tol,
        seed: cfg.seed,
        wall_time_ms: 0,
        skip_budget_exceeded: false,
    };
    for index in 0..cfg.trials {
        let seed = rng::derive_seed(cfg.seed, index as u64);
        let trial = run_trial(&suite, &cfg, index, seed);
        if let Some((kind, details)) = trial.observation.clone() {
            report.observations.push(Observation {
                trial: index,
                seed,
                kind,
                details,
            });
        }
        match trial.outcome {
            Outcome::Skip(reason) => {
                report.skips += 1;
                *report.skip_reasons.entry(reason).or_insert(0) += 1;
                continue;
            }
            Outcome::Pass => report.passes += 1,
            Outcome::Fail(reason) => report.failures.push(Failure {
                trial: index,
                seed,
                residuals: trial.residuals.clone(),
                instance_ref: trial.instance_ref.clone(),
                reason: Some(reason),
            }),
        }
        for (name, &v) in &trial.residuals {
            let slot = report.max_residuals.entry(name.clone()).or_insert(0.0);
            *slot = slot.max(v);
        }
    }
    report.skip_budget_exceeded = cfg.trials > 0 && report.skips as f64 > SKIP_BUDGET * cfg.trials as f64;
    report.wall_time_ms = start.elapsed().as_millis() as u64;
    Ok(report)
}

/// Runs the named suites (`"all"` expands to every suite in [`suites`]).
pub fn run_suite(ids: &[String], cfg: &HarnessConfig) -> Result<Vec<TheoremReport>> {
    cfg.validate()?;
    let mut expanded: Vec<String> = Vec::new();
    for id in ids {
        if id == "all" {
            expanded.extend(suites().iter().map(|s| s.id.to_string()));
        } else {
            find_suite(id)?;
            expanded.push(id.clone());
        }
    }
    expanded.iter().map(|id| run_theorem(id, cfg)).collect()
}

/// Aggregate written by `verify`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuiteReport {
    pub config: HarnessConfig,
    pub reports: Vec<TheoremReport>,
    pub total_failures: usize,
    pub wall_time_ms: u64,
}

impl SuiteReport {
    pub fn new(config: HarnessConfig, reports: Vec<TheoremReport>) -> Self {
        let total_failures = reports.iter().map(|r| r.failures.len()).sum();
        let wall_time_ms = reports.iter().map(|r| r.wall_time_ms).sum();
        Self {
            config,
            reports,
            total_failures,
            wall_time_ms,
        }
    }

    pub fn ok(&self) -> bool {
        self.reports.iter().all(TheoremReport::ok)
    }

    pub fn canonical(&self) -> Self {
        Self {
            reports: self.reports.iter().map(TheoremReport::canonical).collect(),
            wall_time_ms: 0,
            ..self.clone()
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serialization is infallible")
    }
}
