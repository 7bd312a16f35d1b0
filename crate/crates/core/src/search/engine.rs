use std::path::Path;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::gumbel::{gumbel_sample, step, AdamConfig, AdamState, CategoricalParams, GumbelSample};
use super::objective::{objective_value, MetricScales, Objective};
use crate::arch::{AcceleratorConfig, ChoiceIndex, SearchSpaceDef, DIMS};
use crate::cost::{network_cost, CostReport};
use crate::device::TechParams;
use crate::error::{Error, Result};
use crate::model_ir::DnnModel;

/// Largest space [`exhaustive_search`] will enumerate.
pub const EXHAUSTIVE_LIMIT: u128 = 1_000_000;

/// Gumbel-Softmax temperature, constant or linearly annealed over the run.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum TauSchedule {
    Constant(f64),
    Linear { start: f64, end: f64 },
}

impl TauSchedule {
    pub fn at(&self, step: usize, steps: usize) -> f64 {
        match *self {
            TauSchedule::Constant(t) => t,
            TauSchedule::Linear { start, end } => {
                if steps <= 1 {
                    start
                } else {
                    start + (end - start) * step as f64 / (steps - 1) as f64
                }
            }
        }
    }

    fn check(&self) -> Result<()> {
        let ok = |t: f64| t.is_finite() && t > 0.0;
        let valid = match *self {
            TauSchedule::Constant(t) => ok(t),
            TauSchedule::Linear { start, end } => ok(start) && ok(end),
        };
        if valid {
            Ok(())
        } else {
            Err(Error::InvalidSearch(format!("temperature must be positive: {self:?}")))
        }
    }
}

impl Default for TauSchedule {
    fn default() -> Self {
        TauSchedule::Constant(1.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SearchBudget {
    #[serde(default = "SearchBudget::default_steps")]
    pub steps: usize,
    #[serde(default = "SearchBudget::default_batch")]
    pub batch: usize,
    #[serde(default)]
    pub tau: TauSchedule,
    /// Decay of the moving-average baseline subtracted from sample costs.
    #[serde(default = "SearchBudget::default_baseline_decay")]
    pub baseline_decay: f64,
    #[serde(default)]
    pub adam: AdamConfig,
}

impl SearchBudget {
    fn default_steps() -> usize {
        200
    }
    fn default_batch() -> usize {
        16
    }
    fn default_baseline_decay() -> f64 {
        0.9
    }

    pub fn check(&self) -> Result<()> {
        if self.steps == 0 || self.batch == 0 {
            return Err(Error::InvalidSearch("steps and batch must be >= 1".into()));
        }
        self.tau.check()?;
        if !(0.0..1.0).contains(&self.baseline_decay) {
            return Err(Error::InvalidSearch(format!(
                "baseline_decay must be in [0, 1) (got {})",
                self.baseline_decay
            )));
        }
        let a = &self.adam;
        if !(a.lr.is_finite()
            && a.lr > 0.0
            && (0.0..1.0).contains(&a.beta1)
            && (0.0..1.0).contains(&a.beta2)
            && a.eps > 0.0)
        {
            return Err(Error::InvalidSearch(format!("invalid Adam settings: {a:?}")));
        }
        Ok(())
    }
}

impl Default for SearchBudget {
    fn default() -> Self {
        SearchBudget {
            steps: Self::default_steps(),
            batch: Self::default_batch(),
            tau: TauSchedule::default(),
            baseline_decay: Self::default_baseline_decay(),
            adam: AdamConfig::default(),
        }
    }
}

/// Contents of a search configuration file.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SearchSettings {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    pub objective: Objective,
    #[serde(default)]
    pub budget: SearchBudget,
}

impl SearchSettings {
    pub fn from_toml_str(text: &str, origin: &str) -> Result<Self> {
        let s: SearchSettings = toml::from_str(text).map_err(|e| Error::parse(origin, e))?;
        s.objective.validate()?;
        s.budget.check()?;
        Ok(s)
    }
}

pub fn load_search_settings(path: impl AsRef<Path>) -> Result<SearchSettings> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    SearchSettings::from_toml_str(&text, &path.display().to_string())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SearchMethod {
    Gumbel,
    Random,
    Exhaustive,
}

/// One costed design in the order it was evaluated.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryPoint {
    pub step: usize,
    pub sample: usize,
    pub rank: u128,
    pub objective: f64,
    pub feasible: bool,
    pub best_so_far: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StepStats {
    pub step: usize,
    pub tau: f64,
    pub batch_mean: f64,
    pub entropies: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SearchResult {
    pub method: SearchMethod,
    pub best_config: AcceleratorConfig,
    pub best_report: CostReport,
    pub best_objective: f64,
    pub best_rank: u128,
    /// Normalization used for every objective value in this result.
    pub scales: MetricScales,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub final_params: Option<CategoricalParams>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub final_config: Option<AcceleratorConfig>,
    pub trajectory: Vec<TrajectoryPoint>,
    pub step_stats: Vec<StepStats>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    pub evaluations: usize,
    pub skipped_steps: u64,
    pub wall_clock: Duration,
}

impl SearchResult {
    /// Equality ignoring wall-clock time.
    pub fn same_outcome(&self, other: &SearchResult) -> bool {
        let mut a = self.clone();
        a.wall_clock = other.wall_clock;
        &a == other
    }
}

/// Index of the reference design: the middle choice of every dimension.
pub fn reference_index(space: &SearchSpaceDef) -> ChoiceIndex {
    let lens = space.lens();
    let mut idx = [0; DIMS];
    for d in 0..DIMS {
        idx[d] = lens[d] / 2;
    }
    idx
}

/// Metric scales taken from the reference design of `space`.
pub fn reference_scales(model: &DnnModel, space: &SearchSpaceDef, tech: &TechParams) -> Result<MetricScales> {
    let report = network_cost(model, &space.config_at(&reference_index(space)), tech)?;
    Ok(MetricScales::from_report(&report))
}

/// `obj` with scales filled in from the reference design when unset.
pub fn resolve_objective(
    obj: &Objective,
    model: &DnnModel,
    space: &SearchSpaceDef,
    tech: &TechParams,
) -> Result<Objective> {
    obj.validate()?;
    match obj.scales {
        Some(_) => Ok(*obj),
        None => Ok(obj.with_scales(reference_scales(model, space, tech)?)),
    }
}

struct Evaluated {
    rank: u128,
    report: CostReport,
    objective: f64,
    feasible: bool,
}

struct Context<'a> {
    model: &'a DnnModel,
    space: &'a SearchSpaceDef,
    tech: &'a TechParams,
    objective: Objective,
}

impl Context<'_> {
    fn evaluate(&self, idx: &ChoiceIndex) -> Result<Evaluated> {
        let config = self.space.config_at(idx);
        let report = network_cost(self.model, &config, self.tech)?;
        let feasible = self.space.area_cap.is_none_or(|cap| report.area_mm2 <= cap);
        Ok(Evaluated {
            rank: self.space.rank(idx),
            objective: objective_value(&report, &self.objective, self.space.area_cap),
            feasible,
            report,
        })
    }

    fn evaluate_all(&self, idxs: &[ChoiceIndex]) -> Result<Vec<Evaluated>> {
        idxs.par_iter().map(|i| self.evaluate(i)).collect()
    }
}

/// Running best over feasible designs. Ties keep the lower rank.
#[derive(Default)]
struct Tracker {
    best: Option<Evaluated>,
    trajectory: Vec<TrajectoryPoint>,
}

impl Tracker {
    fn record(&mut self, step: usize, sample: usize, e: Evaluated) {
        let better = e.feasible
            && e.objective.is_finite()
            && match &self.best {
                None => true,
                Some(b) => e.objective < b.objective || (e.objective == b.objective && e.rank < b.rank),
            };
        let point = TrajectoryPoint {
            step,
            sample,
            rank: e.rank,
            objective: e.objective,
            feasible: e.feasible,
            best_so_far: f64::NAN,
        };
        if better {
            self.best = Some(e);
        }
        let best_so_far = self.best.as_ref().map_or(f64::INFINITY, |b| b.objective);
        self.trajectory.push(TrajectoryPoint { best_so_far, ..point });
    }

    fn finish(
        self,
        method: SearchMethod,
        scales: MetricScales,
        seed: Option<u64>,
        start: Instant,
    ) -> Result<SearchResult> {
        let evaluations = self.trajectory.len();
        let best = self.best.ok_or_else(|| Error::NoFeasibleDesign {
            evaluated: evaluations,
            reason: "every evaluated design violates the area cap".into(),
        })?;
        Ok(SearchResult {
            method,
            best_config: best.report.config,
            best_objective: best.objective,
            best_rank: best.rank,
            best_report: best.report,
            scales,
            final_params: None,
            final_config: None,
            trajectory: self.trajectory,
            step_stats: Vec::new(),
            seed,
            evaluations,
            skipped_steps: 0,
            wall_clock: start.elapsed(),
        })
    }
}

fn to_index(choices: &[usize]) -> ChoiceIndex {
    let mut idx = [0; DIMS];
    idx.copy_from_slice(choices);
    idx
}

/// Differentiable search over `space` with Gumbel-Softmax relaxed logits.
///
/// Each step draws `budget.batch` designs, costs them in parallel, and takes
/// one Adam step on the surrogate loss using baseline-subtracted costs. The
/// returned best is the lowest-objective feasible design seen, including the
/// per-dimension argmax of the final logits.
pub fn search(
    model: &DnnModel,
    space: &SearchSpaceDef,
    tech: &TechParams,
    objective: &Objective,
    budget: &SearchBudget,
    seed: u64,
) -> Result<SearchResult> {
    let start = Instant::now();
    space.check()?;
    budget.check()?;
    let objective = resolve_objective(objective, model, space, tech)?;
    let ctx = Context {
        model,
        space,
        tech,
        objective,
    };

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut params = CategoricalParams::uniform(&space.lens());
    let mut adam = AdamState::new(params.num_params(), budget.adam);
    let mut tracker = Tracker::default();
    let mut stats = Vec::with_capacity(budget.steps);
    let mut baseline: Option<f64> = None;

    for t in 0..budget.steps {
        let tau = budget.tau.at(t, budget.steps);
        let samples: Vec<GumbelSample> = (0..budget.batch)
            .map(|_| gumbel_sample(&params, tau, &mut rng))
            .collect();
        let idxs: Vec<ChoiceIndex> = samples.iter().map(|s| to_index(&s.choices)).collect();
        let evals = ctx.evaluate_all(&idxs)?;
        let costs: Vec<f64> = evals.iter().map(|e| e.objective).collect();
        for (b, e) in evals.into_iter().enumerate() {
            tracker.record(t, b, e);
        }

        let finite: Vec<f64> = costs.iter().copied().filter(|c| c.is_finite()).collect();
        let batch_mean = if finite.is_empty() {
            f64::NAN
        } else {
            finite.iter().sum::<f64>() / finite.len() as f64
        };
        let reference = baseline.unwrap_or(batch_mean);
        let weighted: Vec<(GumbelSample, f64)> = samples
            .into_iter()
            .zip(&costs)
            .map(|(s, &c)| (s, c - reference))
            .collect();
        params = step(&params, &weighted, tau, &mut adam);
        if !finite.is_empty() {
            baseline = Some(match baseline {
                None => batch_mean,
                Some(b) => budget.baseline_decay * b + (1.0 - budget.baseline_decay) * batch_mean,
            });
        }

        stats.push(StepStats {
            step: t,
            tau,
            batch_mean,
            entropies: (0..params.dims()).map(|d| params.entropy(d)).collect(),
        });
    }

    let final_idx = to_index(&params.argmax());
    let final_eval = ctx.evaluate(&final_idx)?;
    let final_config = final_eval.report.config;
    tracker.record(budget.steps, 0, final_eval);

    let mut result = tracker.finish(
        SearchMethod::Gumbel,
        objective.scales.expect("resolved"),
        Some(seed),
        start,
    )?;
    result.final_params = Some(params);
    result.final_config = Some(final_config);
    result.step_stats = stats;
    result.skipped_steps = adam.skipped_steps;
    result.wall_clock = start.elapsed();
    Ok(result)
}

/// Evaluates every design in `space` (at most [`EXHAUSTIVE_LIMIT`]) and
/// returns the feasible minimum, lowest rank on ties.
pub fn exhaustive_search(
    model: &DnnModel,
    space: &SearchSpaceDef,
    tech: &TechParams,
    objective: &Objective,
) -> Result<SearchResult> {
    let start = Instant::now();
    space.check()?;
    let objective = resolve_objective(objective, model, space, tech)?;
    let ctx = Context {
        model,
        space,
        tech,
        objective,
    };
    let total = space.enumerate(EXHAUSTIVE_LIMIT)?.count_total();
    let evals: Vec<Evaluated> = (0..total as u64)
        .into_par_iter()
        .map(|r| ctx.evaluate(&space.unrank(u128::from(r))))
        .collect::<Result<_>>()?;
    let mut tracker = Tracker::default();
    for (i, e) in evals.into_iter().enumerate() {
        tracker.record(0, i, e);
    }
    tracker.finish(
        SearchMethod::Exhaustive,
        objective.scales.expect("resolved"),
        None,
        start,
    )
}

/// Draws `samples` designs uniformly and independently from `space`.
pub fn sample_uniform(space: &SearchSpaceDef, samples: usize, seed: u64) -> Vec<ChoiceIndex> {
    let lens = space.lens();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..samples)
        .map(|_| {
            let mut idx = [0; DIMS];
            for d in 0..DIMS {
                idx[d] = rng.random_range(0..lens[d]);
            }
            idx
        })
        .collect()
}

/// Uniform random sampling baseline with the same evaluation bookkeeping as
/// [`search`].
pub fn random_search(
    model: &DnnModel,
    space: &SearchSpaceDef,
    tech: &TechParams,
    objective: &Objective,
    samples: usize,
    seed: u64,
) -> Result<SearchResult> {
    let start = Instant::now();
    space.check()?;
    if samples == 0 {
        return Err(Error::NoFeasibleDesign {
            evaluated: 0,
            reason: "no samples requested".into(),
        });
    }
    let objective = resolve_objective(objective, model, space, tech)?;
    let ctx = Context {
        model,
        space,
        tech,
        objective,
    };
    let idxs = sample_uniform(space, samples, seed);
    let mut tracker = Tracker::default();
    for (i, e) in ctx.evaluate_all(&idxs)?.into_iter().enumerate() {
        tracker.record(0, i, e);
    }
    tracker.finish(
        SearchMethod::Random,
        objective.scales.expect("resolved"),
        Some(seed),
        start,
    )
}

/// Costs every design of `idxs` in parallel, preserving order.
pub fn cost_designs(
    model: &DnnModel,
    space: &SearchSpaceDef,
    tech: &TechParams,
    idxs: &[ChoiceIndex],
) -> Result<Vec<CostReport>> {
    idxs.par_iter()
        .map(|i| network_cost(model, &space.config_at(i), tech))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tau_schedules() {
        assert_eq!(TauSchedule::Constant(0.5).at(7, 10), 0.5);
        let lin = TauSchedule::Linear { start: 1.0, end: 0.1 };
        assert_eq!(lin.at(0, 10), 1.0);
        assert!((lin.at(9, 10) - 0.1).abs() < 1e-15);
        assert!(TauSchedule::Constant(0.0).check().is_err());
    }

    #[test]
    fn settings_parse() {
        let s = SearchSettings::from_toml_str(
            "seed = 3\n[objective]\nmode = \"ea\"\nw_energy = 1.0\n[budget]\nsteps = 5\ntau = { start = 1.0, end = 0.2 }\n[budget.adam]\nlr = 0.05\n",
            "inline",
        )
        .unwrap();
        assert_eq!(s.seed, Some(3));
        assert_eq!(s.budget.steps, 5);
        assert_eq!(s.budget.batch, 16);
        assert_eq!(s.budget.adam.lr, 0.05);
        assert_eq!(s.budget.adam.beta1, 0.5);
        assert_eq!(s.budget.tau, TauSchedule::Linear { start: 1.0, end: 0.2 });
        assert!(SearchSettings::from_toml_str("[objective]\nmode = \"ea\"\n", "x").is_err());
    }
}
