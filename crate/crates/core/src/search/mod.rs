//! Design-space search: Gumbel-Softmax with Adam, plus exhaustive and
//! uniform-random baselines.

mod engine;
mod gumbel;
mod objective;

pub use engine::{
    cost_designs, exhaustive_search, load_search_settings, random_search, reference_index, reference_scales,
    resolve_objective, sample_uniform, search, SearchBudget, SearchMethod, SearchResult, SearchSettings, StepStats,
    TauSchedule, TrajectoryPoint, EXHAUSTIVE_LIMIT,
};
pub use gumbel::{
    argmax, gumbel_sample, softmax, step, surrogate_gradient, surrogate_loss, AdamConfig, AdamState, CategoricalParams,
    GumbelSample,
};
pub use objective::{objective_value, CapHandling, MetricScales, Objective, ObjectiveMode};
