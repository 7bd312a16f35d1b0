//! Analytical cost model and design-space search for optical DNN accelerators.
//!
//! A [`DnnModel`] is costed on an [`AcceleratorConfig`] under a set of
//! [`TechParams`] by [`network_cost`]. [`search`] explores a
//! [`SearchSpaceDef`] for the design minimizing an [`Objective`].

pub mod arch;
pub mod cost;
pub mod device;
pub mod error;
pub mod model_ir;
pub mod report;
pub mod search;
pub mod units;

pub use arch::{
    load_config, load_space, validate, AcceleratorConfig, ChoiceIndex, Dimension, LoopOrder, MappingChoice,
    SearchSpaceDef, Violation,
};
pub use cost::{network_cost, CostReport, LayerCost, LayerWorkingSet};
pub use device::{load_tech, ocu_characteristics, OcuCharacteristics, OcuType, TechParams};
pub use error::{Error, Result};
pub use model_ir::{builtin_network, count_macs, load_network, DnnModel, LayerKind, LayerShape};
pub use search::{
    exhaustive_search, objective_value, random_search, search, Objective, SearchBudget, SearchResult, SearchSettings,
};
