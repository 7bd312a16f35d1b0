pub mod compare;
pub mod predict;
pub mod search;
pub mod sweep;
