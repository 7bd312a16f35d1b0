//! Shared fixtures for the criterion benchmarks.

use oadse::{AcceleratorConfig, LoopOrder, MappingChoice, OcuType};

pub fn sample_config() -> AcceleratorConfig {
    AcceleratorConfig {
        k_t: 4,
        k_ocu: 8,
        ocu_type: OcuType::R,
        n: 16,
        q_rf: 256,
        q_glb: 65536,
        b: 8,
        mapping: MappingChoice {
            loop_order: LoopOrder::OutputStationary,
            tile_d: 1,
            tile_c: 1,
        },
    }
}
