//! Analytical energy, latency, throughput and area predictor.
//!
//! The equations are written for micro-resonator (R) OCUs and carried over
//! to the other families through their [`OcuCharacteristics`]:
//!
//! * `N_b` (devices per weight) is `ceil(B / n_b)` for R and 1 for E and Z,
//! * the per-symbol MAC energy is scaled by β for E and Z,
//! * compute latency is multiplied by the family's matvec latency in symbols
//!   (`N·B` for E, 1 otherwise),
//! * E-OCUs hold no stationary weights, so every weight is streamed from the
//!   GLB through the RF for every output pixel and their partial sums take
//!   the GLB path instead of the RF path.
//!
//! All ceilings are taken on integers. Pooling rows cost nothing.

use serde::{Deserialize, Serialize};

use crate::arch::{AcceleratorConfig, LoopOrder};
use crate::device::{ocu_characteristics, OcuCharacteristics, OcuType, TechParams};
use crate::error::Result;
use crate::model_ir::{DnnModel, LayerKind, LayerShape};
use crate::units;

/// Entry counts backing the hit/miss latency model.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct LayerWorkingSet {
    /// Entries needed at RF level to produce one 3D output pixel.
    pub q_rf_req: u64,
    /// Entries needed at GLB level per output pixel.
    pub q_glb_req: u64,
    /// Entries transferred from DRAM for the whole layer.
    pub q_dram: u64,
}

/// Integer tiling factors shared by the energy and latency equations.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
struct Folding {
    pixels: u64,
    /// Z²·C
    field: u64,
    /// D·N_b
    weight_cols: u64,
    /// ceil(Z²C / N)
    row_folds: u64,
    /// ceil(D·N_b / N)
    col_folds: u64,
    /// ceil(row_folds·col_folds / (K_t·K_OCU))
    passes: u64,
}

impl Folding {
    fn new(layer: &LayerShape, config: &AcceleratorConfig, nb: u64) -> Self {
        let field = layer.receptive_field();
        let weight_cols = layer.d * nb;
        let row_folds = field.div_ceil(config.n);
        let col_folds = weight_cols.div_ceil(config.n);
        Folding {
            pixels: layer.output_pixels(),
            field,
            weight_cols,
            row_folds,
            col_folds,
            passes: (row_folds * col_folds).div_ceil(config.total_ocus()),
        }
    }
}

fn characteristics(config: &AcceleratorConfig, tech: &TechParams) -> Result<OcuCharacteristics> {
    ocu_characteristics(config.ocu_type, config.n, config.b, tech)
}

pub fn working_set(layer: &LayerShape, config: &AcceleratorConfig, tech: &TechParams) -> Result<LayerWorkingSet> {
    let chars = characteristics(config, tech)?;
    Ok(working_set_with(layer, config, &chars))
}

fn working_set_with(layer: &LayerShape, config: &AcceleratorConfig, chars: &OcuCharacteristics) -> LayerWorkingSet {
    let field = layer.receptive_field();
    let tile_d = config.mapping.tile_d;
    let tile_c = config.mapping.tile_c;
    let q_glb_req = match config.mapping.loop_order {
        LoopOrder::OutputStationary => tile_c * field + tile_d * layer.d,
        LoopOrder::InputStationary => field + tile_c * tile_d * layer.d,
    };
    LayerWorkingSet {
        q_rf_req: field + layer.d * chars.mrs_per_weight,
        q_glb_req,
        q_dram: layer.h * layer.w * layer.c + field * layer.d,
    }
}

/// Data-access energy split by traffic class (pJ).
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize)]
pub struct AccessEnergy {
    pub input: f64,
    /// Weight streaming; non-zero only for E-OCUs.
    pub weight: f64,
    pub psum_rf: f64,
    pub psum_glb: f64,
    pub output: f64,
}

impl AccessEnergy {
    pub fn total(&self) -> f64 {
        self.input + self.weight + self.psum_rf + self.psum_glb + self.output
    }
}

/// Data-computation energy split by stage (pJ).
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize)]
pub struct ComputeEnergy {
    /// D/A conversion and optical transmit.
    pub conversion: f64,
    pub mac: f64,
    /// Receive, A/D conversion and shift-and-add.
    pub readout: f64,
}

impl ComputeEnergy {
    pub fn total(&self) -> f64 {
        self.conversion + self.mac + self.readout
    }
}

pub fn access_energy_terms(layer: &LayerShape, config: &AcceleratorConfig, tech: &TechParams) -> Result<AccessEnergy> {
    let chars = characteristics(config, tech)?;
    Ok(access_energy_with(layer, config, tech, &chars))
}

fn access_energy_with(
    layer: &LayerShape,
    config: &AcceleratorConfig,
    tech: &TechParams,
    chars: &OcuCharacteristics,
) -> AccessEnergy {
    if !layer.kind.is_costed() {
        return AccessEnergy::default();
    }
    let fold = Folding::new(layer, config, chars.mrs_per_weight);
    let ef = fold.pixels as f64;
    let psums = ef * fold.weight_cols as f64;
    let glb_rw = tech.e_glb_read + tech.e_glb_write;
    let rf_rw = tech.e_rf_read + tech.e_rf_write;
    let input_path = tech.e_glb_read + tech.e_rf_read;

    let mut terms = AccessEnergy {
        input: input_path * ef * (fold.field * fold.col_folds) as f64,
        weight: 0.0,
        psum_rf: rf_rw * psums * fold.row_folds as f64,
        psum_glb: glb_rw * psums * (fold.passes - 1) as f64,
        output: tech.e_glb_write * ef * layer.d as f64,
    };
    if config.ocu_type == OcuType::E {
        terms.weight = input_path * psums * fold.field as f64;
        terms.psum_glb += glb_rw * psums * fold.row_folds as f64;
        terms.psum_rf = 0.0;
    }
    terms
}

/// Data-access energy of one layer (pJ).
pub fn layer_access_energy(layer: &LayerShape, config: &AcceleratorConfig, tech: &TechParams) -> Result<f64> {
    access_energy_terms(layer, config, tech).map(|t| t.total())
}

pub fn compute_energy_terms(
    layer: &LayerShape,
    config: &AcceleratorConfig,
    tech: &TechParams,
) -> Result<ComputeEnergy> {
    let chars = characteristics(config, tech)?;
    Ok(compute_energy_with(layer, config, tech, &chars))
}

fn compute_energy_with(
    layer: &LayerShape,
    config: &AcceleratorConfig,
    tech: &TechParams,
    chars: &OcuCharacteristics,
) -> ComputeEnergy {
    if !layer.kind.is_costed() {
        return ComputeEnergy::default();
    }
    let fold = Folding::new(layer, config, chars.mrs_per_weight);
    let ef = fold.pixels as f64;
    let psums = ef * fold.weight_cols as f64;
    ComputeEnergy {
        conversion: (tech.e_da + tech.e_tx) * ef * (fold.field * fold.col_folds) as f64,
        mac: (tech.e_r + tech.e_tune) * chars.energy_scale * psums * fold.field as f64,
        readout: (tech.e_rx + tech.e_ad + tech.e_sa) * psums * fold.row_folds as f64,
    }
}

/// Data-computation energy of one layer (pJ).
pub fn layer_compute_energy(layer: &LayerShape, config: &AcceleratorConfig, tech: &TechParams) -> Result<f64> {
    compute_energy_terms(layer, config, tech).map(|t| t.total())
}

/// Data-access latency of one layer (ns) from the three-level hit/miss model.
///
/// Deficits `q_req - capacity` are clamped at zero: capacity beyond demand
/// never adds miss latency.
pub fn layer_access_latency(
    layer: &LayerShape,
    config: &AcceleratorConfig,
    tech: &TechParams,
    ws: &LayerWorkingSet,
) -> f64 {
    if !layer.kind.is_costed() {
        return 0.0;
    }
    let rf_cap = i128::from(config.q_rf) * i128::from(config.total_ocus());
    let glb_cap = i128::from(config.q_glb) * i128::from(config.k_t);
    let q_glb_tile = i128::from(config.q_glb);
    let rf_req = i128::from(ws.q_rf_req);
    let glb_req = i128::from(ws.q_glb_req);
    let dram = i128::from(ws.q_dram);
    let deficit = |limit: i128, shortfall: i128| limit.min(shortfall).max(0) as f64;
    let ratio = |num: i128, den: i128| num as f64 / den as f64;

    let rf = tech.l_rf * ratio(rf_cap, rf_req).min(1.0);
    let glb = tech.l_glb * (deficit(q_glb_tile, rf_req - rf_cap) / rf_req as f64 + ratio(glb_cap, glb_req).min(1.0));
    let dram = tech.l_dram
        * (deficit(dram, rf_req - rf_cap - glb_cap) / rf_req as f64
            + deficit(dram, glb_req - glb_cap) / glb_req as f64);
    layer.output_pixels() as f64 * (rf + glb + dram)
}

pub fn layer_compute_latency(layer: &LayerShape, config: &AcceleratorConfig, tech: &TechParams) -> Result<f64> {
    let chars = characteristics(config, tech)?;
    Ok(compute_latency_with(layer, config, tech, &chars))
}

fn compute_latency_with(
    layer: &LayerShape,
    config: &AcceleratorConfig,
    tech: &TechParams,
    chars: &OcuCharacteristics,
) -> f64 {
    if !layer.kind.is_costed() {
        return 0.0;
    }
    let fold = Folding::new(layer, config, chars.mrs_per_weight);
    let symbols = fold.pixels * fold.passes * chars.matvec_latency_symbols;
    symbols as f64 / tech.r_r
}

/// Chip area (mm²): RF and GLB storage plus OCU footprint.
pub fn area(config: &AcceleratorConfig, tech: &TechParams) -> Result<f64> {
    let chars = characteristics(config, tech)?;
    Ok(area_with(config, tech, &chars))
}

fn area_with(config: &AcceleratorConfig, tech: &TechParams, chars: &OcuCharacteristics) -> f64 {
    let ocus = config.total_ocus() as f64;
    let rf = tech.a_rf * config.q_rf as f64 * ocus;
    let glb = tech.a_glb * config.q_glb as f64 * config.k_t as f64;
    let ocu = chars.area_mr_equiv * tech.a_r * ocus;
    rf + glb + ocu
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LayerCost {
    pub index: usize,
    pub kind: LayerKind,
    pub macs: u64,
    pub e_mem_pj: f64,
    pub e_comp_pj: f64,
    /// DRAM read energy for first-touch transfers; not part of `e_mem_pj`.
    pub e_dram_pj: f64,
    pub l_mem_ns: f64,
    pub l_comp_ns: f64,
    pub l_layer_ns: f64,
}

/// Whole-network prediction for one design.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CostReport {
    pub network: String,
    pub config: AcceleratorConfig,
    pub layers: Vec<LayerCost>,
    pub macs: u64,
    /// Σ (E_mem + E_comp) over CONV/FC layers.
    pub energy_pj: f64,
    /// Optional DRAM term, reported separately and excluded from `energy_pj`.
    pub dram_energy_pj: f64,
    /// Latency of the bottleneck layer.
    pub latency_ns: f64,
    /// MAC/s.
    pub throughput: f64,
    pub area_mm2: f64,
    /// Throughput per area, OPS/mm² (one MAC counted as one op).
    pub compute_density: f64,
    /// Throughput divided by inference energy, OPS/(s·J).
    pub throughput_per_energy: f64,
    pub fps: f64,
    pub fps_per_watt: f64,
}

impl CostReport {
    pub fn energy_j(&self) -> f64 {
        units::pj_to_j(self.energy_pj)
    }

    /// Energy including the DRAM term (pJ).
    pub fn energy_with_dram_pj(&self) -> f64 {
        self.energy_pj + self.dram_energy_pj
    }
}

/// Predicts energy, latency, throughput and area of `model` on `config`.
pub fn network_cost(model: &DnnModel, config: &AcceleratorConfig, tech: &TechParams) -> Result<CostReport> {
    config.check()?;
    let chars = characteristics(config, tech)?;
    let layers: Vec<LayerCost> = model
        .layers
        .iter()
        .enumerate()
        .map(|(index, layer)| {
            let ws = working_set_with(layer, config, &chars);
            let e_mem = access_energy_with(layer, config, tech, &chars).total();
            let e_comp = compute_energy_with(layer, config, tech, &chars).total();
            let l_mem = layer_access_latency(layer, config, tech, &ws);
            let l_comp = compute_latency_with(layer, config, tech, &chars);
            let e_dram = if layer.kind.is_costed() {
                tech.e_dram_read * ws.q_dram as f64
            } else {
                0.0
            };
            LayerCost {
                index,
                kind: layer.kind,
                macs: layer.macs(),
                e_mem_pj: e_mem,
                e_comp_pj: e_comp,
                e_dram_pj: e_dram,
                l_mem_ns: l_mem,
                l_comp_ns: l_comp,
                l_layer_ns: l_mem.max(l_comp),
            }
        })
        .collect();

    let macs: u64 = layers.iter().map(|l| l.macs).sum();
    let energy_pj: f64 = layers.iter().map(|l| l.e_mem_pj + l.e_comp_pj).sum();
    let dram_energy_pj: f64 = layers.iter().map(|l| l.e_dram_pj).sum();
    let latency_ns = layers.iter().map(|l| l.l_layer_ns).fold(0.0, f64::max);
    let area_mm2 = area_with(config, tech, &chars);
    let throughput = units::rate_per_s(macs as f64, latency_ns);
    let energy_j = units::pj_to_j(energy_pj);

    Ok(CostReport {
        network: model.name.clone(),
        config: *config,
        layers,
        macs,
        energy_pj,
        dram_energy_pj,
        latency_ns,
        throughput,
        area_mm2,
        compute_density: throughput / area_mm2,
        throughput_per_energy: throughput / energy_j,
        fps: units::rate_per_s(1.0, latency_ns),
        fps_per_watt: 1.0 / energy_j,
    })
}
