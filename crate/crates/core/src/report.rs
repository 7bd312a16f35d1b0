//! Stable JSON and CSV encodings of [`CostReport`].
//!
//! Column order is frozen; new fields are appended and bump
//! [`SCHEMA_VERSION`].

use serde::Serialize;
use serde_json::{json, Value};

use crate::cost::{CostReport, LayerCost};
use crate::error::{Error, Result};

pub const SCHEMA_VERSION: u32 = 1;

/// Summary CSV columns, one row per design.
pub const SUMMARY_COLUMNS: [&str; 22] = [
    "network",
    "k_t",
    "k_ocu",
    "ocu_type",
    "n",
    "q_rf",
    "q_glb",
    "b",
    "loop_order",
    "tile_d",
    "tile_c",
    "macs",
    "energy_pj",
    "dram_energy_pj",
    "latency_ns",
    "throughput_mac_per_s",
    "area_mm2",
    "compute_density_ops_per_mm2",
    "throughput_per_energy_ops_per_s_per_j",
    "fps",
    "fps_per_watt",
    "costed_layers",
];

pub const LAYER_COLUMNS: [&str; 9] = [
    "layer",
    "kind",
    "macs",
    "e_mem_pj",
    "e_comp_pj",
    "e_dram_pj",
    "l_mem_ns",
    "l_comp_ns",
    "l_layer_ns",
];

/// Formats a float so that parsing it back yields the identical value.
pub fn fmt_f64(v: f64) -> String {
    format!("{v:?}")
}

pub fn summary_row(report: &CostReport) -> Vec<String> {
    let c = &report.config;
    vec![
        report.network.clone(),
        c.k_t.to_string(),
        c.k_ocu.to_string(),
        c.ocu_type.to_string(),
        c.n.to_string(),
        c.q_rf.to_string(),
        c.q_glb.to_string(),
        c.b.to_string(),
        c.mapping.loop_order.to_string(),
        c.mapping.tile_d.to_string(),
        c.mapping.tile_c.to_string(),
        report.macs.to_string(),
        fmt_f64(report.energy_pj),
        fmt_f64(report.dram_energy_pj),
        fmt_f64(report.latency_ns),
        fmt_f64(report.throughput),
        fmt_f64(report.area_mm2),
        fmt_f64(report.compute_density),
        fmt_f64(report.throughput_per_energy),
        fmt_f64(report.fps),
        fmt_f64(report.fps_per_watt),
        report.layers.iter().filter(|l| l.kind.is_costed()).count().to_string(),
    ]
}

fn layer_row(layer: &LayerCost) -> Vec<String> {
    vec![
        layer.index.to_string(),
        layer.kind.to_string(),
        layer.macs.to_string(),
        fmt_f64(layer.e_mem_pj),
        fmt_f64(layer.e_comp_pj),
        fmt_f64(layer.e_dram_pj),
        fmt_f64(layer.l_mem_ns),
        fmt_f64(layer.l_comp_ns),
        fmt_f64(layer.l_layer_ns),
    ]
}

fn write_csv<I, R>(header: &[&str], rows: I) -> Result<String>
where
    I: IntoIterator<Item = R>,
    R: IntoIterator<Item = String>,
{
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header).map_err(|e| Error::Serialize(e.to_string()))?;
    for row in rows {
        w.write_record(row).map_err(|e| Error::Serialize(e.to_string()))?;
    }
    let bytes = w.into_inner().map_err(|e| Error::Serialize(e.to_string()))?;
    String::from_utf8(bytes).map_err(|e| Error::Serialize(e.to_string()))
}

/// Summary CSV for any number of designs (header plus one row each).
pub fn summary_csv<'a>(reports: impl IntoIterator<Item = &'a CostReport>) -> Result<String> {
    write_csv(&SUMMARY_COLUMNS, reports.into_iter().map(summary_row))
}

/// Per-layer CSV: one row per network row, pooling rows included with zero cost.
pub fn layers_csv(report: &CostReport) -> Result<String> {
    write_csv(&LAYER_COLUMNS, report.layers.iter().map(layer_row))
}

#[derive(Serialize)]
struct Totals {
    macs: u64,
    energy_pj: f64,
    dram_energy_pj: f64,
    latency_ns: f64,
    throughput_mac_per_s: f64,
    area_mm2: f64,
    compute_density_ops_per_mm2: f64,
    throughput_per_energy_ops_per_s_per_j: f64,
    fps: f64,
    fps_per_watt: f64,
}

/// JSON object for one report. `per_layer` adds the layer breakdown.
pub fn report_json(report: &CostReport, per_layer: bool) -> Value {
    let totals = Totals {
        macs: report.macs,
        energy_pj: report.energy_pj,
        dram_energy_pj: report.dram_energy_pj,
        latency_ns: report.latency_ns,
        throughput_mac_per_s: report.throughput,
        area_mm2: report.area_mm2,
        compute_density_ops_per_mm2: report.compute_density,
        throughput_per_energy_ops_per_s_per_j: report.throughput_per_energy,
        fps: report.fps,
        fps_per_watt: report.fps_per_watt,
    };
    let mut v = json!({
        "schema_version": SCHEMA_VERSION,
        "network": report.network,
        "config": report.config,
        "totals": totals,
    });
    if per_layer {
        v["layers"] = serde_json::to_value(&report.layers).expect("layer costs serialize");
    }
    v
}
