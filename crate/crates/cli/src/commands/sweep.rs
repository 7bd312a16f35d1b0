use anyhow::Result;
use oadse::report::{fmt_f64, SCHEMA_VERSION};
use oadse::search::{cost_designs, sample_uniform};
use oadse::{load_space, validate};
use rand::Rng;
use serde_json::json;

use crate::support::{self, RunManifest};
use crate::SweepArgs;

pub const SCATTER: &str = "sweep.csv";
pub const SUMMARY: &str = "summary.json";

pub const COLUMNS: [&str; 6] = [
    "sample",
    "rank",
    "compute_density_ops_per_mm2",
    "throughput_per_energy_ops_per_s_per_j",
    "area_mm2",
    "feasible",
];

struct Point {
    compute_density: f64,
    throughput_per_energy: f64,
    feasible: bool,
}

/// Fraction of feasible points strictly above both thresholds.
fn exceedance(points: &[Point], cd: f64, tpe: f64) -> (usize, f64) {
    let feasible = points.iter().filter(|p| p.feasible).count();
    let above = points
        .iter()
        .filter(|p| p.feasible && p.compute_density > cd && p.throughput_per_energy > tpe)
        .count();
    let fraction = if feasible == 0 {
        0.0
    } else {
        above as f64 / feasible as f64
    };
    (above, fraction)
}

pub fn run(args: &SweepArgs) -> Result<()> {
    let (model, network_src) = support::network(&args.common.network)?;
    let (tech, tech_src) = support::tech(args.common.tech.as_deref())?;
    let space = load_space(&args.space)?;
    let seed = args.seed.unwrap_or_else(|| rand::rng().random());

    let idxs = sample_uniform(&space, args.samples, seed);
    let reports = cost_designs(&model, &space, &tech, &idxs)?;

    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(COLUMNS)?;
    let mut points = Vec::with_capacity(reports.len());
    for (i, (idx, r)) in idxs.iter().zip(&reports).enumerate() {
        let feasible = validate(&r.config, &space, &tech).is_ok();
        w.write_record([
            i.to_string(),
            space.rank(idx).to_string(),
            fmt_f64(r.compute_density),
            fmt_f64(r.throughput_per_energy),
            fmt_f64(r.area_mm2),
            feasible.to_string(),
        ])?;
        points.push(Point {
            compute_density: r.compute_density,
            throughput_per_energy: r.throughput_per_energy,
            feasible,
        });
    }
    let scatter = String::from_utf8(w.into_inner()?)?;

    let mut manifest = RunManifest::new("sweep")
        .input("network", network_src)
        .input("space", support::display(&args.space))
        .input("tech", tech_src);
    manifest.seed = Some(seed);

    let feasible = points.iter().filter(|p| p.feasible).count();
    let thresholds: Vec<_> = args
        .thresholds
        .iter()
        .map(|&(cd, tpe)| {
            let (above, fraction) = exceedance(&points, cd, tpe);
            json!({
                "compute_density": cd,
                "throughput_per_energy": tpe,
                "exceeding": above,
                "fraction": fraction,
            })
        })
        .collect();
    let summary = json!({
        "schema_version": SCHEMA_VERSION,
        "manifest": manifest.to_json(),
        "samples": args.samples,
        "feasible": feasible,
        "thresholds": thresholds,
    });

    let dir = support::out_dir(&args.out)?;
    support::write(&dir.join(SCATTER), &scatter)?;
    support::write(&dir.join(SUMMARY), &support::json_text(&summary))?;
    print!("{}", support::json_text(&summary));
    Ok(())
}
