use anyhow::Result;
use oadse::arch::Dimension;
use oadse::report::{fmt_f64, report_json, SCHEMA_VERSION};
use oadse::search::{load_search_settings, SearchResult, SearchSettings};
use oadse::{exhaustive_search, load_space, random_search, search, SearchSpaceDef};
use rand::Rng;
use serde_json::json;

use crate::support::{self, RunManifest};
use crate::{Baseline, SearchArgs};

pub const BEST_DESIGN: &str = "best_design.toml";
pub const TRAJECTORY: &str = "trajectory.csv";
pub const RESULT: &str = "result.json";
pub const MANIFEST: &str = "manifest.json";

pub fn run(args: &SearchArgs) -> Result<()> {
    let (model, network_src) = support::network(&args.common.network)?;
    let (tech, tech_src) = support::tech(args.common.tech.as_deref())?;
    let space = load_space(&args.space)?;
    let settings = load_search_settings(&args.search_config)?;
    let seed = args.seed.or(settings.seed).unwrap_or_else(|| rand::rng().random());

    let result = match args.baseline {
        None => search(&model, &space, &tech, &settings.objective, &settings.budget, seed)?,
        Some(Baseline::Random) => {
            let samples = args
                .samples
                .unwrap_or(settings.budget.steps * settings.budget.batch + 1);
            random_search(&model, &space, &tech, &settings.objective, samples, seed)?
        }
        Some(Baseline::Exhaustive) => exhaustive_search(&model, &space, &tech, &settings.objective)?,
    };

    let mut manifest = RunManifest::new("search")
        .input("network", network_src)
        .input("space", support::display(&args.space))
        .input("tech", tech_src)
        .input("search_config", support::display(&args.search_config));
    manifest.seed = result.seed;

    let dir = support::out_dir(&args.out)?;
    support::write(&dir.join(BEST_DESIGN), &best_design_toml(&result))?;
    support::write(&dir.join(TRAJECTORY), &trajectory_csv(&result, &space)?)?;
    support::write(
        &dir.join(RESULT),
        &support::json_text(&result_json(&result, &settings, &manifest)),
    )?;
    support::write(&dir.join(MANIFEST), &support::json_text(&manifest.to_json()))?;

    let summary = json!({
        "method": result.method,
        "best_objective": result.best_objective,
        "best_config": result.best_config,
        "evaluations": result.evaluations,
        "wall_clock_s": result.wall_clock.as_secs_f64(),
        "out": support::display(&dir),
    });
    print!("{}", support::json_text(&summary));
    Ok(())
}

fn best_design_toml(r: &SearchResult) -> String {
    format!(
        "# {:?} search, objective {}\n{}",
        r.method,
        fmt_f64(r.best_objective),
        r.best_config.to_toml_string()
    )
}

/// One row per evaluated design. Entropy columns hold the logit entropy
/// after the row's step and are empty for rows outside the gradient loop.
fn trajectory_csv(r: &SearchResult, space: &SearchSpaceDef) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let mut header = vec!["step".to_string(), "sample".into(), "rank".into()];
    header.extend(Dimension::ALL.iter().map(|d| d.name().to_string()));
    header.extend(["objective".into(), "feasible".into(), "best_so_far".into()]);
    header.extend(Dimension::ALL.iter().map(|d| format!("entropy_{}", d.name())));
    w.write_record(&header)?;
    for p in &r.trajectory {
        let idx = space.unrank(p.rank);
        let mut row = vec![p.step.to_string(), p.sample.to_string(), p.rank.to_string()];
        row.extend(Dimension::ALL.iter().map(|&d| space.choice_label(d, idx[d as usize])));
        row.extend([fmt_f64(p.objective), p.feasible.to_string(), fmt_f64(p.best_so_far)]);
        match r.step_stats.get(p.step) {
            Some(s) => row.extend(s.entropies.iter().map(|&e| fmt_f64(e))),
            None => row.extend(std::iter::repeat_n(String::new(), Dimension::ALL.len())),
        }
        w.write_record(&row)?;
    }
    Ok(String::from_utf8(w.into_inner()?)?)
}

fn result_json(r: &SearchResult, settings: &SearchSettings, manifest: &RunManifest) -> serde_json::Value {
    json!({
        "schema_version": SCHEMA_VERSION,
        "manifest": manifest.to_json(),
        "method": r.method,
        "objective": settings.objective.with_scales(r.scales),
        "budget": settings.budget,
        "seed": r.seed,
        "best_objective": r.best_objective,
        "best_rank": r.best_rank.to_string(),
        "best_config": r.best_config,
        "best_report": report_json(&r.best_report, true),
        "final_config": r.final_config,
        "final_logits": r.final_params.as_ref().map(|p| &p.logits),
        "evaluations": r.evaluations,
        "skipped_steps": r.skipped_steps,
        "wall_clock_s": r.wall_clock.as_secs_f64(),
    })
}
