use anyhow::Result;
use oadse::report::{layers_csv, report_json, summary_csv, SCHEMA_VERSION};
use oadse::search::{load_search_settings, resolve_objective};
use oadse::{load_config, load_space, network_cost, objective_value};
use serde_json::json;

use crate::support::{self, RunManifest};
use crate::{Format, PredictArgs};

pub fn run(args: &PredictArgs) -> Result<()> {
    let (model, network_src) = support::network(&args.common.network)?;
    let (tech, tech_src) = support::tech(args.common.tech.as_deref())?;
    let config = load_config(&args.config)?;
    let report = network_cost(&model, &config, &tech)?;

    let mut manifest = RunManifest::new("predict")
        .input("network", network_src)
        .input("config", support::display(&args.config))
        .input("tech", tech_src);

    let objective = match (&args.search_config, &args.space) {
        (Some(sc), Some(sp)) => {
            manifest = manifest
                .input("search_config", support::display(sc))
                .input("space", support::display(sp));
            let settings = load_search_settings(sc)?;
            let space = load_space(sp)?;
            let obj = resolve_objective(&settings.objective, &model, &space, &tech)?;
            Some(json!({
                "value": objective_value(&report, &obj, space.area_cap),
                "objective": obj,
                "area_cap": space.area_cap,
            }))
        }
        _ => None,
    };

    match args.format {
        Format::Json => {
            let mut v = json!({
                "schema_version": SCHEMA_VERSION,
                "manifest": manifest.to_json(),
                "report": report_json(&report, args.per_layer),
            });
            if let Some(o) = objective {
                v["objective"] = o;
            }
            support::emit(args.out.as_deref(), &support::json_text(&v))
        }
        Format::Csv => {
            let text = if args.per_layer {
                layers_csv(&report)?
            } else {
                summary_csv([&report])?
            };
            if let Some(out) = &args.out {
                let mut m = json!({ "manifest": manifest.to_json() });
                if let Some(o) = objective {
                    m["objective"] = o;
                }
                support::write(&support::sidecar(out), &support::json_text(&m))?;
            }
            support::emit(args.out.as_deref(), &text)
        }
    }
}
