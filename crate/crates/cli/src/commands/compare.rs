use anyhow::{Context, Result};
use oadse::report::{report_json, summary_csv, SCHEMA_VERSION};
use oadse::{load_config, network_cost};
use serde_json::{json, Value};

use crate::support::{self, RunManifest};
use crate::{CompareArgs, Format};

pub fn run(args: &CompareArgs) -> Result<()> {
    let (model, network_src) = support::network(&args.common.network)?;
    let (tech, tech_src) = support::tech(args.common.tech.as_deref())?;
    let mut manifest = RunManifest::new("compare")
        .input("network", network_src)
        .input("tech", tech_src);
    let mut reports = Vec::with_capacity(args.configs.len());
    for path in &args.configs {
        let config = load_config(path)?;
        let report = network_cost(&model, &config, &tech).with_context(|| format!("costing {}", path.display()))?;
        reports.push(report);
        manifest = manifest.input("config", support::display(path));
    }

    match args.format {
        Format::Csv => {
            if let Some(out) = &args.out {
                let m = json!({ "manifest": manifest.to_json() });
                support::write(&support::sidecar(out), &support::json_text(&m))?;
            }
            support::emit(args.out.as_deref(), &summary_csv(&reports)?)
        }
        Format::Json => {
            let rows: Vec<Value> = reports.iter().map(|r| report_json(r, false)).collect();
            let v = json!({
                "schema_version": SCHEMA_VERSION,
                "manifest": manifest.to_json(),
                "designs": rows,
            });
            support::emit(args.out.as_deref(), &support::json_text(&v))
        }
    }
}
