use serde::{Deserialize, Serialize};

use crate::cost::CostReport;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ObjectiveMode {
    /// Weighted energy plus area.
    Ea,
    /// Throughput-per-energy (rewarded) plus area.
    Tea,
}

/// What happens to a design whose area exceeds the space's cap.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CapHandling {
    /// The objective becomes `+inf`.
    HardReject,
    /// Adds `lambda * ((area - cap) / cap)^2`.
    QuadraticPenalty(f64),
}

/// Reference magnitudes that make the metrics dimensionless.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MetricScales {
    pub energy_pj: f64,
    pub area_mm2: f64,
    pub throughput_per_energy: f64,
}

impl MetricScales {
    pub const UNIT: MetricScales = MetricScales {
        energy_pj: 1.0,
        area_mm2: 1.0,
        throughput_per_energy: 1.0,
    };

    pub fn from_report(report: &CostReport) -> Self {
        MetricScales {
            energy_pj: report.energy_pj,
            area_mm2: report.area_mm2,
            throughput_per_energy: report.throughput_per_energy,
        }
    }

    fn check(&self) -> Result<()> {
        for (name, v) in [
            ("energy_pj", self.energy_pj),
            ("area_mm2", self.area_mm2),
            ("throughput_per_energy", self.throughput_per_energy),
        ] {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::InvalidSearch(format!(
                    "metric scale `{name}` must be positive (got {v})"
                )));
            }
        }
        Ok(())
    }
}

/// Scalarized hardware cost; lower is better.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Objective {
    pub mode: ObjectiveMode,
    #[serde(default)]
    pub w_energy: f64,
    #[serde(default)]
    pub w_area: f64,
    #[serde(default)]
    pub w_tpe: f64,
    #[serde(default = "hard_reject")]
    pub cap_handling: CapHandling,
    /// Fixed normalization. When absent, searches derive it from a reference
    /// design of the space (see [`crate::search::reference_scales`]).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub scales: Option<MetricScales>,
}

fn hard_reject() -> CapHandling {
    CapHandling::HardReject
}

impl Objective {
    pub fn ea(w_energy: f64, w_area: f64) -> Self {
        Objective {
            mode: ObjectiveMode::Ea,
            w_energy,
            w_area,
            w_tpe: 0.0,
            cap_handling: CapHandling::HardReject,
            scales: None,
        }
    }

    pub fn tea(w_tpe: f64, w_area: f64) -> Self {
        Objective {
            mode: ObjectiveMode::Tea,
            w_energy: 0.0,
            w_area,
            w_tpe,
            cap_handling: CapHandling::HardReject,
            scales: None,
        }
    }

    pub fn with_scales(self, scales: MetricScales) -> Self {
        Objective {
            scales: Some(scales),
            ..self
        }
    }

    pub fn validate(&self) -> Result<()> {
        for (name, w) in [
            ("w_energy", self.w_energy),
            ("w_area", self.w_area),
            ("w_tpe", self.w_tpe),
        ] {
            if !(w.is_finite() && w >= 0.0) {
                return Err(Error::InvalidSearch(format!("weight `{name}` must be >= 0 (got {w})")));
            }
        }
        let active = match self.mode {
            ObjectiveMode::Ea => self.w_energy + self.w_area,
            ObjectiveMode::Tea => self.w_tpe + self.w_area,
        };
        if active <= 0.0 {
            return Err(Error::InvalidSearch(format!(
                "all weights used by the {:?} objective are zero",
                self.mode
            )));
        }
        if let CapHandling::QuadraticPenalty(lambda) = self.cap_handling {
            if !(lambda.is_finite() && lambda > 0.0) {
                return Err(Error::InvalidSearch(format!(
                    "penalty lambda must be > 0 (got {lambda})"
                )));
            }
        }
        if let Some(scales) = &self.scales {
            scales.check()?;
        }
        Ok(())
    }
}

/// Scalar objective of `report` under `obj`, lower is better.
///
/// Metrics are divided by `obj.scales` (unit scales when unset). A design
/// whose area exceeds `area_cap` gets `+inf` under hard rejection or a
/// quadratic penalty otherwise.
pub fn objective_value(report: &CostReport, obj: &Objective, area_cap: Option<f64>) -> f64 {
    let scales = obj.scales.unwrap_or(MetricScales::UNIT);
    let area_term = obj.w_area * report.area_mm2 / scales.area_mm2;
    let base = match obj.mode {
        ObjectiveMode::Ea => obj.w_energy * report.energy_pj / scales.energy_pj + area_term,
        ObjectiveMode::Tea => -obj.w_tpe * report.throughput_per_energy / scales.throughput_per_energy + area_term,
    };
    match area_cap {
        Some(cap) if report.area_mm2 > cap => match obj.cap_handling {
            CapHandling::HardReject => f64::INFINITY,
            CapHandling::QuadraticPenalty(lambda) => {
                let excess = (report.area_mm2 - cap) / cap;
                base + lambda * excess * excess
            }
        },
        _ => base,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arch::{AcceleratorConfig, MappingChoice};
    use crate::cost::network_cost;
    use crate::device::{OcuType, TechParams};
    use crate::model_ir::builtin_network;

    fn report() -> CostReport {
        let c = AcceleratorConfig {
            k_t: 1,
            k_ocu: 2,
            ocu_type: OcuType::R,
            n: 8,
            q_rf: 64,
            q_glb: 1024,
            b: 8,
            mapping: MappingChoice::default(),
        };
        network_cost(&builtin_network("lenet5").unwrap(), &c, &TechParams::default()).unwrap()
    }

    #[test]
    fn lower_energy_is_better() {
        let a = report();
        let b = CostReport {
            energy_pj: a.energy_pj * 0.5,
            ..a.clone()
        };
        let obj = Objective::ea(1.0, 0.3);
        assert!(objective_value(&b, &obj, None) < objective_value(&a, &obj, None));
    }

    #[test]
    fn energy_only_weights_order_by_energy() {
        let a = report();
        let obj = Objective::ea(1.0, 0.0);
        let mut reports: Vec<_> = [3.0, 0.5, 2.0, 1.0]
            .iter()
            .map(|f| CostReport {
                energy_pj: a.energy_pj * f,
                area_mm2: a.area_mm2 / f,
                ..a.clone()
            })
            .collect();
        reports.sort_by(|x, y| objective_value(x, &obj, None).total_cmp(&objective_value(y, &obj, None)));
        let energies: Vec<_> = reports.iter().map(|r| r.energy_pj).collect();
        let mut sorted = energies.clone();
        sorted.sort_by(f64::total_cmp);
        assert_eq!(energies, sorted);
    }

    #[test]
    fn hard_reject_over_cap() {
        let r = report();
        let obj = Objective::tea(1.0, 0.1);
        assert_eq!(objective_value(&r, &obj, Some(r.area_mm2 * 0.5)), f64::INFINITY);
        assert!(objective_value(&r, &obj, Some(r.area_mm2)).is_finite());
    }

    #[test]
    fn quadratic_penalty_over_cap() {
        let r = report();
        let obj = Objective {
            cap_handling: CapHandling::QuadraticPenalty(4.0),
            ..Objective::ea(1.0, 0.0)
        };
        let base = objective_value(&r, &obj, None);
        let pen = objective_value(&r, &obj, Some(r.area_mm2 / 2.0));
        assert!((pen - base - 4.0).abs() < 1e-12);
    }

    #[test]
    fn tea_rewards_throughput_per_energy() {
        let a = report();
        let b = CostReport {
            throughput_per_energy: a.throughput_per_energy * 2.0,
            ..a.clone()
        };
        let obj = Objective::tea(1.0, 0.5);
        assert!(objective_value(&b, &obj, None) < objective_value(&a, &obj, None));
    }

    #[test]
    fn validation() {
        assert!(Objective::ea(0.0, 0.0).validate().is_err());
        assert!(Objective::tea(0.0, 0.0).validate().is_err());
        assert!(Objective::ea(-1.0, 1.0).validate().is_err());
        assert!(Objective {
            cap_handling: CapHandling::QuadraticPenalty(0.0),
            ..Objective::ea(1.0, 0.0)
        }
        .validate()
        .is_err());
        assert!(Objective::tea(1.0, 0.0).validate().is_ok());
    }

    #[test]
    fn toml_forms() {
        let o: Objective = toml::from_str("mode = \"tea\"\nw_tpe = 1.0\nw_area = 0.1\n").unwrap();
        assert_eq!(o.cap_handling, CapHandling::HardReject);
        let o: Objective =
            toml::from_str("mode = \"ea\"\nw_energy = 1.0\ncap_handling = { quadratic_penalty = 3.0 }\n").unwrap();
        assert_eq!(o.cap_handling, CapHandling::QuadraticPenalty(3.0));
    }
}
