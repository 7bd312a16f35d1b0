//! Technology parameters and per-OCU-type characteristics.

use std::fmt;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const DEFAULT_TECH: &str = include_str!("../../../configs/tech/default.toml");

/// Unit costs for memories and optical devices.
///
/// Energies are in pJ, latencies in ns, `r_r` in symbols/ns, `a_r` in mm²
/// and `a_rf`/`a_glb` in mm² per entry.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TechParams {
    pub e_rf_read: f64,
    pub e_rf_write: f64,
    pub e_glb_read: f64,
    pub e_glb_write: f64,
    pub e_dram_read: f64,
    pub e_dram_write: f64,
    pub l_rf: f64,
    pub l_glb: f64,
    pub l_dram: f64,
    pub e_tx: f64,
    pub e_rx: f64,
    pub e_r: f64,
    pub e_tune: f64,
    pub e_da: f64,
    pub e_ad: f64,
    pub e_sa: f64,
    pub r_r: f64,
    pub a_r: f64,
    pub a_rf: f64,
    pub a_glb: f64,
    pub alpha: f64,
    pub beta: f64,
    pub n_b: u32,
}

impl Default for TechParams {
    /// The shipped `configs/tech/default.toml`.
    fn default() -> Self {
        TechParams::from_toml_str(DEFAULT_TECH, "default tech").expect("shipped tech file is valid")
    }
}

macro_rules! tech_overlay {
    ($($field:ident: $ty:ty),* $(,)?) => {
        #[derive(Debug, Default, Deserialize)]
        #[serde(deny_unknown_fields)]
        struct TechFile {
            base: Option<String>,
            $($field: Option<$ty>,)*
        }

        impl TechFile {
            fn resolve(self, base: Option<TechParams>) -> Result<TechParams> {
                Ok(TechParams {
                    $($field: match (self.$field, base) {
                        (Some(v), _) => v,
                        (None, Some(b)) => b.$field,
                        (None, None) => return Err(Error::MissingTechField(stringify!($field))),
                    },)*
                })
            }
        }

        impl TechParams {
            fn real_fields(&self) -> Vec<(&'static str, f64)> {
                vec![$((stringify!($field), self.$field as f64),)*]
            }
        }
    };
}

tech_overlay! {
    e_rf_read: f64, e_rf_write: f64, e_glb_read: f64, e_glb_write: f64,
    e_dram_read: f64, e_dram_write: f64, l_rf: f64, l_glb: f64, l_dram: f64,
    e_tx: f64, e_rx: f64, e_r: f64, e_tune: f64, e_da: f64, e_ad: f64, e_sa: f64,
    r_r: f64, a_r: f64, a_rf: f64, a_glb: f64, alpha: f64, beta: f64, n_b: u32,
}

impl TechParams {
    /// Parses a technology file. With `base = "default"` missing keys fall
    /// back to the shipped defaults; otherwise every key is required.
    pub fn from_toml_str(text: &str, origin: &str) -> Result<Self> {
        let file: TechFile = toml::from_str(text).map_err(|e| Error::parse(origin, e))?;
        let base = match file.base.as_deref() {
            None => None,
            Some("default") => Some(
                toml::from_str::<TechFile>(DEFAULT_TECH)
                    .map_err(|e| Error::parse("default tech", e))?
                    .resolve(None)?,
            ),
            Some(other) => {
                return Err(Error::parse(
                    origin,
                    format!("unknown base `{other}` (only \"default\" is supported)"),
                ))
            }
        };
        let tech = file.resolve(base)?;
        tech.validate()?;
        Ok(tech)
    }

    pub fn validate(&self) -> Result<()> {
        for (field, value) in self.real_fields() {
            if !(value.is_finite() && value > 0.0) {
                return Err(Error::InvalidTech {
                    field,
                    reason: format!("must be finite and strictly positive (got {value})"),
                });
            }
        }
        for (field, value) in [("alpha", self.alpha), ("beta", self.beta)] {
            if value < 1.0 {
                return Err(Error::InvalidTech {
                    field,
                    reason: format!("must be at least 1 (got {value})"),
                });
            }
        }
        Ok(())
    }
}

pub fn load_tech(path: impl AsRef<Path>) -> Result<TechParams> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    TechParams::from_toml_str(&text, &path.display().to_string())
}

/// Optical convolution unit family.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum OcuType {
    /// Micro-resonator crossbar (HolyLight-style).
    #[serde(rename = "R")]
    R,
    /// Electro-optical modulator, time/wavelength interleaved.
    #[serde(rename = "E")]
    E,
    /// MZI mesh, SVD organization.
    #[serde(rename = "Z_SVD")]
    ZSvd,
    /// MZI mesh, FFT organization.
    #[serde(rename = "Z_FFT")]
    ZFft,
}

impl OcuType {
    pub const ALL: [OcuType; 4] = [OcuType::R, OcuType::E, OcuType::ZSvd, OcuType::ZFft];

    pub fn as_str(self) -> &'static str {
        match self {
            OcuType::R => "R",
            OcuType::E => "E",
            OcuType::ZSvd => "Z_SVD",
            OcuType::ZFft => "Z_FFT",
        }
    }
}

impl fmt::Display for OcuType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for OcuType {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        OcuType::ALL
            .into_iter()
            .find(|t| t.as_str().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::InvalidConfig(format!("unknown OCU type `{s}`")))
    }
}

/// Per-unit figures for one OCU processing a [1, N]x[N, N] matvec.
/// Power and area are in MR-equivalents.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OcuCharacteristics {
    pub ocu_type: OcuType,
    pub wavelengths: u64,
    pub power_units: f64,
    pub matvec_latency_symbols: u64,
    pub area_mr_equiv: f64,
    /// N_b: devices needed to hold one B-bit weight.
    pub mrs_per_weight: u64,
    /// Multiplier applied to the per-symbol MAC energy (1 for R, β otherwise).
    pub energy_scale: f64,
}

pub fn ocu_characteristics(ocu_type: OcuType, n: u64, b: u32, tech: &TechParams) -> Result<OcuCharacteristics> {
    if n < 2 {
        return Err(Error::InvalidConfig(format!("OCU port count N must be >= 2 (got {n})")));
    }
    if b < 1 {
        return Err(Error::InvalidConfig("operand precision B must be >= 1".into()));
    }
    let b = u64::from(b);
    let n2 = (n * n) as f64;
    let pairs = (n * (n - 1)) as f64;
    Ok(match ocu_type {
        OcuType::R => {
            let per_weight = b.div_ceil(u64::from(tech.n_b));
            OcuCharacteristics {
                ocu_type,
                wavelengths: per_weight,
                power_units: n2 * per_weight as f64,
                matvec_latency_symbols: 1,
                area_mr_equiv: n2 * per_weight as f64,
                mrs_per_weight: per_weight,
                energy_scale: 1.0,
            }
        }
        OcuType::E => OcuCharacteristics {
            ocu_type,
            wavelengths: n * n * b,
            power_units: tech.beta,
            matvec_latency_symbols: n * b,
            area_mr_equiv: tech.alpha,
            mrs_per_weight: 1,
            energy_scale: tech.beta,
        },
        OcuType::ZSvd => OcuCharacteristics {
            ocu_type,
            wavelengths: 1,
            power_units: tech.beta * pairs,
            matvec_latency_symbols: 1,
            area_mr_equiv: tech.alpha * pairs,
            mrs_per_weight: 1,
            energy_scale: tech.beta,
        },
        OcuType::ZFft => OcuCharacteristics {
            ocu_type,
            wavelengths: 1,
            power_units: tech.beta * pairs,
            matvec_latency_symbols: 1,
            area_mr_equiv: tech.alpha / 4.0 * pairs,
            mrs_per_weight: 1,
            energy_scale: tech.beta,
        },
    })
}
