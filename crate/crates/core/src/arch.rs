//! Accelerator design points and the finite space they are searched over.

use std::fmt;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::cost;
use crate::device::{OcuType, TechParams};
use crate::error::{Error, Result};

/// Memory-level loop order. Each variant selects one GLB working-set
/// formula in [`crate::cost::working_set`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LoopOrder {
    /// Output channels outermost at GLB: a `tile_c` slab of input windows
    /// plus a `tile_d` slab of partial sums stay resident.
    OutputStationary,
    /// Input window outermost at GLB: one input window stays resident while
    /// `tile_d x tile_c` partial-sum slabs rotate through.
    InputStationary,
}

impl LoopOrder {
    pub const ALL: [LoopOrder; 2] = [LoopOrder::OutputStationary, LoopOrder::InputStationary];

    pub fn as_str(self) -> &'static str {
        match self {
            LoopOrder::OutputStationary => "output_stationary",
            LoopOrder::InputStationary => "input_stationary",
        }
    }
}

impl fmt::Display for LoopOrder {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for LoopOrder {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        LoopOrder::ALL
            .into_iter()
            .find(|o| o.as_str() == s)
            .ok_or_else(|| Error::InvalidConfig(format!("unknown loop order `{s}`")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MappingChoice {
    pub loop_order: LoopOrder,
    pub tile_d: u64,
    pub tile_c: u64,
}

impl Default for MappingChoice {
    fn default() -> Self {
        MappingChoice {
            loop_order: LoopOrder::OutputStationary,
            tile_d: 1,
            tile_c: 1,
        }
    }
}

/// One point in the accelerator design space.
///
/// `q_rf` and `q_glb` count B-bit operand entries, not bytes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AcceleratorConfig {
    pub k_t: u64,
    pub k_ocu: u64,
    pub ocu_type: OcuType,
    pub n: u64,
    pub q_rf: u64,
    pub q_glb: u64,
    pub b: u32,
    #[serde(default)]
    pub mapping: MappingChoice,
}

pub const MAX_PRECISION_BITS: u32 = 16;

impl AcceleratorConfig {
    /// Total OCUs on chip, K_t·K_OCU.
    pub fn total_ocus(&self) -> u64 {
        self.k_t * self.k_ocu
    }

    /// Checks the field invariants that do not depend on a search space.
    pub fn check(&self) -> Result<()> {
        let positive = [
            ("k_t", self.k_t),
            ("k_ocu", self.k_ocu),
            ("q_rf", self.q_rf),
            ("q_glb", self.q_glb),
            ("mapping.tile_d", self.mapping.tile_d),
            ("mapping.tile_c", self.mapping.tile_c),
        ];
        for (field, value) in positive {
            if value < 1 {
                return Err(Error::InvalidConfig(format!("{field} must be at least 1")));
            }
        }
        if self.n < 2 {
            return Err(Error::InvalidConfig(format!("n must be at least 2 (got {})", self.n)));
        }
        if !(1..=MAX_PRECISION_BITS).contains(&self.b) {
            return Err(Error::InvalidConfig(format!(
                "b must be in 1..={MAX_PRECISION_BITS} (got {})",
                self.b
            )));
        }
        Ok(())
    }

    pub fn from_toml_str(text: &str, origin: &str) -> Result<Self> {
        let config: AcceleratorConfig = toml::from_str(text).map_err(|e| Error::parse(origin, e))?;
        config.check()?;
        Ok(config)
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }
}

pub fn load_config(path: impl AsRef<Path>) -> Result<AcceleratorConfig> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    AcceleratorConfig::from_toml_str(&text, &path.display().to_string())
}

/// A searchable design dimension, in enumeration order (first varies slowest).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Dimension {
    KT,
    KOcu,
    OcuType,
    N,
    QRf,
    QGlb,
    B,
    LoopOrder,
    TileD,
    TileC,
}

pub const DIMS: usize = 10;

/// Per-dimension choice indices identifying one point of a [`SearchSpaceDef`].
pub type ChoiceIndex = [usize; DIMS];

impl Dimension {
    pub const ALL: [Dimension; DIMS] = [
        Dimension::KT,
        Dimension::KOcu,
        Dimension::OcuType,
        Dimension::N,
        Dimension::QRf,
        Dimension::QGlb,
        Dimension::B,
        Dimension::LoopOrder,
        Dimension::TileD,
        Dimension::TileC,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Dimension::KT => "k_t",
            Dimension::KOcu => "k_ocu",
            Dimension::OcuType => "ocu_type",
            Dimension::N => "n",
            Dimension::QRf => "q_rf",
            Dimension::QGlb => "q_glb",
            Dimension::B => "b",
            Dimension::LoopOrder => "loop_order",
            Dimension::TileD => "tile_d",
            Dimension::TileC => "tile_c",
        }
    }
}

impl fmt::Display for Dimension {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Explicit admissible values per dimension, plus an optional chip-area cap.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SearchSpaceDef {
    /// mm².
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub area_cap: Option<f64>,
    pub k_t: Vec<u64>,
    pub k_ocu: Vec<u64>,
    pub ocu_type: Vec<OcuType>,
    pub n: Vec<u64>,
    pub q_rf: Vec<u64>,
    pub q_glb: Vec<u64>,
    pub b: Vec<u32>,
    #[serde(default = "default_loop_orders")]
    pub loop_order: Vec<LoopOrder>,
    #[serde(default = "unit_list")]
    pub tile_d: Vec<u64>,
    #[serde(default = "unit_list")]
    pub tile_c: Vec<u64>,
}

fn default_loop_orders() -> Vec<LoopOrder> {
    vec![LoopOrder::OutputStationary]
}

fn unit_list() -> Vec<u64> {
    vec![1]
}

impl SearchSpaceDef {
    /// A space containing exactly `config`.
    pub fn singleton(config: &AcceleratorConfig) -> Self {
        SearchSpaceDef {
            area_cap: None,
            k_t: vec![config.k_t],
            k_ocu: vec![config.k_ocu],
            ocu_type: vec![config.ocu_type],
            n: vec![config.n],
            q_rf: vec![config.q_rf],
            q_glb: vec![config.q_glb],
            b: vec![config.b],
            loop_order: vec![config.mapping.loop_order],
            tile_d: vec![config.mapping.tile_d],
            tile_c: vec![config.mapping.tile_c],
        }
    }

    pub fn from_toml_str(text: &str, origin: &str) -> Result<Self> {
        let space: SearchSpaceDef = toml::from_str(text).map_err(|e| Error::parse(origin, e))?;
        space.check()?;
        Ok(space)
    }

    pub fn len_of(&self, dim: Dimension) -> usize {
        match dim {
            Dimension::KT => self.k_t.len(),
            Dimension::KOcu => self.k_ocu.len(),
            Dimension::OcuType => self.ocu_type.len(),
            Dimension::N => self.n.len(),
            Dimension::QRf => self.q_rf.len(),
            Dimension::QGlb => self.q_glb.len(),
            Dimension::B => self.b.len(),
            Dimension::LoopOrder => self.loop_order.len(),
            Dimension::TileD => self.tile_d.len(),
            Dimension::TileC => self.tile_c.len(),
        }
    }

    pub fn lens(&self) -> [usize; DIMS] {
        Dimension::ALL.map(|d| self.len_of(d))
    }

    /// Exact number of configurations, Π list lengths.
    pub fn cardinality(&self) -> u128 {
        self.lens().iter().map(|&l| l as u128).product()
    }

    /// Label of choice `i` along `dim`, for diagnostics and CSV headers.
    pub fn choice_label(&self, dim: Dimension, i: usize) -> String {
        match dim {
            Dimension::KT => self.k_t[i].to_string(),
            Dimension::KOcu => self.k_ocu[i].to_string(),
            Dimension::OcuType => self.ocu_type[i].to_string(),
            Dimension::N => self.n[i].to_string(),
            Dimension::QRf => self.q_rf[i].to_string(),
            Dimension::QGlb => self.q_glb[i].to_string(),
            Dimension::B => self.b[i].to_string(),
            Dimension::LoopOrder => self.loop_order[i].to_string(),
            Dimension::TileD => self.tile_d[i].to_string(),
            Dimension::TileC => self.tile_c[i].to_string(),
        }
    }

    pub fn config_at(&self, idx: &ChoiceIndex) -> AcceleratorConfig {
        AcceleratorConfig {
            k_t: self.k_t[idx[0]],
            k_ocu: self.k_ocu[idx[1]],
            ocu_type: self.ocu_type[idx[2]],
            n: self.n[idx[3]],
            q_rf: self.q_rf[idx[4]],
            q_glb: self.q_glb[idx[5]],
            b: self.b[idx[6]],
            mapping: MappingChoice {
                loop_order: self.loop_order[idx[7]],
                tile_d: self.tile_d[idx[8]],
                tile_c: self.tile_c[idx[9]],
            },
        }
    }

    /// Choice indices of `config`, or the first dimension it falls outside of.
    pub fn index_of(&self, config: &AcceleratorConfig) -> std::result::Result<ChoiceIndex, Dimension> {
        fn find<T: PartialEq>(list: &[T], v: &T, dim: Dimension) -> std::result::Result<usize, Dimension> {
            list.iter().position(|x| x == v).ok_or(dim)
        }
        Ok([
            find(&self.k_t, &config.k_t, Dimension::KT)?,
            find(&self.k_ocu, &config.k_ocu, Dimension::KOcu)?,
            find(&self.ocu_type, &config.ocu_type, Dimension::OcuType)?,
            find(&self.n, &config.n, Dimension::N)?,
            find(&self.q_rf, &config.q_rf, Dimension::QRf)?,
            find(&self.q_glb, &config.q_glb, Dimension::QGlb)?,
            find(&self.b, &config.b, Dimension::B)?,
            find(&self.loop_order, &config.mapping.loop_order, Dimension::LoopOrder)?,
            find(&self.tile_d, &config.mapping.tile_d, Dimension::TileD)?,
            find(&self.tile_c, &config.mapping.tile_c, Dimension::TileC)?,
        ])
    }

    /// Lexicographic rank of a choice index (first dimension most significant).
    pub fn rank(&self, idx: &ChoiceIndex) -> u128 {
        self.lens()
            .iter()
            .zip(idx)
            .fold(0u128, |acc, (&len, &i)| acc * len as u128 + i as u128)
    }

    /// Inverse of [`SearchSpaceDef::rank`].
    pub fn unrank(&self, mut rank: u128) -> ChoiceIndex {
        let lens = self.lens();
        let mut idx = [0usize; DIMS];
        for d in (0..DIMS).rev() {
            let len = lens[d] as u128;
            idx[d] = (rank % len) as usize;
            rank /= len;
        }
        idx
    }

    /// All configurations in lexicographic order. Fails when the space holds
    /// more than `limit` points.
    pub fn enumerate(&self, limit: u128) -> Result<Enumeration<'_>> {
        let cardinality = self.cardinality();
        if cardinality > limit {
            return Err(Error::SpaceTooLarge { cardinality, limit });
        }
        Ok(Enumeration {
            space: self,
            next: 0,
            end: cardinality,
        })
    }

    /// Structural checks: non-empty, duplicate-free lists of valid values.
    pub fn check(&self) -> Result<()> {
        fn distinct<T: PartialEq + fmt::Debug>(dim: Dimension, list: &[T]) -> Result<()> {
            if list.is_empty() {
                return Err(Error::InvalidSpace(format!("`{dim}` has no admissible values")));
            }
            for (i, v) in list.iter().enumerate() {
                if list[..i].contains(v) {
                    return Err(Error::InvalidSpace(format!("`{dim}` lists {v:?} twice")));
                }
            }
            Ok(())
        }
        distinct(Dimension::KT, &self.k_t)?;
        distinct(Dimension::KOcu, &self.k_ocu)?;
        distinct(Dimension::OcuType, &self.ocu_type)?;
        distinct(Dimension::N, &self.n)?;
        distinct(Dimension::QRf, &self.q_rf)?;
        distinct(Dimension::QGlb, &self.q_glb)?;
        distinct(Dimension::B, &self.b)?;
        distinct(Dimension::LoopOrder, &self.loop_order)?;
        distinct(Dimension::TileD, &self.tile_d)?;
        distinct(Dimension::TileC, &self.tile_c)?;
        if let Some(cap) = self.area_cap {
            if !(cap.is_finite() && cap > 0.0) {
                return Err(Error::InvalidSpace(format!("area_cap must be positive (got {cap})")));
            }
        }
        // Every list value must be individually valid; probe with the first
        // choice of every other dimension.
        for dim in Dimension::ALL {
            for i in 0..self.len_of(dim) {
                let mut idx = [0; DIMS];
                idx[dim as usize] = i;
                self.config_at(&idx)
                    .check()
                    .map_err(|e| Error::InvalidSpace(format!("`{dim}` value {}: {e}", self.choice_label(dim, i))))?;
            }
        }
        Ok(())
    }
}

pub fn load_space(path: impl AsRef<Path>) -> Result<SearchSpaceDef> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    SearchSpaceDef::from_toml_str(&text, &path.display().to_string())
}

/// Lexicographic stream over a [`SearchSpaceDef`].
#[derive(Debug, Clone)]
pub struct Enumeration<'a> {
    space: &'a SearchSpaceDef,
    next: u128,
    end: u128,
}

impl Enumeration<'_> {
    /// Exact number of configurations the full stream yields.
    pub fn count_total(&self) -> u128 {
        self.end
    }
}

impl Iterator for Enumeration<'_> {
    type Item = AcceleratorConfig;

    fn next(&mut self) -> Option<Self::Item> {
        if self.next >= self.end {
            return None;
        }
        let config = self.space.config_at(&self.space.unrank(self.next));
        self.next += 1;
        Some(config)
    }

    fn size_hint(&self) -> (usize, Option<usize>) {
        let left = usize::try_from(self.end - self.next).unwrap_or(usize::MAX);
        (left, Some(left))
    }
}

impl ExactSizeIterator for Enumeration<'_> {}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Violation {
    NotInSpace { dimension: Dimension, value: String },
    AreaExceeded { area: f64, cap: f64 },
    Invariant { reason: String },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::NotInSpace { dimension, value } => {
                write!(f, "{dimension} = {value} is not an admissible value")
            }
            Violation::AreaExceeded { area, cap } => {
                write!(f, "area {area:.4} mm^2 exceeds the cap of {cap} mm^2")
            }
            Violation::Invariant { reason } => f.write_str(reason),
        }
    }
}

/// Checks membership of every field in `space` and, when the space has an
/// area cap, that the predicted chip area fits under it. Never aborts early:
/// every violation found is returned.
pub fn validate(
    config: &AcceleratorConfig,
    space: &SearchSpaceDef,
    tech: &TechParams,
) -> std::result::Result<(), Vec<Violation>> {
    let mut violations = Vec::new();
    if let Err(e) = config.check() {
        violations.push(Violation::Invariant { reason: e.to_string() });
    }
    let value_of = |dim: Dimension| -> String {
        match dim {
            Dimension::KT => config.k_t.to_string(),
            Dimension::KOcu => config.k_ocu.to_string(),
            Dimension::OcuType => config.ocu_type.to_string(),
            Dimension::N => config.n.to_string(),
            Dimension::QRf => config.q_rf.to_string(),
            Dimension::QGlb => config.q_glb.to_string(),
            Dimension::B => config.b.to_string(),
            Dimension::LoopOrder => config.mapping.loop_order.to_string(),
            Dimension::TileD => config.mapping.tile_d.to_string(),
            Dimension::TileC => config.mapping.tile_c.to_string(),
        }
    };
    for dim in Dimension::ALL {
        let labels = (0..space.len_of(dim)).map(|i| space.choice_label(dim, i));
        let value = value_of(dim);
        if !labels.into_iter().any(|l| l == value) {
            violations.push(Violation::NotInSpace { dimension: dim, value });
        }
    }
    if let Some(cap) = space.area_cap {
        if violations.is_empty() {
            match cost::area(config, tech) {
                Ok(area) if area > cap => violations.push(Violation::AreaExceeded { area, cap }),
                Ok(_) => {}
                Err(e) => violations.push(Violation::Invariant { reason: e.to_string() }),
            }
        }
    }
    if violations.is_empty() {
        Ok(())
    } else {
        Err(violations)
    }
}
