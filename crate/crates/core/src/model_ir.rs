//! DNN workloads as a linear sequence of layer shapes.
//!
//! Only CONV and FC rows carry cost. Pooling rows are kept so a loaded
//! network mirrors its published topology, but every cost and MAC count
//! treats them as zero.

use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LayerKind {
    Conv,
    Fc,
    Pool,
}

impl LayerKind {
    pub fn as_str(self) -> &'static str {
        match self {
            LayerKind::Conv => "conv",
            LayerKind::Fc => "fc",
            LayerKind::Pool => "pool",
        }
    }

    /// CONV and FC layers are costed; pooling rows are metadata.
    pub fn is_costed(self) -> bool {
        !matches!(self, LayerKind::Pool)
    }
}

impl fmt::Display for LayerKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// One layer. `e`/`f` are derived from the input geometry and are always
/// consistent with it for values built through [`LayerShape::conv`],
/// [`LayerShape::fc`], [`LayerShape::pool`] or [`load_network`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct LayerShape {
    pub kind: LayerKind,
    /// Input channels.
    pub c: u64,
    /// Output channels.
    pub d: u64,
    pub h: u64,
    pub w: u64,
    /// Square kernel size.
    pub z: u64,
    pub s: u64,
    pub p: u64,
    pub e: u64,
    pub f: u64,
}

impl LayerShape {
    pub fn conv(c: u64, d: u64, h: u64, w: u64, z: u64, s: u64, p: u64) -> Result<Self> {
        let mut layer = LayerShape {
            kind: LayerKind::Conv,
            c,
            d,
            h,
            w,
            z,
            s,
            p,
            e: 0,
            f: 0,
        };
        layer.check_geometry(0)?;
        (layer.e, layer.f) = derive_output_dims(&layer)?;
        Ok(layer)
    }

    /// FC layer, modeled as a 1x1 CONV over a 1x1 map.
    pub fn fc(c: u64, d: u64) -> Result<Self> {
        let layer = LayerShape {
            kind: LayerKind::Fc,
            c,
            d,
            h: 1,
            w: 1,
            z: 1,
            s: 1,
            p: 0,
            e: 1,
            f: 1,
        };
        layer.check_geometry(0)?;
        Ok(layer)
    }

    pub fn pool(c: u64, h: u64, w: u64, z: u64, s: u64, p: u64) -> Result<Self> {
        let mut layer = LayerShape {
            kind: LayerKind::Pool,
            c,
            d: c,
            h,
            w,
            z,
            s,
            p,
            e: 0,
            f: 0,
        };
        layer.check_geometry(0)?;
        (layer.e, layer.f) = derive_output_dims(&layer)?;
        Ok(layer)
    }

    /// Multiply-accumulates performed by this layer (zero for pooling rows).
    pub fn macs(&self) -> u64 {
        if !self.kind.is_costed() {
            return 0;
        }
        self.e * self.f * self.d * self.z * self.z * self.c
    }

    /// Z²·C: the length of one flattened receptive field.
    pub fn receptive_field(&self) -> u64 {
        self.z * self.z * self.c
    }

    pub fn output_pixels(&self) -> u64 {
        self.e * self.f
    }

    fn check_geometry(&self, index: usize) -> Result<()> {
        let fields = [
            ("c", self.c),
            ("d", self.d),
            ("h", self.h),
            ("w", self.w),
            ("z", self.z),
            ("s", self.s),
        ];
        for (field, value) in fields {
            if value < 1 {
                return Err(self.invalid(index, field, "must be at least 1"));
            }
        }
        Ok(())
    }

    fn invalid(&self, index: usize, field: &'static str, reason: impl Into<String>) -> Error {
        Error::InvalidLayer {
            layer: index,
            kind: self.kind.as_str(),
            field,
            reason: reason.into(),
        }
    }
}

/// Output height and width with floor semantics:
/// `E = floor((H + 2P - Z) / S) + 1`, likewise for `F`.
///
/// FC layers always return `(1, 1)`.
pub fn derive_output_dims(layer: &LayerShape) -> Result<(u64, u64)> {
    if layer.kind == LayerKind::Fc {
        return Ok((1, 1));
    }
    let axis = |extent: u64, field: &'static str| -> Result<u64> {
        let padded = extent + 2 * layer.p;
        if layer.s == 0 {
            return Err(layer.invalid(0, "s", "must be at least 1"));
        }
        if padded < layer.z {
            return Err(layer.invalid(
                0,
                field,
                format!(
                    "padded extent {padded} is smaller than kernel {}; derived output < 1",
                    layer.z
                ),
            ));
        }
        Ok((padded - layer.z) / layer.s + 1)
    };
    Ok((axis(layer.h, "e")?, axis(layer.w, "f")?))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DnnModel {
    pub name: String,
    pub layers: Vec<LayerShape>,
}

impl DnnModel {
    pub fn new(name: impl Into<String>, layers: Vec<LayerShape>) -> Result<Self> {
        let name = name.into();
        if !layers.iter().any(|l| l.kind.is_costed()) {
            return Err(Error::EmptyNetwork(name));
        }
        Ok(DnnModel { name, layers })
    }

    /// Number of costed (CONV/FC) layers.
    pub fn costed_layers(&self) -> usize {
        self.layers.iter().filter(|l| l.kind.is_costed()).count()
    }

    pub fn count_of(&self, kind: LayerKind) -> usize {
        self.layers.iter().filter(|l| l.kind == kind).count()
    }

    /// Topology string in the `3C,2P,2F` style.
    pub fn topology(&self) -> String {
        format!(
            "{}C,{}P,{}F",
            self.count_of(LayerKind::Conv),
            self.count_of(LayerKind::Pool),
            self.count_of(LayerKind::Fc)
        )
    }

    pub fn from_toml_str(text: &str, origin: &str) -> Result<Self> {
        let file: NetworkFile = toml::from_str(text).map_err(|e| Error::parse(origin, e))?;
        let layers = file
            .layers
            .iter()
            .enumerate()
            .map(|(i, row)| row.to_layer(i))
            .collect::<Result<Vec<_>>>()?;
        DnnModel::new(file.name, layers)
    }
}

pub fn count_macs(model: &DnnModel) -> u64 {
    model.layers.iter().map(LayerShape::macs).sum()
}

pub fn load_network(path: impl AsRef<Path>) -> Result<DnnModel> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    DnnModel::from_toml_str(&text, &path.display().to_string())
}

pub const BUILTIN_NETWORKS: [&str; 6] = ["lenet5", "alexnet", "zfnet", "resnet18", "googlenet", "vgg16"];

/// Source text of a shipped benchmark network.
pub fn builtin_network_source(name: &str) -> Option<&'static str> {
    Some(match name {
        "lenet5" => include_str!("../../../configs/networks/lenet5.toml"),
        "alexnet" => include_str!("../../../configs/networks/alexnet.toml"),
        "zfnet" => include_str!("../../../configs/networks/zfnet.toml"),
        "resnet18" => include_str!("../../../configs/networks/resnet18.toml"),
        "googlenet" => include_str!("../../../configs/networks/googlenet.toml"),
        "vgg16" => include_str!("../../../configs/networks/vgg16.toml"),
        _ => return None,
    })
}

pub fn builtin_network(name: &str) -> Option<DnnModel> {
    let text = builtin_network_source(name)?;
    Some(DnnModel::from_toml_str(text, name).expect("shipped network files are valid"))
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct NetworkFile {
    name: String,
    layers: Vec<LayerRow>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct LayerRow {
    kind: LayerKind,
    c: Option<u64>,
    d: Option<u64>,
    h: Option<u64>,
    w: Option<u64>,
    z: Option<u64>,
    s: Option<u64>,
    p: Option<u64>,
}

impl LayerRow {
    fn to_layer(&self, index: usize) -> Result<LayerShape> {
        let kind = self.kind.as_str();
        let missing = |field: &'static str| Error::InvalidLayer {
            layer: index,
            kind,
            field,
            reason: "is required".into(),
        };
        let reindex = |err: Error| match err {
            Error::InvalidLayer {
                kind, field, reason, ..
            } => Error::InvalidLayer {
                layer: index,
                kind,
                field,
                reason,
            },
            other => other,
        };
        let c = self.c.ok_or_else(|| missing("c"))?;
        match self.kind {
            LayerKind::Conv => {
                let d = self.d.ok_or_else(|| missing("d"))?;
                let h = self.h.ok_or_else(|| missing("h"))?;
                let w = self.w.ok_or_else(|| missing("w"))?;
                let z = self.z.ok_or_else(|| missing("z"))?;
                LayerShape::conv(c, d, h, w, z, self.s.unwrap_or(1), self.p.unwrap_or(0)).map_err(reindex)
            }
            LayerKind::Fc => {
                let d = self.d.ok_or_else(|| missing("d"))?;
                let unit = [
                    ("h", self.h, 1),
                    ("w", self.w, 1),
                    ("z", self.z, 1),
                    ("s", self.s, 1),
                    ("p", self.p, 0),
                ];
                for (field, value, expected) in unit {
                    if let Some(v) = value {
                        if v != expected {
                            return Err(Error::InvalidLayer {
                                layer: index,
                                kind,
                                field,
                                reason: format!("must be {expected} for an FC layer (got {v})"),
                            });
                        }
                    }
                }
                LayerShape::fc(c, d).map_err(reindex)
            }
            LayerKind::Pool => {
                if let Some(d) = self.d {
                    if d != c {
                        return Err(Error::InvalidLayer {
                            layer: index,
                            kind,
                            field: "d",
                            reason: format!("must equal c ({c}) for a pooling layer (got {d})"),
                        });
                    }
                }
                let h = self.h.ok_or_else(|| missing("h"))?;
                let w = self.w.ok_or_else(|| missing("w"))?;
                let z = self.z.ok_or_else(|| missing("z"))?;
                LayerShape::pool(c, h, w, z, self.s.unwrap_or(1), self.p.unwrap_or(0)).map_err(reindex)
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn conv_output_dims() {
        let l = LayerShape::conv(1, 6, 32, 32, 5, 1, 0).unwrap();
        assert_eq!((l.e, l.f), (28, 28));

        let l = LayerShape::conv(1, 1, 5, 5, 5, 1, 0).unwrap();
        assert_eq!(derive_output_dims(&l).unwrap(), (1, 1));

        let l = LayerShape::conv(3, 64, 224, 224, 11, 4, 2).unwrap();
        assert_eq!((l.e, l.f), (55, 55));

        let l = LayerShape::conv(1, 1, 7, 7, 3, 2, 0).unwrap();
        assert_eq!((l.e, l.f), (3, 3));
    }

    #[test]
    fn derive_is_idempotent() {
        let l = LayerShape::conv(2, 3, 17, 9, 3, 2, 1).unwrap();
        assert_eq!(derive_output_dims(&l).unwrap(), derive_output_dims(&l).unwrap());
        assert_eq!(derive_output_dims(&l).unwrap(), (l.e, l.f));
    }

    #[test]
    fn kernel_larger_than_map_is_rejected() {
        let err = LayerShape::conv(1, 1, 3, 3, 5, 1, 0).unwrap_err();
        assert!(matches!(err, Error::InvalidLayer { field: "e", .. }), "{err}");
        // padding rescues it
        assert!(LayerShape::conv(1, 1, 3, 3, 5, 1, 1).is_ok());
    }

    #[test]
    fn zero_fields_rejected() {
        assert!(LayerShape::conv(0, 1, 3, 3, 1, 1, 0).is_err());
        assert!(LayerShape::conv(1, 1, 3, 3, 1, 0, 0).is_err());
        assert!(LayerShape::fc(5, 0).is_err());
    }

    #[test]
    fn fc_is_unit_conv() {
        let l = LayerShape::fc(120, 84).unwrap();
        assert_eq!((l.z, l.e, l.f, l.h, l.w, l.s, l.p), (1, 1, 1, 1, 1, 1, 0));
        assert_eq!(l.macs(), 120 * 84);
        assert_eq!(LayerShape::fc(5, 7).unwrap().macs(), 35);
    }

    #[test]
    fn pool_has_no_macs() {
        let l = LayerShape::pool(6, 24, 24, 2, 2, 0).unwrap();
        assert_eq!((l.e, l.f, l.d), (12, 12, 6));
        assert_eq!(l.macs(), 0);
    }

    #[test]
    fn parse_rows() {
        let text = r#"
            name = "t"
            layers = [
              { kind = "conv", c = 1, d = 6, h = 32, w = 32, z = 5 },
              { kind = "pool", c = 6, h = 28, w = 28, z = 2, s = 2 },
              { kind = "fc", c = 120, d = 84 },
            ]
        "#;
        let m = DnnModel::from_toml_str(text, "t").unwrap();
        assert_eq!(m.layers.len(), 3);
        assert_eq!((m.layers[0].e, m.layers[0].f), (28, 28));
        assert_eq!(m.layers[2].z, 1);
        assert_eq!(m.topology(), "1C,1P,1F");
        assert_eq!(m.costed_layers(), 2);
    }

    #[test]
    fn parse_errors_name_layer_and_field() {
        let text = r#"
            name = "t"
            layers = [
              { kind = "fc", c = 10, d = 10 },
              { kind = "conv", c = 1, d = 6, h = 32, w = 32 },
            ]
        "#;
        let err = DnnModel::from_toml_str(text, "t").unwrap_err();
        assert!(
            matches!(
                err,
                Error::InvalidLayer {
                    layer: 1,
                    field: "z",
                    ..
                }
            ),
            "{err}"
        );

        let text = "name = \"t\"\nlayers = [ { kind = \"fc\", c = 10, d = 10, h = 7 } ]";
        let err = DnnModel::from_toml_str(text, "t").unwrap_err();
        assert!(matches!(
            err,
            Error::InvalidLayer {
                layer: 0,
                field: "h",
                ..
            }
        ));

        let text = "name = \"t\"\nlayers = [ { kind = \"conv\", c = 1, d = 1, h = 4, w = 4, z = 1, q = 3 } ]";
        let err = DnnModel::from_toml_str(text, "bad.toml").unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("bad.toml") && msg.contains("line 2"), "{msg}");
    }

    #[test]
    fn pool_only_network_rejected() {
        let text = "name = \"p\"\nlayers = [ { kind = \"pool\", c = 1, h = 4, w = 4, z = 2, s = 2 } ]";
        assert!(matches!(
            DnnModel::from_toml_str(text, "p"),
            Err(Error::EmptyNetwork(_))
        ));
    }

    #[test]
    fn builtins_load() {
        for name in BUILTIN_NETWORKS {
            let m = builtin_network(name).unwrap();
            assert_eq!(m.name, name);
        }
        assert!(builtin_network("nope").is_none());
    }
}
