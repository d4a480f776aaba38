//! Run configuration: JSON on disk, validated on load.

use std::f64::consts::FRAC_PI_2;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use sphmean_core::geometry::distance;
use sphmean_core::range::Tolerances;
use sphmean_core::{Bump, BumpKind, Geometry, Phantom, Point};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub geometry: Geometry,
    /// Geodesic radius of the detector circle.
    #[serde(rename = "R")]
    pub r: f64,
    #[serde(default)]
    pub grids: Grids,
    #[serde(default)]
    pub phantom: Vec<BumpSpec>,
    #[serde(default)]
    pub tolerances: Tolerances,
    #[serde(default)]
    pub basis: BasisConfig,
    #[serde(default)]
    pub seed: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Grids {
    pub n_theta: usize,
    pub n_r: usize,
    /// Nominal samples of the Darboux grid on `[0, R + r_max]`.
    pub n_s: usize,
    /// End of the sinogram window; `2R` when absent.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub r_max: Option<f64>,
}

impl Default for Grids {
    fn default() -> Self {
        Grids { n_theta: 256, n_r: 512, n_s: 512, r_max: None }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BumpSpec {
    pub kind: BumpKind,
    pub center: CenterSpec,
    pub width: f64,
    #[serde(default = "unit")]
    pub amplitude: f64,
}

fn unit() -> f64 {
    1.0
}

/// A bump center, either in geodesic polar coordinates `[s, θ]` about the
/// origin or in model coordinates.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum CenterSpec {
    Polar([f64; 2]),
    Disc([f64; 2]),
    Sphere([f64; 3]),
}

impl CenterSpec {
    pub fn point(&self, geometry: Geometry) -> sphmean_core::Result<Point> {
        match (*self, geometry) {
            (CenterSpec::Polar([s, t]), g) => Point::polar(g, s, t),
            (CenterSpec::Disc([x, y]), Geometry::H2) => Point::disc(x, y),
            (CenterSpec::Sphere(v), Geometry::S2) => Point::sphere(v),
            (CenterSpec::Disc(_), Geometry::S2) => {
                Err(sphmean_core::Error::Argument("a disc center cannot be used with geometry S2".into()))
            }
            (CenterSpec::Sphere(_), Geometry::H2) => {
                Err(sphmean_core::Error::Argument("a sphere center cannot be used with geometry H2".into()))
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BasisConfig {
    pub m_max: usize,
    pub k_max: usize,
    /// Basis entries paired against the data.
    pub count: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub cache_path: Option<PathBuf>,
}

impl Default for BasisConfig {
    fn default() -> Self {
        BasisConfig { m_max: 10, k_max: 8, count: 30, cache_path: None }
    }
}

fn invalid(field: &str, msg: impl std::fmt::Display) -> Error {
    Error::Config(format!("field `{field}`: {msg}"))
}

impl RunConfig {
    /// Defaults everywhere except the geometry and radius.
    pub fn new(geometry: Geometry, r: f64) -> Self {
        RunConfig {
            geometry,
            r,
            grids: Grids::default(),
            phantom: Vec::new(),
            tolerances: Tolerances::default(),
            basis: BasisConfig::default(),
            seed: 0,
        }
    }

    pub fn r_max(&self) -> f64 {
        self.grids.r_max.unwrap_or(2.0 * self.r)
    }

    /// The configured phantom, or `None` when no bumps are listed.
    pub fn phantom(&self) -> Result<Option<Phantom>> {
        if self.phantom.is_empty() {
            return Ok(None);
        }
        let bumps = self
            .phantom
            .iter()
            .map(|b| {
                Ok(Bump { kind: b.kind, center: b.center.point(self.geometry)?, width: b.width, amplitude: b.amplitude })
            })
            .collect::<sphmean_core::Result<Vec<_>>>()?;
        Ok(Some(Phantom::new(self.geometry, bumps)?))
    }

    pub fn validate(&self) -> Result<()> {
        let r = self.r;
        if !(r > 0.0 && r.is_finite()) {
            return Err(invalid("R", format!("must be positive and finite, got {r}")));
        }
        if self.geometry == Geometry::S2 && r >= FRAC_PI_2 {
            return Err(invalid("R", format!("S2 requires R < pi/2 = {FRAC_PI_2:.6}, got {r}")));
        }
        let g = &self.grids;
        if g.n_theta < 8 {
            return Err(invalid("grids.n_theta", format!("must be at least 8, got {}", g.n_theta)));
        }
        if g.n_r < 64 {
            return Err(invalid("grids.n_r", format!("must be at least 64, got {}", g.n_r)));
        }
        if g.n_s < 16 {
            return Err(invalid("grids.n_s", format!("must be at least 16, got {}", g.n_s)));
        }
        if let Some(r_max) = g.r_max {
            if !(r_max.is_finite() && r_max >= 2.0 * r) {
                return Err(invalid("grids.r_max", format!("must be at least 2R = {}, got {r_max}", 2.0 * r)));
            }
            if self.geometry == Geometry::S2 && r_max >= std::f64::consts::PI {
                return Err(invalid("grids.r_max", format!("must be below pi on S2, got {r_max}")));
            }
        }
        for (i, b) in self.phantom.iter().enumerate() {
            let field = |name: &str| format!("phantom[{i}].{name}");
            if !(b.width > 0.0 && b.width.is_finite()) {
                return Err(invalid(&field("width"), format!("must be positive, got {}", b.width)));
            }
            if !b.amplitude.is_finite() {
                return Err(invalid(&field("amplitude"), "must be finite"));
            }
            let c = b.center.point(self.geometry).map_err(|e| invalid(&field("center"), e))?;
            let d = distance(&Point::origin(self.geometry), &c).map_err(|e| invalid(&field("center"), e))?;
            if d + 3.0 * b.width >= r {
                return Err(invalid(
                    &field("center"),
                    format!("support reaches {:.6} (distance {d:.6} + 3 width), which is not inside R = {r}", d + 3.0 * b.width),
                ));
            }
        }
        let t = &self.tolerances;
        for (name, v) in [("pass", t.pass), ("fail", t.fail), ("support", t.support), ("vanishing", t.vanishing)] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(invalid(&format!("tolerances.{name}"), format!("must be positive, got {v}")));
            }
        }
        if t.pass >= t.fail {
            return Err(invalid("tolerances.pass", format!("must be below tolerances.fail = {}, got {}", t.fail, t.pass)));
        }
        if !t.smoothness.is_finite() {
            return Err(invalid("tolerances.smoothness", "must be finite"));
        }
        let b = &self.basis;
        if b.k_max == 0 {
            return Err(invalid("basis.k_max", "must be at least 1"));
        }
        let available = (2 * b.m_max + 1) * b.k_max;
        if b.count == 0 || b.count > available {
            return Err(invalid("basis.count", format!("must lie in 1..={available} for m_max = {}, k_max = {}", b.m_max, b.k_max)));
        }
        Ok(())
    }

    /// Hex SHA-256 of the compact JSON form.
    pub fn hash(&self) -> String {
        let bytes = serde_json::to_vec(self).expect("config serializes");
        hex::encode(Sha256::digest(&bytes))
    }
}

pub fn parse_config(text: &str) -> Result<RunConfig> {
    let config: RunConfig = serde_json::from_str(text)
        .map_err(|e| Error::Config(format!("line {}, column {}: {e}", e.line(), e.column())))?;
    config.validate()?;
    Ok(config)
}

pub fn load_config(path: &Path) -> Result<RunConfig> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_config(&text).map_err(|e| match e {
        Error::Config(msg) => Error::Config(format!("{}: {msg}", path.display())),
        other => other,
    })
}

pub fn save_config(config: &RunConfig, path: &Path) -> Result<()> {
    let mut text = serde_json::to_string_pretty(config).expect("config serializes");
    text.push('\n');
    fs::write(path, text).map_err(|e| Error::io(path, e))
}
