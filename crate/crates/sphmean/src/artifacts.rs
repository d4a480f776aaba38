//! JSON and CSV artifacts. Every JSON document starts with a `provenance`
//! object carrying the tool version and the config hash.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};
use sphmean_core::{Geometry, ModeField, ModeKey, Parity};

use crate::config::RunConfig;
use crate::error::{Error, Result};

pub const TOOL: &str = "sphmean";
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Provenance {
    pub tool: String,
    pub version: String,
    pub config_hash: String,
}

impl Provenance {
    pub fn for_config(config: &RunConfig) -> Self {
        Provenance { tool: TOOL.into(), version: VERSION.into(), config_hash: config.hash() }
    }

    /// Extra sinogram header lines.
    pub fn header(&self) -> Vec<(String, String)> {
        vec![("tool".into(), format!("{} {}", self.tool, self.version)), ("config_hash".into(), self.config_hash.clone())]
    }
}

#[derive(Serialize)]
struct Document<'a, T: Serialize> {
    provenance: &'a Provenance,
    #[serde(flatten)]
    body: &'a T,
}

pub fn write_json<T: Serialize>(path: &Path, provenance: &Provenance, body: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(&Document { provenance, body })
        .map_err(|e| Error::Format(format!("cannot serialize {}: {e}", path.display())))?;
    text.push('\n');
    fs::write(path, text).map_err(|e| Error::io(path, e))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModeProfile {
    pub m: usize,
    pub parity: Parity,
    pub values: Vec<f64>,
}

/// `ModeField` with its modes as a list.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModeFieldDoc {
    pub geometry: Geometry,
    #[serde(rename = "R")]
    pub r: f64,
    pub s_grid: Vec<f64>,
    pub modes: Vec<ModeProfile>,
    pub description: String,
}

impl From<&ModeField> for ModeFieldDoc {
    fn from(f: &ModeField) -> Self {
        ModeFieldDoc {
            geometry: f.geometry,
            r: f.r,
            s_grid: f.s_grid.clone(),
            modes: f.modes.iter().map(|(k, v)| ModeProfile { m: k.m, parity: k.parity, values: v.clone() }).collect(),
            description: f.description.clone(),
        }
    }
}

impl From<ModeFieldDoc> for ModeField {
    fn from(d: ModeFieldDoc) -> Self {
        let mut f = ModeField::zero(d.geometry, d.r, d.s_grid);
        f.description = d.description;
        for p in d.modes {
            f.modes.insert(ModeKey::new(p.m, p.parity), p.values);
        }
        f
    }
}

/// `s,theta,f` samples of the synthesized field on the profile grid and
/// `n_theta` equispaced angles.
pub fn field_csv(field: &ModeField, n_theta: usize) -> String {
    let mut out = String::from("s,theta,f\n");
    let thetas: Vec<f64> = (0..n_theta).map(|j| 2.0 * std::f64::consts::PI * j as f64 / n_theta as f64).collect();
    let angular: Vec<Vec<f64>> = field.modes.keys().map(|k| thetas.iter().map(|t| k.angular(*t)).collect()).collect();
    for (i, s) in field.s_grid.iter().enumerate() {
        for (j, t) in thetas.iter().enumerate() {
            let v: f64 = field.modes.values().zip(&angular).map(|(p, y)| p[i] * y[j]).sum();
            let _ = writeln!(out, "{s:?},{t:?},{v:?}");
        }
    }
    out
}
