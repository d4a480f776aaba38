//! On-disk cache of Dirichlet bases.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use sphmean_core::spectrum::{assemble_basis_with, SpectralBasis, BASIS_FORMAT_VERSION, DEFAULT_RADIAL_NODES};
use sphmean_core::Geometry;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BasisKey {
    pub geometry: Geometry,
    pub r: f64,
    pub m_max: usize,
    pub k_max: usize,
    pub nodes: usize,
}

impl BasisKey {
    pub fn new(geometry: Geometry, r: f64, m_max: usize, k_max: usize) -> Self {
        BasisKey { geometry, r, m_max, k_max, nodes: DEFAULT_RADIAL_NODES }
    }

    /// First 16 hex digits of a SHA-256 over the parameters. The format
    /// version is left out so stale files are found and rejected.
    pub fn digest(&self) -> String {
        let text = format!("{}|{:?}|{}|{}|{}", self.geometry.name(), self.r, self.m_max, self.k_max, self.nodes);
        hex::encode(Sha256::digest(text.as_bytes()))[..16].to_string()
    }

    pub fn file_name(&self) -> String {
        format!("basis-{}-{}.json", self.geometry.name(), self.digest())
    }
}

#[derive(Debug, Serialize, Deserialize)]
struct CachedBasis {
    format_version: u32,
    key: String,
    basis: SpectralBasis,
}

#[derive(Debug, Deserialize)]
struct VersionProbe {
    format_version: u32,
}

fn build(key: &BasisKey) -> Result<SpectralBasis> {
    Ok(assemble_basis_with(key.geometry, key.r, key.m_max, key.k_max, key.nodes)?)
}

/// Loads the basis for `key` from `dir`, building and storing it on a miss.
/// Files written by another format version are an error.
pub fn load_or_build(dir: &Path, key: &BasisKey) -> Result<(SpectralBasis, PathBuf)> {
    let path = dir.join(key.file_name());
    if path.exists() {
        let text = fs::read_to_string(&path).map_err(|e| Error::io(&path, e))?;
        let probe: VersionProbe = serde_json::from_str(&text)
            .map_err(|e| Error::Format(format!("{}: unreadable basis cache: {e}", path.display())))?;
        if probe.format_version != BASIS_FORMAT_VERSION {
            return Err(Error::Format(format!(
                "{}: basis cache has format version {}, this build reads version {BASIS_FORMAT_VERSION}; remove the file to rebuild it",
                path.display(),
                probe.format_version
            )));
        }
        let cached: CachedBasis = serde_json::from_str(&text)
            .map_err(|e| Error::Format(format!("{}: unreadable basis cache: {e}", path.display())))?;
        if cached.key != key.digest() || cached.basis.version != BASIS_FORMAT_VERSION {
            return Err(Error::Format(format!("{}: basis cache does not match its key", path.display())));
        }
        return Ok((cached.basis, path));
    }
    let basis = build(key)?;
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let doc = CachedBasis { format_version: BASIS_FORMAT_VERSION, key: key.digest(), basis };
    let tmp = path.with_extension("json.tmp");
    fs::write(&tmp, serde_json::to_vec(&doc).expect("basis serializes")).map_err(|e| Error::io(&tmp, e))?;
    fs::rename(&tmp, &path).map_err(|e| Error::io(&path, e))?;
    Ok((doc.basis, path))
}

/// The basis from the cache directory when one is given, else built in memory.
pub fn basis_for(dir: Option<&Path>, key: &BasisKey) -> Result<SpectralBasis> {
    match dir {
        Some(dir) => Ok(load_or_build(dir, key)?.0),
        None => build(key),
    }
}
