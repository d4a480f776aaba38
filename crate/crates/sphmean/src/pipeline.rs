//! The commands behind the `sphmean` binary.

use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;
use sphmean_core::radial::{lemma_matrices, verify_identity, Identity, IdentityReport};
use sphmean_core::range::{certify, RangeReport, Tolerances, Verdict};
use sphmean_core::spectrum::{gram_residual, SpectralBasis};
use sphmean_core::timereversal::{
    solution_diagnostics, wave_equivalence_residual, ReconReport, Reconstruction, WaveOptions, DEFAULT_M_CAP,
};
use sphmean_core::{Geometry, ModeField, Parity, Phantom, Sinogram};

use crate::artifacts::{field_csv, write_json, ModeFieldDoc, Provenance};
use crate::cache::{basis_for, load_or_build, BasisKey};
use crate::config::RunConfig;
use crate::error::{Error, Result};
use crate::parallel;
use crate::sinogram_io::{check_against_config, read_sinogram, write_sinogram};

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Command {
    Forward,
    Certify,
    Reconstruct,
    Spectrum,
    VerifyIdentities,
    Roundtrip,
}

#[derive(Debug, Clone, Default)]
pub struct IoPaths {
    pub input: Option<PathBuf>,
    pub out: PathBuf,
    /// Overrides `tolerances.pass` for certification and the residual bound
    /// for `verify-identities`.
    pub tolerance: Option<f64>,
    pub quiet: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    pub exit_code: i32,
    /// Written files, in order.
    pub artifacts: Vec<PathBuf>,
    pub summary: String,
}

pub fn verdict_code(v: Verdict) -> i32 {
    match v {
        Verdict::InRange => 0,
        Verdict::OutOfRange => 2,
        Verdict::Inconclusive => 3,
    }
}

/// Residual bound for the jet identities.
pub const IDENTITY_TOLERANCE: f64 = 1e-9;
/// Highest angular order in the identity suite.
pub const IDENTITY_MAX_ORDER: usize = 8;
/// Highest `m` in the rank check of the boundary-data matrices.
pub const LEMMA_MAX_ORDER: usize = 6;
/// Truth profiles for `rel_l2_error` keep circular harmonics up to this order.
const TRUTH_ORDER: usize = 48;
/// Wave residuals are evaluated on modes up to this order.
const WAVE_ORDER: usize = 2;

/// Ten points spread over `(0.05, 3]`.
pub fn identity_points() -> Vec<f64> {
    (1..=10).map(|i| 0.05 + 0.295 * i as f64).collect()
}

/// `Γ_k D_k = D_{k-1} Γ_k` for `k ≤ 8` and both propositions on `u_i`,
/// `i < m ≤ 8`, for `n = 2..=5`.
pub fn identity_suite(tolerance: f64) -> Vec<IdentityReport> {
    let points = identity_points();
    let mut out = Vec::new();
    for n in 2..=5 {
        for k in 1..=IDENTITY_MAX_ORDER {
            out.push(verify_identity(Identity::Commutation { k }, n, &points, tolerance));
        }
        for m in 1..=IDENTITY_MAX_ORDER {
            for i in 0..m {
                out.push(verify_identity(Identity::PropDm { m, i }, n, &points, tolerance));
                out.push(verify_identity(Identity::PropQm { m, i }, n, &points, tolerance));
            }
        }
    }
    out
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LemmaCheck {
    pub m: usize,
    pub n: usize,
    #[serde(rename = "R")]
    pub r: f64,
    pub stacked_rank: usize,
    /// `A_{l,m+l} = 1` and `A_{l,j} = 0` for `j > m + l`.
    pub structure_pass: bool,
    /// Smallest singular value after row and column equilibration.
    pub min_singular_value: f64,
    pub row_normalized_min_singular_value: f64,
    pub pass: bool,
}

/// Full rank `2m` of the stacked boundary-data matrices for `m ≤ 6`,
/// `n ∈ {2, 3}`, `R ∈ {0.7, 1.0}`.
pub fn lemma_checks() -> Result<Vec<LemmaCheck>> {
    let mut out = Vec::new();
    for n in [2, 3] {
        for r in [0.7, 1.0] {
            for m in 1..=LEMMA_MAX_ORDER {
                let lm = lemma_matrices(m, n, r)?;
                let structure_pass = (0..m).all(|l| {
                    (lm.a[l][m + l] - 1.0).abs() <= 1e-12 && lm.a[l][m + l + 1..].iter().all(|x| *x == 0.0)
                });
                out.push(LemmaCheck {
                    m,
                    n,
                    r,
                    stacked_rank: lm.stacked_rank,
                    structure_pass,
                    min_singular_value: lm.min_singular_value,
                    row_normalized_min_singular_value: lm.row_normalized_min_singular_value,
                    pass: structure_pass && lm.stacked_rank == 2 * m,
                });
            }
        }
    }
    Ok(out)
}

#[derive(Serialize)]
struct IdentityDocument<'a> {
    tolerance: f64,
    all_pass: bool,
    identities: &'a [IdentityReport],
    lemma_rank: &'a [LemmaCheck],
}

fn identity_name(id: &Identity) -> &'static str {
    match id {
        Identity::Commutation { .. } => "commutation",
        Identity::PropDm { .. } => "prop_Dm",
        Identity::PropQm { .. } => "prop_Qm",
        Identity::GammaLadder { .. } => "gamma_ladder",
    }
}

fn basis_key(config: &RunConfig) -> BasisKey {
    BasisKey::new(config.geometry, config.r, config.basis.m_max, config.basis.k_max)
}

fn basis(config: &RunConfig) -> Result<SpectralBasis> {
    basis_for(config.basis.cache_path.as_deref(), &basis_key(config))
}

fn tolerances(config: &RunConfig, paths: &IoPaths) -> Result<Tolerances> {
    let mut tol = config.tolerances;
    if let Some(t) = paths.tolerance {
        if !(t > 0.0 && t < tol.fail) {
            return Err(Error::Config(format!("--tolerance must lie in (0, tolerances.fail = {}), got {t}", tol.fail)));
        }
        tol.pass = t;
    }
    Ok(tol)
}

fn require_phantom(config: &RunConfig, command: &str) -> Result<Phantom> {
    config
        .phantom()?
        .ok_or_else(|| Error::Config(format!("{command} needs a phantom; the `phantom` list is empty")))
}

fn input_sinogram(config: &RunConfig, paths: &IoPaths, command: &str) -> Result<Sinogram> {
    let path = paths
        .input
        .as_deref()
        .ok_or_else(|| Error::Config(format!("{command} needs an input sinogram (--in <path>)")))?;
    if !path.exists() {
        return Err(Error::Config(format!("input sinogram {} does not exist", path.display())));
    }
    let g = read_sinogram(path)?.sinogram;
    check_against_config(&g, config)?;
    Ok(g)
}

pub fn forward(config: &RunConfig, phantom: &Phantom) -> Result<Sinogram> {
    let g = &config.grids;
    Ok(parallel::forward_sinogram(phantom, config.r, g.n_theta, g.n_r, config.r_max())?)
}

/// Time reversal plus diagnostics, with `rel_l2_error` against `truth` when
/// given. Wave-form residuals that cannot be evaluated become warnings.
pub fn reconstruct_with_report(config: &RunConfig, g: &Sinogram, truth: Option<&Phantom>) -> Result<(Reconstruction, ReconReport)> {
    let rec = parallel::reconstruct(g, config.grids.n_s, DEFAULT_M_CAP)?;
    let mut report = solution_diagnostics(&rec.solutions, g.geometry)?;
    if let Some(p) = truth {
        let reference = ModeField::from_field(p, g.r, rec.field.s_grid.clone(), TRUTH_ORDER, 2 * TRUTH_ORDER + 32)?;
        report.rel_l2_error = Some(rec.field.rel_l2_error(&reference)?);
    }
    let mut wave = None::<f64>;
    for sol in rec.solutions.iter().filter(|s| s.key.m <= WAVE_ORDER) {
        match wave_equivalence_residual(sol, 2, &WaveOptions::default()) {
            Ok(w) => wave = Some(wave.map_or(w, |a| a.max(w))),
            Err(e) => report.warnings.push(format!("wave residual of mode ({}, {}): {e}", sol.key.m, parity_name(sol.key.parity))),
        }
    }
    report.wave_residual = wave;
    Ok((rec, report))
}

fn parity_name(p: Parity) -> &'static str {
    match p {
        Parity::Cos => "cos",
        Parity::Sin => "sin",
    }
}

#[derive(Serialize)]
struct SpectrumEntrySummary {
    m: usize,
    parity: Parity,
    k: usize,
    lambda: f64,
    eigenvalue: f64,
    normal_derivative_at_r: f64,
    l2_norm_check: f64,
}

#[derive(Serialize)]
struct SpectrumDocument {
    geometry: Geometry,
    #[serde(rename = "R")]
    r: f64,
    m_max: usize,
    k_max: usize,
    nodes: usize,
    cache_file: String,
    gram_residual: f64,
    entries: Vec<SpectrumEntrySummary>,
}

#[derive(Serialize)]
struct RoundtripDocument<'a> {
    geometry: Geometry,
    #[serde(rename = "R")]
    r: f64,
    verdict: Verdict,
    max_normalized_residual: f64,
    rel_l2_error: Option<f64>,
    boundary_max: [f64; 5],
    dod_sup: f64,
    wave_residual: Option<f64>,
    warnings: &'a [String],
}

struct Writer<'a> {
    dir: &'a Path,
    provenance: Provenance,
    written: Vec<PathBuf>,
}

impl Writer<'_> {
    fn json<T: Serialize>(&mut self, name: &str, body: &T) -> Result<()> {
        let path = self.dir.join(name);
        write_json(&path, &self.provenance, body)?;
        self.written.push(path);
        Ok(())
    }

    fn text(&mut self, name: &str, text: &str) -> Result<()> {
        let path = self.dir.join(name);
        fs::write(&path, text).map_err(|e| Error::io(&path, e))?;
        self.written.push(path);
        Ok(())
    }

    fn sinogram(&mut self, name: &str, g: &Sinogram) -> Result<()> {
        let path = self.dir.join(name);
        write_sinogram(&path, g, &self.provenance.header())?;
        self.written.push(path);
        Ok(())
    }

    fn reconstruction(&mut self, rec: &Reconstruction, report: &ReconReport, n_theta: usize) -> Result<()> {
        self.json("mode_field.json", &ModeFieldDoc::from(&rec.field))?;
        self.json("recon_report.json", report)?;
        self.text("field.csv", &field_csv(&rec.field, n_theta))
    }
}

fn describe_recon(report: &ReconReport) -> String {
    let err = report.rel_l2_error.map_or(String::new(), |e| format!(", rel_l2_error {e:.3e}"));
    format!("reconstructed {} modes{err}, {} warnings", report.modes, report.warnings.len())
}

pub fn run_command(command: Command, config: &RunConfig, paths: &IoPaths) -> Result<Outcome> {
    config.validate()?;
    fs::create_dir_all(&paths.out).map_err(|e| Error::io(&paths.out, e))?;
    let mut w = Writer { dir: &paths.out, provenance: Provenance::for_config(config), written: Vec::new() };
    let (exit_code, summary) = match command {
        Command::Forward => {
            let g = forward(config, &require_phantom(config, "forward")?)?;
            w.sinogram("sinogram.csv", &g)?;
            (0, format!("forward sinogram {} x {}", g.n_theta, g.n_r))
        }
        Command::Certify => {
            let g = input_sinogram(config, paths, "certify")?;
            let report = certify_sinogram(config, &g, &tolerances(config, paths)?)?;
            w.json("range_report.json", &report)?;
            (verdict_code(report.verdict), format!("verdict {:?}, max residual {:.3e}", report.verdict, report.max_normalized_residual))
        }
        Command::Reconstruct => {
            let g = input_sinogram(config, paths, "reconstruct")?;
            let (rec, report) = reconstruct_with_report(config, &g, config.phantom()?.as_ref())?;
            w.reconstruction(&rec, &report, config.grids.n_theta)?;
            (0, describe_recon(&report))
        }
        Command::Spectrum => {
            let dir = config.basis.cache_path.clone().unwrap_or_else(|| paths.out.join("basis-cache"));
            let (b, file) = load_or_build(&dir, &basis_key(config))?;
            let doc = SpectrumDocument {
                geometry: b.geometry,
                r: b.r,
                m_max: b.m_max,
                k_max: b.k_max,
                nodes: b.nodes,
                cache_file: file.file_name().map(|f| f.to_string_lossy().into_owned()).unwrap_or_default(),
                gram_residual: gram_residual(&b, config.basis.count.min(b.len())),
                entries: b
                    .entries
                    .iter()
                    .map(|e| SpectrumEntrySummary {
                        m: e.m,
                        parity: e.parity,
                        k: e.k,
                        lambda: e.lambda,
                        eigenvalue: e.eigenvalue,
                        normal_derivative_at_r: e.normal_derivative_at_r,
                        l2_norm_check: e.l2_norm_check,
                    })
                    .collect(),
            };
            w.written.push(file);
            w.json("spectrum.json", &doc)?;
            (0, format!("{} basis entries", b.len()))
        }
        Command::VerifyIdentities => {
            let tolerance = paths.tolerance.unwrap_or(IDENTITY_TOLERANCE);
            if !(tolerance > 0.0) {
                return Err(Error::Config(format!("--tolerance must be positive, got {tolerance}")));
            }
            let identities = identity_suite(tolerance);
            let lemma = lemma_checks()?;
            let all_pass = identities.iter().all(|r| r.pass) && lemma.iter().all(|c| c.pass);
            w.json("identities.json", &IdentityDocument { tolerance, all_pass, identities: &identities, lemma_rank: &lemma })?;
            let failed: Vec<String> = identities
                .iter()
                .filter(|r| !r.pass)
                .map(|r| format!("{} n={}", identity_name(&r.identity), r.n))
                .chain(lemma.iter().filter(|c| !c.pass).map(|c| format!("lemma_rank m={} n={} R={}", c.m, c.n, c.r)))
                .collect();
            let summary = if failed.is_empty() {
                format!("{} identities and {} rank checks pass", identities.len(), lemma.len())
            } else {
                format!("failed: {}", failed.join(", "))
            };
            (if all_pass { 0 } else { 4 }, summary)
        }
        Command::Roundtrip => {
            let phantom = require_phantom(config, "roundtrip")?;
            let g = forward(config, &phantom)?;
            w.sinogram("sinogram.csv", &g)?;
            let range = certify_sinogram(config, &g, &tolerances(config, paths)?)?;
            w.json("range_report.json", &range)?;
            let (rec, report) = reconstruct_with_report(config, &g, Some(&phantom))?;
            w.reconstruction(&rec, &report, config.grids.n_theta)?;
            w.json(
                "roundtrip.json",
                &RoundtripDocument {
                    geometry: config.geometry,
                    r: config.r,
                    verdict: range.verdict,
                    max_normalized_residual: range.max_normalized_residual,
                    rel_l2_error: report.rel_l2_error,
                    boundary_max: report.boundary_max,
                    dod_sup: report.dod_sup,
                    wave_residual: report.wave_residual,
                    warnings: &report.warnings,
                },
            )?;
            (verdict_code(range.verdict), format!("verdict {:?}; {}", range.verdict, describe_recon(&report)))
        }
    };
    Ok(Outcome { exit_code, artifacts: w.written, summary })
}

pub fn certify_sinogram(config: &RunConfig, g: &Sinogram, tol: &Tolerances) -> Result<RangeReport> {
    let b = basis(config)?;
    Ok(certify(g, &b, config.basis.count, tol)?)
}
