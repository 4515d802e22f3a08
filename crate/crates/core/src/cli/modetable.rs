//! Cached `(n, ω) ↦ (λ, α, β, t)` tables.
//!
//! The header carries a SHA-256 of everything that determines the records
//! (background bits, frequency list, tolerances, monitoring grid), and a second
//! digest of the record payload. A table whose digests do not match is discarded.

use super::config::RunConfig;
use crate::angular::spheroidal_eigs;
use crate::error::{Error, Result};
use crate::geometry::KerrBackground;
use crate::radial::{RadialOptions, RadialPotential, Scattering};
use num_complex::Complex64 as C64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TableHeader {
    pub background_hash: String,
    pub payload_hash: String,
    pub tool_version: String,
    pub mass: f64,
    pub spin: f64,
    pub k: i32,
    pub n_max: usize,
    pub omegas: Vec<f64>,
    pub u_grid: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModeRecord {
    pub n: usize,
    pub omega_index: usize,
    pub omega: f64,
    pub lambda: f64,
    pub alpha: C64,
    pub beta: C64,
    pub t11: f64,
    pub t12: f64,
    pub t22: f64,
    pub flux_residual: f64,
    pub wronskian_drift: f64,
    pub horizon_residual: f64,
    pub infinity_residual: f64,
    pub superradiant: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModeTable {
    pub header: TableHeader,
    pub records: Vec<ModeRecord>,
}

/// Everything a table depends on, as one request.
#[derive(Debug, Clone, PartialEq)]
pub struct TableRequest {
    pub bg: KerrBackground,
    pub n_max: usize,
    pub omegas: Vec<f64>,
    pub u_grid: Vec<f64>,
    pub angular_tol: f64,
    pub radial_tol: f64,
    pub far_factor: f64,
}

impl TableRequest {
    pub fn from_config(cfg: &RunConfig) -> Result<Self> {
        let bg = cfg.background()?;
        let [lo, hi] = cfg.radial.u_range;
        let m = cfg.radial.u_points;
        let u_grid = (0..m).map(|i| if m == 1 { lo } else { lo + (hi - lo) * i as f64 / (m - 1) as f64 }).collect();
        Ok(Self {
            omegas: cfg.frequency_list(&bg),
            bg,
            n_max: cfg.angular.n_max,
            u_grid,
            angular_tol: cfg.angular.tol,
            radial_tol: cfg.radial.tol,
            far_factor: cfg.radial.far_factor,
        })
    }

    pub fn hash(&self) -> String {
        let mut text = String::new();
        let _ = write!(text, "kerr-scatter modes;M={:016x};a={:016x};k={};", self.bg.mass.to_bits(), self.bg.spin.to_bits(), self.bg.k);
        let _ = write!(text, "n={};at={:016x};rt={:016x};ff={:016x};w=", self.n_max, self.angular_tol.to_bits(), self.radial_tol.to_bits(), self.far_factor.to_bits());
        for w in &self.omegas {
            let _ = write!(text, "{:016x},", w.to_bits());
        }
        text.push_str(";u=");
        for u in &self.u_grid {
            let _ = write!(text, "{:016x},", u.to_bits());
        }
        hex(&Sha256::digest(text.as_bytes()))
    }

    pub fn radial_options(&self) -> RadialOptions {
        RadialOptions { far_factor: self.far_factor, ..RadialOptions::from_tol(self.radial_tol) }
    }
}

fn hex(bytes: &[u8]) -> String {
    bytes.iter().fold(String::with_capacity(2 * bytes.len()), |mut s, b| {
        let _ = write!(s, "{b:02x}");
        s
    })
}

pub fn payload_hash(records: &[ModeRecord]) -> Result<String> {
    let bytes = serde_json::to_vec(records).map_err(|e| Error::Format(e.to_string()))?;
    Ok(hex(&Sha256::digest(&bytes)))
}

/// Solves every `(n, ω)` pair; parallel over frequencies, records in `(ω, n)` order.
pub fn compute_table(req: &TableRequest) -> Result<ModeTable> {
    let opts = req.radial_options();
    let rows: Vec<Vec<ModeRecord>> = req
        .omegas
        .par_iter()
        .enumerate()
        .map(|(iw, &w)| {
            let modes = spheroidal_eigs(&req.bg, w, req.n_max, req.angular_tol)?;
            modes
                .iter()
                .map(|mode| {
                    let pot = RadialPotential::new(req.bg, w, mode.lambda);
                    let sc = Scattering::solve(&pot, &req.u_grid, &opts)?;
                    let tr = sc.transmission;
                    Ok(ModeRecord {
                        n: mode.n,
                        omega_index: iw,
                        omega: w,
                        lambda: mode.lambda,
                        alpha: tr.alpha,
                        beta: tr.beta,
                        t11: tr.t[0][0],
                        t12: tr.t[0][1],
                        t22: tr.t[1][1],
                        flux_residual: tr.flux_residual(),
                        wronskian_drift: sc.wronskian_drift,
                        horizon_residual: sc.acute.boundary_residual,
                        infinity_residual: sc.grave.boundary_residual,
                        superradiant: tr.superradiant(),
                    })
                })
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    let records: Vec<ModeRecord> = rows.into_iter().flatten().collect();
    let header = TableHeader {
        background_hash: req.hash(),
        payload_hash: payload_hash(&records)?,
        tool_version: TOOL_VERSION.to_string(),
        mass: req.bg.mass,
        spin: req.bg.spin,
        k: req.bg.k,
        n_max: req.n_max,
        omegas: req.omegas.clone(),
        u_grid: req.u_grid.clone(),
    };
    Ok(ModeTable { header, records })
}

impl ModeTable {
    pub fn to_json(&self) -> Result<String> {
        serde_json::to_string(self).map_err(|e| Error::Format(e.to_string()))
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Format(e.to_string()))
    }

    /// Checks both digests and that every `(n, ω-index)` key occurs once.
    pub fn verify(&self, req: &TableRequest) -> Result<()> {
        if self.header.background_hash != req.hash() {
            return Err(Error::Format("mode table header hash does not match the request".into()));
        }
        if self.header.payload_hash != payload_hash(&self.records)? {
            return Err(Error::Format("mode table payload digest mismatch".into()));
        }
        let mut keys: Vec<(usize, usize)> = self.records.iter().map(|r| (r.omega_index, r.n)).collect();
        keys.sort_unstable();
        let len = keys.len();
        keys.dedup();
        if keys.len() != len || len != req.omegas.len() * req.n_max {
            return Err(Error::Format("mode table records are not keyed uniquely by (n, omega index)".into()));
        }
        Ok(())
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        let tmp = path.with_extension("json.tmp");
        std::fs::write(&tmp, self.to_json()?)?;
        std::fs::rename(&tmp, path)?;
        Ok(())
    }
}

pub fn cache_path(dir: &Path, req: &TableRequest) -> PathBuf {
    dir.join(format!("modes-{}.json", &req.hash()[..16]))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CacheOutcome {
    Hit,
    /// no usable cache file
    Miss,
    /// a cache file was present but failed verification
    Rejected,
    Disabled,
}

/// Loads a verified table from `dir`, or computes (and stores) a fresh one.
pub fn load_or_compute(req: &TableRequest, dir: Option<&Path>) -> Result<(ModeTable, CacheOutcome)> {
    let Some(dir) = dir else {
        return Ok((compute_table(req)?, CacheOutcome::Disabled));
    };
    let path = cache_path(dir, req);
    let mut outcome = CacheOutcome::Miss;
    if path.exists() {
        let loaded = std::fs::read_to_string(&path).map_err(Error::from).and_then(|t| ModeTable::from_json(&t));
        match loaded.and_then(|t| t.verify(req).map(|_| t)) {
            Ok(t) => {
                log::info!("mode table cache hit: {}", path.display());
                return Ok((t, CacheOutcome::Hit));
            }
            Err(e) => {
                log::warn!("discarding mode table {}: {e}", path.display());
                outcome = CacheOutcome::Rejected;
            }
        }
    }
    let table = compute_table(req)?;
    std::fs::create_dir_all(dir)?;
    table.write(&path)?;
    Ok((table, outcome))
}
