use super::config::{DataKind, RunConfig};
use super::modetable::{load_or_compute, ModeTable, TableRequest};
use super::snapshot;
use crate::angular::{alpha_coupling, angular_overlap, spheroidal_eigs};
use crate::energy::{energy_density, energy_inner_product, energy_report, reports_to_csv, summarize_sweep, EnergyReport};
use crate::error::{Error, Result};
use crate::field::{FieldState, Grid};
use crate::geometry::{ergosphere_indicator, KerrBackground};
use crate::legendre;
use crate::radial::{RadialPotential, Scattering};
use crate::spectral::{project_all, synthesize_times};
use crate::timedomain::{apply_h, evolve, EvolutionConfig};
use crate::wavepacket::{build_wavepacket, hermitian_eigenvalues, superradiance_experiment, u_identity_residual, u_matrix, WavePacketSpec};
use num_complex::Complex64 as C64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

/// Shared state of one invocation.
pub struct Context {
    pub config: RunConfig,
    pub out: PathBuf,
    pub cache: Option<PathBuf>,
    pub seed: u64,
}

impl Context {
    fn bg(&self) -> Result<KerrBackground> {
        self.config.background()
    }

    fn write(&self, name: &str, contents: &str) -> Result<PathBuf> {
        std::fs::create_dir_all(&self.out)?;
        let path = self.out.join(name);
        std::fs::write(&path, contents)?;
        log::info!("wrote {}", path.display());
        Ok(path)
    }

    fn table(&self) -> Result<ModeTable> {
        let req = TableRequest::from_config(&self.config)?;
        Ok(load_or_compute(&req, self.cache.as_deref())?.0)
    }
}

fn to_json<T: Serialize>(v: &T) -> Result<String> {
    serde_json::to_string_pretty(v).map(|s| s + "\n").map_err(|e| Error::Format(e.to_string()))
}

pub const EIG_HEADER: &str = "omega,n,lambda";

/// `omega,n,lambda` for every tabulated `(ω, n)`.
pub fn cmd_eig(ctx: &Context) -> Result<String> {
    let table = ctx.table()?;
    let mut csv = String::from(EIG_HEADER);
    csv.push('\n');
    for r in &table.records {
        let _ = writeln!(csv, "{:e},{},{:e}", r.omega, r.n, r.lambda);
    }
    ctx.write("eig.csv", &csv)?;
    Ok(csv)
}

pub const SCATTER_HEADER: &str =
    "omega,n,re_alpha,im_alpha,re_beta,im_beta,t11,t12,t22,flux_residual,superradiant,wronskian_drift";

pub fn cmd_scatter(ctx: &Context) -> Result<String> {
    let table = ctx.table()?;
    let mut csv = String::from(SCATTER_HEADER);
    csv.push('\n');
    let mut worst = 0.0f64;
    for r in &table.records {
        worst = worst.max(r.flux_residual.abs());
        let _ = writeln!(
            csv,
            "{:e},{},{:e},{:e},{:e},{:e},{:e},{:e},{:e},{:e},{},{:e}",
            r.omega, r.n, r.alpha.re, r.alpha.im, r.beta.re, r.beta.im, r.t11, r.t12, r.t22, r.flux_residual,
            u8::from(r.superradiant), r.wronskian_drift
        );
    }
    if worst >= 1e-6 {
        log::warn!("largest flux residual {worst:e} exceeds 1e-6");
    }
    ctx.write("scatter.csv", &csv)?;
    Ok(csv)
}

/// Initial data of the `data` section sampled on `grid`.
pub fn initial_data(cfg: &RunConfig, bg: &KerrBackground, grid: &Grid) -> Result<FieldState> {
    let d = &cfg.data;
    match d.kind {
        DataKind::Gaussian => {
            let m = bg.k.unsigned_abs() as usize;
            let l = d.l.unwrap_or(m);
            if l < m {
                return Err(Error::Config(format!("data.l = {l} must be at least |k| = {m}")));
            }
            let (c, w, ingoing) = (d.center, d.width, d.ingoing);
            Ok(FieldState::from_fn(bg.k, grid.clone(), 0.0, |u, x| {
                let p = legendre::values(m, l - m + 1, x)[l - m];
                let f = (-(u - c).powi(2) / (2.0 * w * w)).exp();
                let psi2 = if ingoing { C64::new(0.0, -p * f * (u - c) / (w * w)) } else { C64::new(0.0, 0.0) };
                (C64::new(p * f, 0.0), psi2)
            }))
        }
        DataKind::Wavepacket => {
            let sr = cfg.superradiance_config();
            let spec = WavePacketSpec {
                k: bg.k,
                n_tilde: sr.n_tilde,
                omega_tilde: sr.carrier(bg),
                c_in: sr.c_in,
                c_out: sr.c_out,
                l: d.scale,
            };
            build_wavepacket(&spec, bg, grid, cfg.angular.tol)
        }
    }
}

fn sorted_times(cfg: &RunConfig) -> Vec<f64> {
    let mut t = cfg.evolve.times.clone();
    t.sort_by(f64::total_cmp);
    t.dedup();
    t
}

fn snapshot_name(prefix: &str, t: f64) -> String {
    format!("{prefix}_t{t:010.4}.ksnp")
}

fn write_snapshots(ctx: &Context, prefix: &str, states: &[FieldState], bg: &KerrBackground) -> Result<Vec<PathBuf>> {
    std::fs::create_dir_all(&ctx.out)?;
    let mut paths = Vec::with_capacity(states.len());
    for s in states {
        let path = ctx.out.join(snapshot_name(prefix, s.time));
        snapshot::write(&path, s, bg)?;
        if ctx.config.evolve.csv {
            std::fs::write(path.with_extension("csv"), snapshot::to_csv(s))?;
        }
        paths.push(path);
    }
    Ok(paths)
}

fn run_evolution(ctx: &Context, times: Vec<f64>) -> Result<crate::timedomain::Evolution> {
    let bg = ctx.bg()?;
    let grid = ctx.config.time_grid()?;
    let psi0 = initial_data(&ctx.config, &bg, &grid)?;
    let e = &ctx.config.evolve;
    let cfg = EvolutionConfig { dt: e.dt, snapshot_times: times, cfl_safety: e.cfl_safety, boundary_tol: e.boundary_tol, ..Default::default() };
    evolve(&psi0, &bg, &cfg)
}

pub fn cmd_evolve(ctx: &Context) -> Result<String> {
    let bg = ctx.bg()?;
    let ev = run_evolution(ctx, sorted_times(&ctx.config))?;
    write_snapshots(ctx, "evolve", &ev.snapshots, &bg)?;
    let e0 = ev.energies.first().map_or(0.0, |e| e.1);
    let mut csv = String::from("t,energy,relative_drift\n");
    for &(t, e) in &ev.energies {
        let drift = if e0 != 0.0 { (e - e0).abs() / e0.abs() } else { 0.0 };
        let _ = writeln!(csv, "{t:e},{e:e},{drift:e}");
    }
    ctx.write("evolve_energy.csv", &csv)?;
    Ok(format!("dt = {:e}, steps = {}, max relative energy drift = {:e}\n", ev.dt, ev.steps, ev.max_relative_drift()))
}

fn synthesized(ctx: &Context, times: &[f64]) -> Result<(Vec<FieldState>, crate::spectral::Projections)> {
    let bg = ctx.bg()?;
    let data = initial_data(&ctx.config, &bg, &ctx.config.projection_grid()?)?;
    let proj = project_all(&bg, &data, &ctx.config.synthesis())?;
    let states = synthesize_times(&proj, &ctx.config.time_grid()?, times, false)?;
    Ok((states, proj))
}

pub fn cmd_synth(ctx: &Context) -> Result<String> {
    let bg = ctx.bg()?;
    let (states, proj) = synthesized(ctx, &sorted_times(&ctx.config))?;
    write_snapshots(ctx, "synth", &states, &bg)?;
    let mut csv = String::from("n,spectral_energy\n");
    for mp in &proj.modes {
        let _ = writeln!(csv, "{},{:e}", mp.n, proj.spectral_form(|_| 1.0, Some(mp.n)));
    }
    ctx.write("synth_modes.csv", &csv)?;
    Ok(format!("synthesized {} states on {} modes\n", states.len(), proj.modes.len()))
}

#[derive(Debug, Clone, Serialize)]
struct SweepSummary {
    r_inner: f64,
    sup_exterior: f64,
    growth_factor: f64,
    alert: bool,
}

/// Energy reports for snapshot files; with no inputs, every `{prefix}_t*.ksnp` in the output directory.
pub fn cmd_energy(ctx: &Context, inputs: &[PathBuf], prefix: &str) -> Result<String> {
    let bg = ctx.bg()?;
    let files = if inputs.is_empty() { find_snapshots(&ctx.out, prefix)? } else { inputs.to_vec() };
    if files.is_empty() {
        return Err(Error::Config(format!("no {prefix}_t*.ksnp snapshots in {}", ctx.out.display())));
    }
    let r_inner = ctx.config.r_inner(&bg);
    let mut reports: Vec<EnergyReport> = Vec::with_capacity(files.len());
    for f in &files {
        let (state, m, a) = snapshot::read(f)?;
        if m != bg.mass || a != bg.spin || state.k != bg.k {
            return Err(Error::GridMismatch(format!("{} was written for a different background", f.display())));
        }
        reports.push(energy_report(&state, &bg, r_inner)?);
    }
    reports.sort_by(|a, b| a.t.total_cmp(&b.t));
    let csv = reports_to_csv(&reports);
    ctx.write("energy.csv", &csv)?;
    let sweep = summarize_sweep(reports, ctx.config.energy.max_growth);
    let summary = SweepSummary { r_inner, sup_exterior: sweep.sup_exterior, growth_factor: sweep.growth_factor, alert: sweep.alert };
    ctx.write("energy_summary.json", &to_json(&summary)?)?;
    Ok(csv)
}

fn find_snapshots(dir: &Path, prefix: &str) -> Result<Vec<PathBuf>> {
    let mut files: Vec<PathBuf> = std::fs::read_dir(dir)?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| {
            p.extension().is_some_and(|e| e == "ksnp")
                && p.file_name().and_then(|n| n.to_str()).is_some_and(|n| n.starts_with(&format!("{prefix}_t")))
        })
        .collect();
    files.sort();
    Ok(files)
}

#[derive(Debug, Clone, Serialize)]
struct Comparison {
    t: f64,
    u_lo: f64,
    u_hi: f64,
    relative_l2: f64,
    energy_drift: f64,
}

/// Time-domain evolution against spectral synthesis at `compare.t`.
pub fn cmd_compare(ctx: &Context) -> Result<String> {
    let c = &ctx.config.compare;
    let ev = run_evolution(ctx, vec![0.0, c.t])?;
    let (syn, _) = synthesized(ctx, &[c.t])?;
    let rel = syn[0].relative_l2_difference(&ev.snapshots[1], c.u_lo, c.u_hi)?;
    let cmp = Comparison { t: c.t, u_lo: c.u_lo, u_hi: c.u_hi, relative_l2: rel, energy_drift: ev.max_relative_drift() };
    ctx.write("compare.json", &to_json(&cmp)?)?;
    Ok(format!("relative L2 difference at t = {} on [{}, {}]: {rel:e}\n", c.t, c.u_lo, c.u_hi))
}

pub fn cmd_superradiance(ctx: &Context) -> Result<String> {
    let bg = ctx.bg()?;
    let report = superradiance_experiment(&bg, &ctx.config.superradiance_config())?;
    let json = to_json(&report)?;
    ctx.write("superradiance.json", &json)?;
    Ok(json)
}

#[derive(Debug, Clone, Serialize)]
pub struct Check {
    pub name: String,
    pub pass: bool,
    pub detail: String,
}

impl Check {
    fn new(name: &str, pass: bool, detail: String) -> Self {
        Self { name: name.into(), pass, detail }
    }

    pub fn line(&self) -> String {
        format!("{} {}: {}", if self.pass { "PASS" } else { "FAIL" }, self.name, self.detail)
    }
}

/// Runs the invariant suite; returns the checks (the caller decides the exit code).
pub fn cmd_validate(ctx: &Context) -> Result<Vec<Check>> {
    let cfg = &ctx.config;
    let bg = ctx.bg()?;
    let mut rng = ChaCha8Rng::seed_from_u64(ctx.seed);
    let mut checks = Vec::new();

    // separation constants at a = 0
    let bg0 = KerrBackground::new(bg.mass, 0.0, bg.k)?;
    let m = bg.k.unsigned_abs() as usize;
    let mut worst = 0.0f64;
    for w in [-1.3, 0.4, 2.0] {
        for mode in spheroidal_eigs(&bg0, w, cfg.angular.n_max, cfg.angular.tol)? {
            let l = (m + mode.n - 1) as f64;
            worst = worst.max((mode.lambda - l * (l + 1.0)).abs());
        }
    }
    checks.push(Check::new("legendre_limit", worst < 1e-10, format!("max |lambda - l(l+1)| = {worst:e}")));

    // flux identity and Wronskian constancy over the cached table
    let table = ctx.table()?;
    let flux = table.records.iter().map(|r| r.flux_residual.abs()).fold(0.0, f64::max);
    let drift = table.records.iter().map(|r| r.wronskian_drift).fold(0.0, f64::max);
    checks.push(Check::new("flux_identity", flux < 1e-6, format!("max flux residual {flux:e} over {} records", table.records.len())));
    checks.push(Check::new("wronskian_constancy", drift < 1e-8, format!("max relative drift {drift:e}")));
    let back = ModeTable::from_json(&table.to_json()?)?;
    checks.push(Check::new("cache_round_trip", back == table, "mode table JSON round trip".into()));

    // angular coupling identity
    let mut worst = 0.0f64;
    for _ in 0..5 {
        let (w1, w2) = (rng.gen_range(-1.5..1.5), rng.gen_range(-1.5..1.5));
        let a = spheroidal_eigs(&bg, w1, cfg.angular.n_max, cfg.angular.tol)?;
        let b = spheroidal_eigs(&bg, w2, cfg.angular.n_max, cfg.angular.tol)?;
        for ma in &a {
            for mb in b.iter().filter(|mb| mb.n != ma.n) {
                let res = angular_overlap(ma, mb) - (w1 - w2) * alpha_coupling(ma, mb)?;
                worst = worst.max(res.abs());
            }
        }
    }
    checks.push(Check::new("angular_coupling", worst < 1e-8, format!("max residual {worst:e}")));

    // U split and its identity at random points
    let opts = TableRequest::from_config(cfg)?.radial_options();
    let (mut psd, mut ident) = (f64::INFINITY, 0.0f64);
    for _ in 0..4 {
        let w = if bg.omega0 != 0.0 && rng.gen_bool(0.5) {
            bg.omega0 * rng.gen_range(0.2..0.8)
        } else {
            rng.gen_range(0.1..1.5) * if rng.gen_bool(0.5) { 1.0 } else { -1.0 }
        };
        let lambda = spheroidal_eigs(&bg, w, 1, cfg.angular.tol)?[0].lambda;
        let mut us: Vec<f64> = (0..4).map(|_| rng.gen_range(-15.0..25.0)).collect();
        us.sort_by(f64::total_cmp);
        let sc = Scattering::solve(&RadialPotential::new(bg, w, lambda), &us, &opts)?;
        let um = u_matrix(&sc.transmission)?;
        let scale = um.u[0][0].re;
        psd = psd.min(hermitian_eigenvalues(&um.u_plus)[0] / scale).min(hermitian_eigenvalues(&um.u_minus)[0] / scale);
        ident = ident.max(u_identity_residual(&sc)?);
    }
    checks.push(Check::new("u_split_positive", psd >= -1e-12, format!("min scaled eigenvalue {psd:e}")));
    checks.push(Check::new("u_identity", ident < 1e-7, format!("max relative residual {ident:e}")));

    // discrete H symmetric in the energy form
    let grid = Grid::uniform(-8.0, 12.0, 161, 12)?;
    let random_state = |rng: &mut ChaCha8Rng| {
        let mut s = FieldState::zeros(bg.k, grid.clone(), 0.0);
        for i in 0..s.psi1.len() {
            s.psi1[i] = C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
            s.psi2[i] = C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
        }
        s
    };
    let (a, b) = (random_state(&mut rng), random_state(&mut rng));
    let (ha, hb) = (apply_h(&a, &bg)?, apply_h(&b, &bg)?);
    let l = energy_inner_product(&bg, &ha, &b)?;
    let r = energy_inner_product(&bg, &a, &hb)?;
    let sym = (l - r).norm() / l.norm().max(r.norm());
    checks.push(Check::new("h_symmetry", sym < 1e-10, format!("relative asymmetry {sym:e}")));

    // energy density sign outside the ergosphere
    let mut min_out = f64::INFINITY;
    for _ in 0..2000 {
        let r = bg.r1 * (1.0 + rng.gen_range(1e-3..3.0));
        let x: f64 = rng.gen_range(-0.999..0.999);
        if ergosphere_indicator(&bg, r, x) < 0.0 {
            continue;
        }
        let c = |rng: &mut ChaCha8Rng| C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
        let (p, dt, dr, dx) = (c(&mut rng), c(&mut rng), c(&mut rng), c(&mut rng));
        let e = energy_density(&bg, p, dt, dr, dx, r, x);
        let scale = p.norm_sqr() + dt.norm_sqr() + dr.norm_sqr() + dx.norm_sqr();
        min_out = min_out.min(e / scale);
    }
    checks.push(Check::new("density_sign", min_out >= -1e-12, format!("min scaled density outside the ergosphere {min_out:e}")));
    Ok(checks)
}
