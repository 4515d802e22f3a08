//! Acceptance suite: one PASS/FAIL line per criterion, nonzero exit if any fails.
//!
//! Run with `cargo test --test acceptance`; add `-- 3 7` to select criteria.

mod common;

use common::*;
use kerr_scatter::angular::{alpha_coupling, angular_overlap, spheroidal_eigs};
use kerr_scatter::cli::modetable::{compute_table, TableRequest};
use kerr_scatter::energy::{energy_density, energy_inner_product, energy_report, summarize_sweep};
use kerr_scatter::field::{FieldState, Grid};
use kerr_scatter::geometry::ergosphere_indicator;
use kerr_scatter::legendre;
use kerr_scatter::radial::{jost_acute, RadialOptions, RadialPotential, Scattering};
use kerr_scatter::spectral::{functional_calculus, omega_rule, project_all, synthesize, synthesize_times, SynthesisConfig};
use kerr_scatter::timedomain::{evolve, EvolutionConfig};
use kerr_scatter::wavepacket::{carrier_transmission, hermitian_eigenvalues, superradiance_experiment, u_matrix, SuperradianceConfig};
use kerr_scatter::{KerrBackground, Result};
use num_complex::Complex64 as C64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::time::{Duration, Instant};

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Result<Outcome> {
    Ok(Outcome { pass, detail })
}

/// `P̄_1^1(x) · exp(-(u - 10)²/(2 · 1.5²))`, at rest.
fn gaussian_bump(u: f64, x: f64) -> (C64, C64) {
    let p = legendre::values(1, 1, x)[0];
    (C64::new(p * (-(u - 10.0f64).powi(2) / 4.5).exp(), 0.0), C64::new(0.0, 0.0))
}

fn flux_table() -> Result<kerr_scatter::cli::modetable::ModeTable> {
    // 202 midpoints of [-2, 2]; none lands on 0 or ω₀
    let n = 202;
    let omegas = (0..n).map(|i| -2.0 + 4.0 * (i as f64 + 0.5) / n as f64).collect();
    let req = TableRequest {
        bg: KerrBackground::new(1.0, 0.5, 1)?,
        n_max: 3,
        omegas,
        u_grid: linspace(-30.0, 60.0, 31),
        angular_tol: 1e-12,
        radial_tol: 1e-10,
        far_factor: 30.0,
    };
    compute_table(&req)
}

fn criterion_1() -> Result<Outcome> {
    let table = flux_table()?;
    let worst = table.records.iter().max_by(|a, b| a.flux_residual.abs().total_cmp(&b.flux_residual.abs())).unwrap();
    let rel = table.records.iter().map(|r| r.flux_residual.abs() / (1.0 + r.beta.norm_sqr())).fold(0.0, f64::max);
    let abs = worst.flux_residual.abs();
    outcome(
        abs < 1e-6,
        format!(
            "{} frequencies x n<=3: max |flux residual| {abs:.3e} at omega={:.4} n={} (|beta|^2={:.2e}); max residual / (1+|beta|^2) {rel:.2e}",
            table.header.omegas.len(),
            worst.omega,
            worst.n,
            worst.beta.norm_sqr()
        ),
    )
}

fn criterion_2() -> Result<Outcome> {
    let table = flux_table()?;
    let drift = table.records.iter().map(|r| r.wronskian_drift).fold(0.0, f64::max);
    outcome(drift < 1e-8, format!("max relative Wronskian drift {drift:.2e} over {} solutions on 31 grid points", table.records.len()))
}

fn criterion_3() -> Result<Outcome> {
    let mut eig = 0.0f64;
    for k in [0, 1, 2] {
        let bg = KerrBackground::new(1.0, 0.0, k)?;
        for w in [-2.0, -0.4, 0.3, 1.7] {
            for mode in spheroidal_eigs(&bg, w, 4, 1e-12)? {
                let l = (k.unsigned_abs() as usize + mode.n - 1) as f64;
                eig = eig.max((mode.lambda - l * (l + 1.0)).abs());
            }
        }
    }
    let bg = KerrBackground::new(1.0, 0.0, 1)?;
    let targets = [-20.0, -6.0, 0.0, 3.0, 8.0, 15.0, 25.0];
    let mut radial = 0.0f64;
    for (n, w) in [(1usize, 0.3), (1, -0.8), (2, 1.5), (3, 0.45), (2, -0.12)] {
        let lambda = spheroidal_eigs(&bg, w, n, 1e-12)?[n - 1].lambda;
        let ell = n as f64;
        let jost = jost_acute(&RadialPotential::new(bg, w, lambda), &targets, 1e-10)?;
        let oracle = rw_horizon_solution(1.0, ell, w, -80.0, 2e-3, &targets);
        let scale = oracle.iter().map(|z| z.norm()).fold(0.0, f64::max);
        for (i, z) in oracle.iter().enumerate() {
            radial = radial.max((jost.value(i) - z).norm() / scale);
        }
    }
    outcome(
        eig < 1e-10 && radial < 1e-7,
        format!("max |lambda - l(l+1)| {eig:.2e}; max relative deviation from Regge-Wheeler RK4 {radial:.2e}"),
    )
}

fn criterion_4() -> Result<Outcome> {
    let bg = KerrBackground::new(1.0, 0.5, 1)?;
    let ws = [-1.7, -0.9, -0.2, 0.6, 1.4];
    let vs = [-1.3, -0.5, 0.1, 0.9, 1.8];
    let mut worst = 0.0f64;
    let mut pairs = 0;
    for &w in &ws {
        let a = spheroidal_eigs(&bg, w, 4, 1e-12)?;
        for &v in &vs {
            let b = spheroidal_eigs(&bg, v, 4, 1e-12)?;
            for ma in &a {
                for mb in &b {
                    worst = worst.max((angular_overlap(ma, mb) - (w - v) * alpha_coupling(ma, mb)?).abs());
                    pairs += 1;
                }
            }
        }
    }
    outcome(worst < 1e-8, format!("max residual {worst:.2e} over {pairs} (omega, omega', n, n') combinations"))
}

fn criterion_5() -> Result<Outcome> {
    let bg = KerrBackground::new(1.0, 0.5, 1)?;
    let grid = Grid::uniform_gauss(-20.0, 40.0, 1201, 16)?;
    let psi0 = FieldState::from_fn(1, grid.clone(), 0.0, gaussian_bump);
    let cfg = SynthesisConfig { max_panel_width: 0.24, ..Default::default() };
    let nodes = omega_rule(&bg, &cfg).len();
    let proj = project_all(&bg, &psi0, &cfg)?;
    let rec = synthesize(&proj, &grid, 0.0)?;
    let err = rec.relative_l2_difference(&psi0, -20.0, 40.0)?;
    outcome(
        err < 1e-2 && nodes >= 400 && cfg.n_max == 6,
        format!("N={} modes, {nodes} frequency nodes: relative L2 error {err:.2e}", cfg.n_max),
    )
}

fn criterion_6() -> Result<Outcome> {
    let bg = KerrBackground::new(1.0, 0.5, 1)?;
    let td_grid = Grid::uniform(-50.0, 70.0, 4001, 32)?;
    let psi_td = FieldState::from_fn(1, td_grid.clone(), 0.0, gaussian_bump);
    let ev = evolve(&psi_td, &bg, &EvolutionConfig { snapshot_times: vec![0.0, 10.0, 20.0, 30.0, 40.0], ..Default::default() })?;
    let drift = ev.max_relative_drift();

    let gauss = Grid::uniform_gauss(-20.0, 40.0, 1201, 16)?;
    let psi_g = FieldState::from_fn(1, gauss, 0.0, gaussian_bump);
    let cfg = SynthesisConfig { max_panel_width: 0.15, ..Default::default() };
    let proj = project_all(&bg, &psi_g, &cfg)?;
    let syn = synthesize_times(&proj, &td_grid, &[20.0], false)?;
    let diff = syn[0].relative_l2_difference(&ev.snapshots[2], -10.0, 30.0)?;
    outcome(
        diff < 2e-2 && drift < 1e-3,
        format!("t=20 relative L2 difference on u in [-10, 30]: {diff:.2e}; energy drift over [0, 40]: {drift:.2e}"),
    )
}

fn criterion_7() -> Result<Outcome> {
    let bg = KerrBackground::new(1.0, 0.5, 1)?;
    // components in n = 1 and n = 3 (same parity, so orthogonality is not automatic)
    let grid = Grid::uniform_gauss(-20.0, 40.0, 1201, 16)?;
    let psi0 = FieldState::from_fn(1, grid, 0.0, |u, x| {
        let p = legendre::values(1, 3, x);
        let g = (-(u - 10.0f64).powi(2) / 4.5).exp();
        (C64::new((p[0] + 0.7 * p[2]) * g, 0.0), C64::new(0.0, 0.3 * p[2] * g))
    });
    let proj = project_all(&bg, &psi0, &SynthesisConfig { n_max: 3, ..Default::default() })?;
    let big = Grid::uniform_gauss(-40.0, 60.0, 2001, 16)?;
    let f = |w: f64| C64::new((-(w - 0.8f64).powi(2) / 0.1).exp(), 0.0);
    let g = |w: f64| C64::new((-(w - 1.0f64).powi(2) / 0.2).exp(), 0.0);
    let ip = |a: &FieldState, b: &FieldState| energy_inner_product(&bg, a, b);

    let f1 = functional_calculus(&proj, &big, &f, Some(1), true)?;
    let g1 = functional_calculus(&proj, &big, &g, Some(1), true)?;
    let g3 = functional_calculus(&proj, &big, &g, Some(3), true)?;
    let spectral = proj.spectral_form(|w| f(w).re * g(w).re, Some(1));
    let product = (ip(&f1, &g1)? - spectral).norm() / spectral.abs();
    let (d1, d3) = (ip(&f1, &f1)?.re, ip(&g3, &g3)?.re);
    let cross = ip(&f1, &g3)?.norm() / (d1 * d3).sqrt();
    outcome(
        product < 1e-6 && cross < 1e-6,
        format!("product law {product:.2e} relative to <Psi0, (fg)(H) Psi0>; n=1 vs n=3 orthogonality {cross:.2e} relative to the diagonal"),
    )
}

fn criterion_8() -> Result<Outcome> {
    let bg = KerrBackground::new(1.0, 0.9, 1)?;
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let (mut outside, mut inside) = (0usize, 0usize);
    let mut min_out = f64::INFINITY;
    for i in 0..200 {
        // geometric in r - r1, from 1e-3 to 10
        let r = bg.r1 + 1e-3 * 1e4f64.powf(i as f64 / 199.0);
        for j in 0..100 {
            let x = -1.0 + (2.0 * j as f64 + 1.0) / 100.0;
            if ergosphere_indicator(&bg, r, x) < 0.0 {
                inside += 1;
                continue;
            }
            outside += 1;
            for _ in 0..4 {
                let mut c = || C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
                let (p, dt, dr, dx) = (c(), c(), c(), c());
                let scale = p.norm_sqr() + dt.norm_sqr() + dr.norm_sqr() + dx.norm_sqr();
                min_out = min_out.min(energy_density(&bg, p, dt, dr, dx, r, x) / scale);
            }
        }
    }
    // equatorial point inside the ergosphere, static field with no gradient
    let (r, x) = (1.6, 0.0);
    let one = C64::new(1.0, 0.0);
    let zero = C64::new(0.0, 0.0);
    let e_in = energy_density(&bg, one, zero, zero, zero, r, x);
    outcome(
        min_out >= 0.0 && ergosphere_indicator(&bg, r, x) < 0.0 && e_in < 0.0,
        format!(
            "{outside} points outside the ergosphere ({inside} inside): min scaled density {min_out:.3e}; density {e_in:.4} at r=1.6, theta=pi/2"
        ),
    )
}

fn criterion_9() -> Result<Outcome> {
    let bg = KerrBackground::new(1.0, 0.9, 1)?;
    let grid = Grid::uniform(-50.0, 70.0, 4001, 32)?;
    let psi0 = FieldState::from_fn(1, grid, 0.0, gaussian_bump);
    let times: Vec<f64> = (0..=8).map(|i| 5.0 * i as f64).collect();
    let ev = evolve(&psi0, &bg, &EvolutionConfig { snapshot_times: times, ..Default::default() })?;
    let r_inner = 1.2 * bg.r1;
    let reports = ev.snapshots.iter().map(|s| energy_report(s, &bg, r_inner)).collect::<Result<Vec<_>>>()?;
    let sweep = summarize_sweep(reports, 2.0);
    let finite = sweep.reports.iter().all(|r| r.exterior_energy.is_finite());
    outcome(
        finite && sweep.growth_factor < 2.0 && !sweep.alert,
        format!(
            "R = 1.2 r1 = {r_inner:.4}: sup exterior energy {:.4e}, growth factor {:.4}, energy drift {:.1e}",
            sweep.sup_exterior,
            sweep.growth_factor,
            ev.max_relative_drift()
        ),
    )
}

fn criterion_10() -> Result<Outcome> {
    let bg = KerrBackground::new(1.0, 0.9, 1)?;
    let cfg = SuperradianceConfig::default();
    let ratio = carrier_transmission(&bg, &cfg)?.reflection();

    let mut psd = f64::INFINITY;
    let mut split = 0.0f64;
    let opts = RadialOptions::default();
    for i in 0..20 {
        let w = bg.omega0 * (i as f64 + 0.5) / 20.0;
        for (n, mode) in spheroidal_eigs(&bg, w, 3, 1e-12)?.iter().enumerate() {
            let sc = Scattering::solve(&RadialPotential::new(bg, w, mode.lambda), &[0.0], &opts)?;
            assert!(sc.transmission.superradiant(), "n={} omega={w}", n + 1);
            let um = u_matrix(&sc.transmission)?;
            let top = hermitian_eigenvalues(&um.u_plus)[1];
            psd = psd.min(hermitian_eigenvalues(&um.u_plus)[0] / top).min(hermitian_eigenvalues(&um.u_minus)[0] / top);
            for a in 0..2 {
                for b in 0..2 {
                    split = split.max((um.u_plus[a][b] - um.u_minus[a][b] - um.u[a][b]).norm() / top);
                }
            }
        }
    }

    let report = superradiance_experiment(&bg, &cfg)?;
    let norms: Vec<f64> = report.records.iter().map(|r| r.packet_norm).collect();
    let max = norms.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let min = norms.iter().copied().fold(f64::INFINITY, f64::min);
    let spread = (max - min) / max;
    let norms_text: Vec<String> = report.records.iter().map(|r| format!("L={}: {:.4}", r.l, r.packet_norm)).collect();
    let mark = |ok: bool| if ok { "ok" } else { "not met" };
    let (amplified, positive, stable) = (ratio > 1.0, psd >= -1e-12 && split < 1e-12, spread < 0.02);
    outcome(
        amplified && positive && stable,
        format!(
            "|alpha/beta|^2 = {ratio:.6} at omega~ = omega0/2 ({}); U+, U- min scaled eigenvalue {psd:.1e}, split residual {split:.1e} ({}); packet norms {}, spread {:.1}% ({})",
            mark(amplified),
            mark(positive),
            norms_text.join(", "),
            100.0 * spread,
            mark(stable)
        ),
    )
}

type Criterion = (u32, &'static str, fn() -> Result<Outcome>, Duration);

fn main() {
    let criteria: [Criterion; 10] = [
        (1, "flux identity", criterion_1, Duration::from_secs(120)),
        (2, "Wronskian constancy", criterion_2, Duration::from_secs(120)),
        (3, "Schwarzschild limit", criterion_3, Duration::from_secs(60)),
        (4, "angular coupling identity", criterion_4, Duration::from_secs(60)),
        (5, "propagator self-consistency", criterion_5, Duration::from_secs(600)),
        (6, "spectral vs time-domain cross-check", criterion_6, Duration::from_secs(900)),
        (7, "product law and orthogonality", criterion_7, Duration::from_secs(300)),
        (8, "ergosphere sign structure", criterion_8, Duration::from_secs(60)),
        (9, "exterior energy boundedness", criterion_9, Duration::from_secs(900)),
        (10, "superradiance experiment", criterion_10, Duration::from_secs(1200)),
    ];
    let selected: Vec<u32> = std::env::args().skip(1).filter_map(|a| a.parse().ok()).collect();
    let mut failed = 0;
    for (id, name, run, limit) in criteria {
        if !selected.is_empty() && !selected.contains(&id) {
            continue;
        }
        let start = Instant::now();
        let result = run();
        let elapsed = start.elapsed();
        let (pass, detail) = match result {
            Ok(o) => (o.pass && elapsed <= limit, o.detail),
            Err(e) => (false, format!("error: {e}")),
        };
        if !pass {
            failed += 1;
        }
        println!(
            "criterion {id:>2} {}: {name}: {detail} [{:.1} s, limit {} s]",
            if pass { "PASS" } else { "FAIL" },
            elapsed.as_secs_f64(),
            limit.as_secs()
        );
    }
    println!("acceptance: {failed} criteria failed");
    if failed > 0 {
        std::process::exit(1);
    }
}
