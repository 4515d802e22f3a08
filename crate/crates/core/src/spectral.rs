//! Mode projection, ω-quadrature and propagator synthesis.
//!
//! For each angular mode `n` and frequency `ω` the data enter through
//! `c_b = ⟨Ψ_b, Ψ₀⟩ = ∫ φ_b D du` with
//! `D(u) = (ω/√s) ∫ Θ [(ωρ + 2ak(1 - Δ/s)) Φ₀ + ρ Ψ₀²] dx`,
//! which follows from `AΦ_b = (ω² - βω) Φ_b` for the mode vectors
//! `Ψ_b = (Θ φ_b/√s)(1, ω)`, `φ₁ = Re φ́`, `φ₂ = Im φ́`.
//!
//! The t-matrix sum is evaluated through the Green's kernel,
//! `Σ_ab t_ab φ_a(u) c_b = iΩ [G(u) P - conj(G(u)) Q]` with `G = φ́/w̃`,
//! `P = ∫ D φ̀`, `Q = ∫ D conj(φ̀)`, which stays accurate where `|β|` is large.

use crate::angular::{spheroidal_eigs, AngularMode};
use crate::energy::energy_inner_product;
use crate::error::{Error, Result};
use crate::field::{Derivatives, FieldState, Grid};
use crate::geometry::{KerrBackground, RadialProfile};
use crate::legendre;
use crate::quadrature::Rule;
use crate::radial::{jost_acute_with, RadialOptions, RadialPotential, Scattering, Transmission};
use num_complex::Complex64 as C64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SynthesisConfig {
    pub n_max: usize,
    /// frequency window `[-W, W]`
    pub window: f64,
    /// energy-splitting threshold
    pub j: f64,
    /// half-width of the geometrically refined region around `0` and `ω₀`
    pub exclusion_radius: f64,
    pub refine_levels: usize,
    pub refine_ratio: f64,
    pub panel_order: usize,
    pub max_panel_width: f64,
    pub angular_tol: f64,
    pub radial_tol: f64,
    pub far_factor: f64,
}

impl Default for SynthesisConfig {
    fn default() -> Self {
        Self {
            n_max: 6,
            window: 4.0,
            j: 1.0,
            exclusion_radius: 0.05,
            refine_levels: 3,
            refine_ratio: 0.25,
            panel_order: 8,
            max_panel_width: 0.25,
            angular_tol: 1e-12,
            radial_tol: 1e-10,
            far_factor: 30.0,
        }
    }
}

impl SynthesisConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n_max == 0 {
            return Err(Error::Config("n_max must be at least 1".into()));
        }
        if !(self.exclusion_radius > 0.0) {
            return Err(Error::Config("exclusion_radius must be positive".into()));
        }
        if !(self.j > 0.0) || self.window < 2.0 * self.j {
            return Err(Error::Config(format!("need J > 0 and W >= 2J (J = {}, W = {})", self.j, self.window)));
        }
        if !(self.refine_ratio > 0.0 && self.refine_ratio < 1.0) || self.panel_order == 0 {
            return Err(Error::Config("refine_ratio must lie in (0, 1) and panel_order >= 1".into()));
        }
        if !(self.max_panel_width > 0.0) || !(self.angular_tol > 0.0) || !(self.radial_tol > 0.0) {
            return Err(Error::Config("widths and tolerances must be positive".into()));
        }
        Ok(())
    }

    pub fn radial_options(&self) -> RadialOptions {
        RadialOptions { far_factor: self.far_factor, ..RadialOptions::from_tol(self.radial_tol) }
    }
}

/// Panel breakpoints on `[-W, W]`: the excluded points `0`, `ω₀` are panel
/// ends (never nodes), with geometric refinement towards them.
pub fn breakpoints(bg: &KerrBackground, cfg: &SynthesisConfig) -> Vec<f64> {
    let w = cfg.window;
    let mut pts = vec![-w, w];
    for p in [cfg.j, 2.0 * cfg.j] {
        pts.push(p);
        pts.push(-p);
    }
    let specials: Vec<f64> = if bg.omega0 == 0.0 { vec![0.0] } else { vec![0.0, bg.omega0] };
    let gap = if specials.len() == 2 { (specials[1] - specials[0]).abs() } else { f64::INFINITY };
    let radius = cfg.exclusion_radius.min(0.45 * gap);
    for &p in &specials {
        pts.push(p);
        let mut d = radius;
        for _ in 0..=cfg.refine_levels {
            pts.push(p - d);
            pts.push(p + d);
            d *= cfg.refine_ratio;
        }
    }
    pts.retain(|p| p.abs() <= w);
    pts.sort_by(f64::total_cmp);
    pts.dedup_by(|a, b| (*a - *b).abs() < 1e-14);
    let mut out = vec![pts[0]];
    for pair in pts.windows(2) {
        let m = ((pair[1] - pair[0]) / cfg.max_panel_width).ceil().max(1.0) as usize;
        for i in 1..=m {
            out.push(pair[0] + (pair[1] - pair[0]) * i as f64 / m as f64);
        }
    }
    out
}

pub fn omega_rule(bg: &KerrBackground, cfg: &SynthesisConfig) -> Rule {
    Rule::composite(&breakpoints(bg, cfg), cfg.panel_order)
}

/// Smooth step: 1 on `[-J, J]`, 0 outside `[-2J, 2J]`, C² in between.
pub fn chi_low(omega: f64, j: f64) -> f64 {
    let tau = (omega.abs() - j) / j;
    if tau <= 0.0 {
        1.0
    } else if tau >= 1.0 {
        0.0
    } else {
        1.0 - tau * tau * tau * (10.0 - 15.0 * tau + 6.0 * tau * tau)
    }
}

pub fn chi_high(omega: f64, j: f64) -> f64 {
    1.0 - chi_low(omega, j)
}

/// Data-side moments of one `(n, ω)` sample.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Moments {
    /// `c_b = ⟨Ψ_b, Ψ₀⟩`
    pub c: [C64; 2],
    /// `∫ D φ̀`
    pub p: C64,
    /// `∫ D conj φ̀`
    pub q: C64,
    /// `∫ conj(D) G`
    pub a1: C64,
    /// `∫ conj(D) conj(G)`
    pub a2: C64,
}

impl Moments {
    /// `Σ_ab t_ab conj(c_a) c_b / (ωΩ)`, the spectral density of `⟨Ψ₀, ·Ψ₀⟩`.
    pub fn density(&self, omega: f64) -> f64 {
        (C64::new(0.0, 1.0) * (self.a1 * self.p - self.a2 * self.q) / omega).re
    }

    /// Same density from the t-matrix form (loses accuracy where `|β|` is large).
    pub fn density_tmatrix(&self, tr: &Transmission) -> f64 {
        let mut s = C64::new(0.0, 0.0);
        for a in 0..2 {
            for b in 0..2 {
                s += tr.t[a][b] * self.c[a].conj() * self.c[b];
            }
        }
        s.re / (tr.omega * tr.big_omega)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModeProjection {
    pub n: usize,
    pub omega_grid: Vec<f64>,
    pub weights: Vec<f64>,
    pub modes: Vec<AngularMode>,
    pub scattering: Vec<Transmission>,
    pub moments: Vec<Moments>,
}

impl ModeProjection {
    pub fn coeffs(&self) -> Vec<[C64; 2]> {
        self.moments.iter().map(|m| m.c).collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Projections {
    pub bg: KerrBackground,
    pub config: SynthesisConfig,
    pub modes: Vec<ModeProjection>,
}

/// Rows of the data grid that carry data, as `(first, last)` inclusive.
fn data_rows(psi0: &FieldState) -> Option<(usize, usize)> {
    let cut = 1e-14 * psi0.max_abs();
    if cut == 0.0 {
        return None;
    }
    let nx = psi0.grid.nx();
    let hit = |iu: usize| (0..nx).any(|ix| psi0.psi1[iu * nx + ix].norm() > cut || psi0.psi2[iu * nx + ix].norm() > cut);
    let first = (0..psi0.grid.nu()).find(|&i| hit(i))?;
    let last = (0..psi0.grid.nu()).rev().find(|&i| hit(i))?;
    Some((first, last))
}

struct DataView<'a> {
    psi0: &'a FieldState,
    rows: (usize, usize),
    u: Vec<f64>,
    wu: Vec<f64>,
    prof: RadialProfile,
}

impl<'a> DataView<'a> {
    fn new(bg: &KerrBackground, psi0: &'a FieldState) -> Result<Option<Self>> {
        let Some(rows) = data_rows(psi0) else { return Ok(None) };
        let nu = psi0.grid.nu();
        if rows.0 == 0 || rows.1 + 1 == nu {
            return Err(Error::SupportAtBoundary("initial data reach the edge of the u grid".into()));
        }
        let u = psi0.grid.u[rows.0..=rows.1].to_vec();
        let wu = psi0.grid.u_weights()[rows.0..=rows.1].to_vec();
        let prof = RadialProfile::new(bg, &u)?;
        Ok(Some(Self { psi0, rows, u, wu, prof }))
    }

    /// `D(u)` on the data rows for one angular mode.
    fn d_profile(&self, bg: &KerrBackground, mode: &AngularMode) -> Vec<C64> {
        let g = &self.psi0.grid;
        let theta: Vec<f64> = g.costheta.iter().map(|&x| mode.eval(x)).collect();
        let omega = mode.omega;
        (0..self.u.len())
            .map(|k| {
                let iu = self.rows.0 + k;
                let s = self.prof.sigma[k];
                let shift = 2.0 * bg.ak() * (1.0 - self.prof.delta[k] / s);
                let mut acc = C64::new(0.0, 0.0);
                for (ix, &x) in g.costheta.iter().enumerate() {
                    let i = g.index(iu, ix);
                    let rho = self.prof.rho(bg, k, x);
                    acc += g.costheta_weights[ix]
                        * theta[ix]
                        * ((omega * rho + shift) * self.psi0.psi1[i] + rho * self.psi0.psi2[i]);
                }
                acc * omega / s.sqrt()
            })
            .collect()
    }
}

fn moments_for(bg: &KerrBackground, view: &DataView, mode: &AngularMode, opts: &RadialOptions) -> Result<(Transmission, Moments)> {
    let pot = RadialPotential::new(*bg, mode.omega, mode.lambda);
    let d = view.d_profile(bg, mode);
    let sc = Scattering::solve(&pot, &view.u, opts)?;
    let wt = sc.transmission.resolvent_wronskian();
    let zero = C64::new(0.0, 0.0);
    let mut m = Moments { c: [zero; 2], p: zero, q: zero, a1: zero, a2: zero };
    for (k, dk) in d.iter().enumerate() {
        let w = view.wu[k];
        let f = sc.acute.value(k);
        let g = sc.grave.value(k);
        let green = f / wt;
        m.c[0] += w * f.re * dk;
        m.c[1] += w * f.im * dk;
        m.p += w * dk * g;
        m.q += w * dk * g.conj();
        m.a1 += w * dk.conj() * green;
        m.a2 += w * dk.conj() * green.conj();
    }
    Ok((sc.transmission, m))
}

/// `(c₁, c₂) = (⟨Ψ₁^{ωn}, Ψ₀⟩, ⟨Ψ₂^{ωn}, Ψ₀⟩)` for a single mode and frequency.
pub fn project(bg: &KerrBackground, psi0: &FieldState, n: usize, omega: f64, cfg: &SynthesisConfig) -> Result<(C64, C64)> {
    let modes = spheroidal_eigs(bg, omega, n, cfg.angular_tol)?;
    let mode = &modes[n - 1];
    let Some(view) = DataView::new(bg, psi0)? else {
        return Ok((C64::new(0.0, 0.0), C64::new(0.0, 0.0)));
    };
    let (_, m) = moments_for(bg, &view, mode, &cfg.radial_options())?;
    Ok((m.c[0], m.c[1]))
}

/// Projects `Ψ₀` onto modes `n = 1..=n_max` at every node of the ω rule.
pub fn project_all(bg: &KerrBackground, psi0: &FieldState, cfg: &SynthesisConfig) -> Result<Projections> {
    cfg.validate()?;
    if psi0.k != bg.k {
        return Err(Error::GridMismatch(format!("data k = {} but background k = {}", psi0.k, bg.k)));
    }
    let rule = omega_rule(bg, cfg);
    project_on_rule(bg, psi0, cfg, &rule)
}

pub fn project_on_rule(bg: &KerrBackground, psi0: &FieldState, cfg: &SynthesisConfig, rule: &Rule) -> Result<Projections> {
    let view = DataView::new(bg, psi0)?;
    let opts = cfg.radial_options();
    let per_node: Vec<Result<Vec<(AngularMode, Transmission, Moments)>>> = rule
        .nodes
        .par_iter()
        .map(|&omega| {
            let modes = spheroidal_eigs(bg, omega, cfg.n_max, cfg.angular_tol)?;
            modes
                .into_iter()
                .map(|mode| {
                    let (tr, m) = match &view {
                        Some(v) => moments_for(bg, v, &mode, &opts)?,
                        None => {
                            let pot = RadialPotential::new(*bg, omega, mode.lambda);
                            let tr = crate::radial::transmission_with(&pot, &opts)?;
                            let z = C64::new(0.0, 0.0);
                            (tr, Moments { c: [z; 2], p: z, q: z, a1: z, a2: z })
                        }
                    };
                    Ok((mode, tr, m))
                })
                .collect()
        })
        .collect();
    let mut modes: Vec<ModeProjection> = (1..=cfg.n_max)
        .map(|n| ModeProjection {
            n,
            omega_grid: rule.nodes.clone(),
            weights: rule.weights.clone(),
            modes: Vec::with_capacity(rule.len()),
            scattering: Vec::with_capacity(rule.len()),
            moments: Vec::with_capacity(rule.len()),
        })
        .collect();
    for node in per_node {
        for (n, (mode, tr, m)) in node?.into_iter().enumerate() {
            modes[n].modes.push(mode);
            modes[n].scattering.push(tr);
            modes[n].moments.push(m);
        }
    }
    Ok(Projections { bg: *bg, config: cfg.clone(), modes })
}

impl Projections {
    /// `⟨Ψ₀, F(H)_n Ψ₀⟩` summed over the selected modes, from the mode data alone.
    pub fn spectral_form(&self, f: impl Fn(f64) -> f64, only: Option<usize>) -> f64 {
        let mut total = 0.0;
        for mp in &self.modes {
            if only.is_some_and(|n| n != mp.n) {
                continue;
            }
            for i in 0..mp.omega_grid.len() {
                let w = mp.omega_grid[i];
                total += mp.weights[i] * f(w) * mp.moments[i].density(w);
            }
        }
        total / (2.0 * PI)
    }

    /// Threshold `J` such that 95% of `Σ ∫ |c|² dω` lies in `[-2J, 2J]`.
    pub fn suggest_threshold(&self) -> f64 {
        let mut mass: Vec<(f64, f64)> = Vec::new();
        for mp in &self.modes {
            for i in 0..mp.omega_grid.len() {
                let c = mp.moments[i].c;
                mass.push((mp.omega_grid[i].abs(), mp.weights[i] * (c[0].norm_sqr() + c[1].norm_sqr())));
            }
        }
        mass.sort_by(|a, b| a.0.total_cmp(&b.0));
        let total: f64 = mass.iter().map(|m| m.1).sum();
        let mut acc = 0.0;
        for (w, m) in mass {
            acc += m;
            if acc >= 0.95 * total {
                return 0.5 * w;
            }
        }
        0.5 * self.config.window
    }
}

/// Which modes and which spectral multipliers to synthesise.
pub struct SynthesisRequest<'a> {
    pub modes: Option<usize>,
    pub multipliers: Vec<&'a (dyn Fn(f64) -> C64 + Sync)>,
    pub with_derivatives: bool,
}

/// `Σ_n (1/2π) ∫ F(ω)/(ωΩ) Σ_ab t_ab Ψ_a c_b dω` on `grid`, one state per multiplier `F`.
///
/// Accumulation runs over Legendre coefficients in a fixed node order, so the
/// result does not depend on the thread count.
pub fn synthesize_request(proj: &Projections, grid: &Grid, req: &SynthesisRequest, time: f64) -> Result<Vec<FieldState>> {
    let bg = &proj.bg;
    let k = bg.k;
    let nu = grid.nu();
    let nf = req.multipliers.len();
    let lmax = proj.modes.iter().flat_map(|m| m.modes.iter().map(|a| a.coeffs.len())).max().unwrap_or(0);
    let zero = C64::new(0.0, 0.0);
    // [multiplier][l][u]
    let mut f1 = vec![vec![vec![zero; nu]; lmax]; nf];
    let mut f2 = vec![vec![vec![zero; nu]; lmax]; nf];
    let mut fd = vec![vec![vec![zero; nu]; lmax]; if req.with_derivatives { nf } else { 0 }];
    let prof = RadialProfile::new(bg, &grid.u)?;
    let opts = proj.config.radial_options();

    let mut jobs: Vec<(usize, usize)> = Vec::new();
    for (mi, mp) in proj.modes.iter().enumerate() {
        if req.modes.is_some_and(|n| n != mp.n) {
            continue;
        }
        for i in 0..mp.omega_grid.len() {
            let m = &mp.moments[i];
            if m.p == zero && m.q == zero {
                continue;
            }
            jobs.push((mi, i));
        }
    }
    const BATCH: usize = 64;
    for batch in jobs.chunks(BATCH) {
        // radial profiles R(u), R'(u) without the multiplier
        let radial: Vec<Result<(Vec<C64>, Vec<C64>)>> = batch
            .par_iter()
            .map(|&(mi, i)| {
                let mp = &proj.modes[mi];
                let omega = mp.omega_grid[i];
                let tr = &mp.scattering[i];
                let m = &mp.moments[i];
                let pot = RadialPotential::new(*bg, omega, mp.modes[i].lambda);
                let jost = jost_acute_with(&pot, &grid.u, &opts)?;
                let wt = tr.resolvent_wronskian();
                let pre = C64::new(0.0, mp.weights[i] / (2.0 * PI * omega));
                let mut r = Vec::with_capacity(nu);
                let mut dr = Vec::with_capacity(nu);
                for iu in 0..nu {
                    let g = jost.value(iu) / wt;
                    let dg = jost.derivative(iu) / wt;
                    let s = prof.sigma[iu];
                    let inv = 1.0 / s.sqrt();
                    let val = pre * (g * m.p - g.conj() * m.q) * inv;
                    let dval = pre * (dg * m.p - dg.conj() * m.q) * inv - val * (prof.r[iu] * prof.delta[iu] / (s * s));
                    r.push(val);
                    dr.push(dval);
                }
                Ok((r, dr))
            })
            .collect();
        let radial: Vec<(Vec<C64>, Vec<C64>)> = radial.into_iter().collect::<Result<_>>()?;
        let factors: Vec<Vec<C64>> = batch
            .iter()
            .map(|&(mi, i)| req.multipliers.iter().map(|f| f(proj.modes[mi].omega_grid[i])).collect())
            .collect();
        let accumulate = |fi: usize, l: usize, row1: &mut [C64], row2: Option<&mut [C64]>, deriv: bool| {
            let mut row2 = row2;
            for (b, &(mi, i)) in batch.iter().enumerate() {
                let mode = &proj.modes[mi].modes[i];
                let Some(&c) = mode.coeffs.get(l) else { continue };
                if c == 0.0 {
                    continue;
                }
                let amp = factors[b][fi] * c;
                let src = if deriv { &radial[b].1 } else { &radial[b].0 };
                for (v, s) in row1.iter_mut().zip(src) {
                    *v += amp * s;
                }
                if let Some(r2) = row2.as_deref_mut() {
                    let amp2 = amp * mode.omega;
                    for (v, s) in r2.iter_mut().zip(&radial[b].0) {
                        *v += amp2 * s;
                    }
                }
            }
        };
        for fi in 0..nf {
            f1[fi]
                .par_iter_mut()
                .zip(f2[fi].par_iter_mut())
                .enumerate()
                .for_each(|(l, (r1, r2))| accumulate(fi, l, r1, Some(r2), false));
            if req.with_derivatives {
                fd[fi].par_iter_mut().enumerate().for_each(|(l, r)| accumulate(fi, l, r, None, true));
            }
        }
    }

    let m = k.unsigned_abs() as usize;
    let nx = grid.nx();
    let basis: Vec<(Vec<f64>, Vec<f64>)> =
        grid.costheta.iter().map(|&x| legendre::values_and_derivatives(m, lmax, x)).collect();
    let mut out = Vec::with_capacity(nf);
    for fi in 0..nf {
        let mut st = FieldState::zeros(k, grid.clone(), time);
        let mut du = vec![zero; if req.with_derivatives { grid.len() } else { 0 }];
        let mut dx = vec![zero; if req.with_derivatives { grid.len() } else { 0 }];
        for iu in 0..nu {
            for ix in 0..nx {
                let idx = iu * nx + ix;
                let (p, dp) = &basis[ix];
                let mut a = zero;
                let mut b = zero;
                for l in 0..lmax {
                    a += f1[fi][l][iu] * p[l];
                    b += f2[fi][l][iu] * p[l];
                }
                st.psi1[idx] = a;
                st.psi2[idx] = b;
                if req.with_derivatives {
                    let mut cu = zero;
                    let mut cx = zero;
                    for l in 0..lmax {
                        cu += fd[fi][l][iu] * p[l];
                        cx += f1[fi][l][iu] * dp[l];
                    }
                    du[idx] = cu;
                    dx[idx] = cx;
                }
            }
        }
        if req.with_derivatives {
            st.derivatives = Some(Derivatives { d_u: du, d_costheta: dx });
        }
        out.push(st);
    }
    Ok(out)
}

/// `Ψ_N(t)` for each requested time.
pub fn synthesize_times(proj: &Projections, grid: &Grid, times: &[f64], with_derivatives: bool) -> Result<Vec<FieldState>> {
    let kernels: Vec<Box<dyn Fn(f64) -> C64 + Sync>> =
        times.iter().map(|&t| Box::new(move |w: f64| C64::from_polar(1.0, -w * t)) as Box<dyn Fn(f64) -> C64 + Sync>).collect();
    let req = SynthesisRequest { modes: None, multipliers: kernels.iter().map(|b| b.as_ref()).collect(), with_derivatives };
    let mut states = synthesize_request(proj, grid, &req, 0.0)?;
    for (s, &t) in states.iter_mut().zip(times) {
        s.time = t;
    }
    Ok(states)
}

pub fn synthesize(proj: &Projections, grid: &Grid, t: f64) -> Result<FieldState> {
    Ok(synthesize_times(proj, grid, &[t], false)?.remove(0))
}

/// `f(H)_n Ψ₀` (single mode) or the sum over all modes when `n` is `None`.
pub fn functional_calculus(
    proj: &Projections,
    grid: &Grid,
    f: &(dyn Fn(f64) -> C64 + Sync),
    n: Option<usize>,
    with_derivatives: bool,
) -> Result<FieldState> {
    let req = SynthesisRequest { modes: n, multipliers: vec![f], with_derivatives };
    Ok(synthesize_request(proj, grid, &req, 0.0)?.remove(0))
}

#[derive(Debug, Clone)]
pub struct EnergySplit {
    pub low: FieldState,
    pub high: FieldState,
    /// `E<_N = ⟨Ψ<, Ψ<⟩ + 2 Re⟨Ψ<, Ψ>⟩`, from the spectral weight `χ<(χ< + 2χ>)`
    pub e_low: f64,
    /// `⟨Ψ_N, Ψ_N⟩` from the spectral density
    pub total: f64,
}

pub fn energy_split(proj: &Projections, grid: &Grid) -> Result<EnergySplit> {
    let j = proj.config.j;
    let lo = move |w: f64| C64::new(chi_low(w, j), 0.0);
    let hi = move |w: f64| C64::new(chi_high(w, j), 0.0);
    let req = SynthesisRequest { modes: None, multipliers: vec![&lo, &hi], with_derivatives: true };
    let mut states = synthesize_request(proj, grid, &req, 0.0)?;
    let high = states.pop().unwrap();
    let low = states.pop().unwrap();
    let e_low = proj.spectral_form(|w| chi_low(w, j) * (chi_low(w, j) + 2.0 * chi_high(w, j)), None);
    let total = proj.spectral_form(|_| 1.0, None);
    Ok(EnergySplit { low, high, e_low, total })
}

/// Energy of a synthesized state on its grid (exact derivatives when available).
pub fn state_energy(bg: &KerrBackground, s: &FieldState) -> Result<f64> {
    Ok(energy_inner_product(bg, s, s)?.re)
}
