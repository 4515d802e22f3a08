//! Direct evolution of `i ∂_t Ψ = H Ψ` for one `k`-mode:
//! `H(Ψ¹, Ψ²) = (Ψ², AΨ¹ + βΨ²)`, `A = L/ρ`,
//! `L = -∂_u s ∂_u - (Δ/s) Δ_S - a²k²/s`, `β = -(2ak/ρ)(1 - Δ/s)`.
//!
//! Flux-form second-order differences; the discrete operator is symmetric in
//! the difference form of the energy inner product, so the semi-discrete
//! energy is exactly conserved and RK4 drift is the only loss.
//!
//! The angular part acts on `g = Φ/(1-x²)^{m/2}`, `m = |k|`:
//! `-Δ_S Φ = (1-x²)^{m/2} [-(1-x²)^{-m} (d/dx)((1-x²)^{m+1} g') + m(m+1) g]`.
//! `g` is smooth up to the poles, which keeps the stencil second order there.

use crate::energy::energy_inner_product;
use crate::error::{Error, Result};
use crate::field::{pole_weight, FieldState};
use crate::geometry::{KerrBackground, RadialProfile};
use num_complex::Complex64 as C64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

/// RK4 stability interval on the imaginary axis.
const RK4_IMAG_LIMIT: f64 = 2.8;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvolutionConfig {
    /// time step; `None` picks 80% of the stability limit
    pub dt: Option<f64>,
    pub snapshot_times: Vec<f64>,
    pub cfl_safety: f64,
    /// required distance from data support to each boundary, in units of `c_max · t_end`
    pub buffer_factor: f64,
    /// abort when the edge amplitude exceeds this fraction of the initial maximum
    pub boundary_tol: f64,
}

impl Default for EvolutionConfig {
    fn default() -> Self {
        Self { dt: None, snapshot_times: vec![], cfl_safety: 0.9, buffer_factor: 1.0, boundary_tol: 1e-6 }
    }
}

/// Precomputed stencil coefficients for a grid.
#[derive(Debug, Clone)]
pub struct Operator {
    nu: usize,
    nx: usize,
    inv_du2: f64,
    /// `s` at the `nu + 1` u-faces, ghost faces included
    s_face: Vec<f64>,
    dos: Vec<f64>,
    /// `(1 - x_f²)^{m+1} / (x_{j+1} - x_j)` for the `nx - 1` interior faces
    cx: Vec<f64>,
    /// `1 / (w_j (1 - x_j²)^{m/2})`
    inv_wx: Vec<f64>,
    /// `1 / (1 - x_j²)^{m/2}`
    inv_pole: Vec<f64>,
    pot: Vec<f64>,
    inv_rho: Vec<f64>,
    beta: Vec<f64>,
    /// maximum `√(s/ρ)`
    pub max_speed: f64,
}

impl Operator {
    pub fn new(bg: &KerrBackground, state: &FieldState) -> Result<Self> {
        let g = &state.grid;
        let du = g
            .uniform_du()
            .ok_or_else(|| Error::GridMismatch("time-domain operator needs a uniform u grid".into()))?;
        let (nu, nx) = (g.nu(), g.nx());
        let prof = RadialProfile::new(bg, &g.u)?;
        let mut s_face = Vec::with_capacity(nu + 1);
        for f in 0..=nu {
            let uf = g.u[0] + (f as f64 - 0.5) * du;
            s_face.push(bg.sigma(bg.inverse_r(uf)?));
        }
        let dos: Vec<f64> = (0..nu).map(|i| prof.delta[i] / prof.sigma[i]).collect();
        let x = &g.costheta;
        let m = state.k.unsigned_abs() as usize;
        let cx = (0..nx.saturating_sub(1))
            .map(|j| {
                let xf = 0.5 * (x[j] + x[j + 1]);
                (1.0 - xf * xf).powi(m as i32 + 1) / (x[j + 1] - x[j])
            })
            .collect();
        let inv_pole: Vec<f64> = x.iter().map(|&x| 1.0 / pole_weight(m, x)).collect();
        let inv_wx = g.costheta_weights.iter().zip(&inv_pole).map(|(w, ip)| ip / w).collect();
        let k = state.k as f64;
        let mm1 = (m * (m + 1)) as f64;
        let a2 = bg.spin * bg.spin;
        let mut pot = vec![0.0; g.len()];
        let mut inv_rho = vec![0.0; g.len()];
        let mut beta = vec![0.0; g.len()];
        let mut max_speed = 0.0f64;
        for i in 0..nu {
            let s = prof.sigma[i];
            for j in 0..nx {
                let idx = i * nx + j;
                let rho = prof.rho(bg, i, x[j]);
                pot[idx] = dos[i] * mm1 - a2 * k * k / s;
                inv_rho[idx] = 1.0 / rho;
                beta[idx] = -2.0 * bg.ak() / rho * (1.0 - dos[i]);
                max_speed = max_speed.max((s / rho).sqrt());
            }
        }
        Ok(Self { nu, nx, inv_du2: 1.0 / (du * du), s_face, dos, cx, inv_wx, inv_pole, pot, inv_rho, beta, max_speed })
    }

    /// `(HΨ)` for row `i` written into `out1`, `out2`.
    fn apply_row(&self, i: usize, p1: &[C64], p2: &[C64], out1: &mut [C64], out2: &mut [C64]) {
        let nx = self.nx;
        let zero = C64::new(0.0, 0.0);
        let (sl, sr) = (self.s_face[i], self.s_face[i + 1]);
        for j in 0..nx {
            let idx = i * nx + j;
            let c = p1[idx];
            let left = if i > 0 { p1[idx - nx] } else { zero };
            let right = if i + 1 < self.nu { p1[idx + nx] } else { zero };
            let mut l = -(sr * (right - c) - sl * (c - left)) * self.inv_du2;
            let gc = c * self.inv_pole[j];
            let mut ang = zero;
            if j + 1 < nx {
                ang += self.cx[j] * (p1[idx + 1] * self.inv_pole[j + 1] - gc);
            }
            if j > 0 {
                ang -= self.cx[j - 1] * (gc - p1[idx - 1] * self.inv_pole[j - 1]);
            }
            l -= self.dos[i] * ang * self.inv_wx[j];
            l += self.pot[idx] * c;
            out1[j] = p2[idx];
            out2[j] = l * self.inv_rho[idx] + self.beta[idx] * p2[idx];
        }
    }

    pub fn apply(&self, p1: &[C64], p2: &[C64], out1: &mut [C64], out2: &mut [C64]) {
        out1.par_chunks_mut(self.nx)
            .zip(out2.par_chunks_mut(self.nx))
            .enumerate()
            .for_each(|(i, (o1, o2))| self.apply_row(i, p1, p2, o1, o2));
    }

    /// Upper bound on the spectral radius of the discrete `H` (Gershgorin on `A`).
    pub fn spectral_bound(&self) -> f64 {
        let mut a_max = 0.0f64;
        let mut b_max = 0.0f64;
        for i in 0..self.nu {
            for j in 0..self.nx {
                let idx = i * self.nx + j;
                let mut row = 2.0 * (self.s_face[i] + self.s_face[i + 1]) * self.inv_du2;
                // row sum of M^{-1/2} K M^{-1/2} in the g variables, M_j = w_j (1-x_j²)^m
                let mass = |j: usize| 1.0 / (self.inv_wx[j] * self.inv_pole[j]);
                let mj = mass(j);
                let mut ang = 0.0;
                if j + 1 < self.nx {
                    ang += self.cx[j] * (1.0 / mj + 1.0 / (mj * mass(j + 1)).sqrt());
                }
                if j > 0 {
                    ang += self.cx[j - 1] * (1.0 / mj + 1.0 / (mj * mass(j - 1)).sqrt());
                }
                row += self.dos[i] * ang + self.pot[idx].abs();
                a_max = a_max.max(row * self.inv_rho[idx]);
                b_max = b_max.max(self.beta[idx].abs());
            }
        }
        a_max.sqrt() + b_max
    }

    pub fn stable_dt(&self, safety: f64) -> f64 {
        safety * RK4_IMAG_LIMIT / self.spectral_bound()
    }
}

pub fn apply_h(state: &FieldState, bg: &KerrBackground) -> Result<FieldState> {
    let op = Operator::new(bg, state)?;
    let mut out = FieldState::zeros(state.k, state.grid.clone(), state.time);
    op.apply(&state.psi1, &state.psi2, &mut out.psi1, &mut out.psi2);
    Ok(out)
}

#[derive(Debug, Clone)]
pub struct Evolution {
    pub snapshots: Vec<FieldState>,
    /// `(t, ⟨Ψ, Ψ⟩)` at each snapshot
    pub energies: Vec<(f64, f64)>,
    pub dt: f64,
    pub steps: usize,
}

impl Evolution {
    pub fn max_relative_drift(&self) -> f64 {
        let e0 = self.energies.first().map_or(0.0, |e| e.1);
        if e0 == 0.0 {
            return 0.0;
        }
        self.energies.iter().map(|e| ((e.1 - e0) / e0).abs()).fold(0.0, f64::max)
    }
}

fn edge_amplitude(state_p1: &[C64], nu: usize, nx: usize, band: usize) -> f64 {
    let mut m = 0.0f64;
    for i in (0..band.min(nu)).chain(nu.saturating_sub(band)..nu) {
        for j in 0..nx {
            m = m.max(state_p1[i * nx + j].norm());
        }
    }
    m
}

/// Classical RK4 in time; snapshots at `config.snapshot_times` (sorted, `≥ Ψ0.time`).
pub fn evolve(psi0: &FieldState, bg: &KerrBackground, config: &EvolutionConfig) -> Result<Evolution> {
    let op = Operator::new(bg, psi0)?;
    let limit = op.stable_dt(config.cfl_safety);
    let dt = config.dt.unwrap_or(0.8 * limit);
    if !(dt > 0.0) || dt > limit {
        return Err(Error::Cfl { dt, limit });
    }
    let mut times = config.snapshot_times.clone();
    times.sort_by(f64::total_cmp);
    if times.first().is_some_and(|&t| t < psi0.time) {
        return Err(Error::Config("snapshot times precede the initial time".into()));
    }
    let t_end = times.last().copied().unwrap_or(psi0.time);
    let g = &psi0.grid;
    let scale0 = psi0.max_abs();
    if scale0 > 0.0 {
        let (lo, hi) = psi0.support(1e-8).unwrap();
        let need = config.buffer_factor * op.max_speed * (t_end - psi0.time);
        let room = (lo - g.u[0]).min(g.u[g.nu() - 1] - hi);
        if room < need {
            return Err(Error::SupportAtBoundary(format!(
                "data support [{lo:.3}, {hi:.3}] leaves {room:.3} of buffer, need {need:.3}"
            )));
        }
    }

    let (nu, nx) = (g.nu(), g.nx());
    let n = g.len();
    let mut p1 = psi0.psi1.clone();
    let mut p2 = psi0.psi2.clone();
    let zero = C64::new(0.0, 0.0);
    let mut k1 = (vec![zero; n], vec![zero; n]);
    let mut k2 = (vec![zero; n], vec![zero; n]);
    let mut k3 = (vec![zero; n], vec![zero; n]);
    let mut k4 = (vec![zero; n], vec![zero; n]);
    let mut tmp = (vec![zero; n], vec![zero; n]);
    let mi = C64::new(0.0, -1.0);

    let mut t = psi0.time;
    let mut steps = 0;
    let mut snapshots = Vec::with_capacity(times.len());
    let mut energies = Vec::with_capacity(times.len());
    let band = 3;
    for &target in &times {
        let span = target - t;
        let m = if span > 0.0 { (span / dt).ceil() as usize } else { 0 };
        let h = if m > 0 { span / m as f64 } else { 0.0 };
        for _ in 0..m {
            // ∂_tΨ = -iHΨ
            op.apply(&p1, &p2, &mut k1.0, &mut k1.1);
            axpy_into(&mut tmp, &p1, &p2, &k1, mi * (0.5 * h));
            op.apply(&tmp.0, &tmp.1, &mut k2.0, &mut k2.1);
            axpy_into(&mut tmp, &p1, &p2, &k2, mi * (0.5 * h));
            op.apply(&tmp.0, &tmp.1, &mut k3.0, &mut k3.1);
            axpy_into(&mut tmp, &p1, &p2, &k3, mi * h);
            op.apply(&tmp.0, &tmp.1, &mut k4.0, &mut k4.1);
            let c = mi * (h / 6.0);
            let combine = |p: &mut [C64], a: &[C64], b: &[C64], cc: &[C64], d: &[C64]| {
                p.par_iter_mut().enumerate().for_each(|(i, v)| *v += c * (a[i] + 2.0 * b[i] + 2.0 * cc[i] + d[i]));
            };
            combine(&mut p1, &k1.0, &k2.0, &k3.0, &k4.0);
            combine(&mut p2, &k1.1, &k2.1, &k3.1, &k4.1);
            steps += 1;
        }
        t = target;
        if scale0 > 0.0 {
            let edge = edge_amplitude(&p1, nu, nx, band);
            if edge > config.boundary_tol * scale0 {
                return Err(Error::BoundaryTouch { t, amplitude: edge / scale0 });
            }
        }
        let snap = FieldState { k: psi0.k, grid: g.clone(), psi1: p1.clone(), psi2: p2.clone(), time: t, derivatives: None };
        let e = energy_inner_product(bg, &snap, &snap)?.re;
        log::debug!("t = {t:.3}: energy = {e:.12e}");
        energies.push((t, e));
        snapshots.push(snap);
    }
    Ok(Evolution { snapshots, energies, dt, steps })
}

fn axpy_into(out: &mut (Vec<C64>, Vec<C64>), p1: &[C64], p2: &[C64], k: &(Vec<C64>, Vec<C64>), c: C64) {
    out.0.par_iter_mut().enumerate().for_each(|(i, v)| *v = p1[i] + c * k.0[i]);
    out.1.par_iter_mut().enumerate().for_each(|(i, v)| *v = p2[i] + c * k.1[i]);
}
