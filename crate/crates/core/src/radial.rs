//! Radial problem in Schrödinger form `-φ'' + V φ = 0` (prime = d/du):
//! potential, Jost solutions, transmission coefficients and the Green's kernel.
//!
//! Wronskian convention: `w(f, g) = f g' - f' g`.

use crate::error::{Error, Result};
use crate::geometry::KerrBackground;
use crate::ode::{Dopri5, System};
use crate::quadrature::gauss_legendre;
use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

/// Hard floor on `|ω|` and `|Ω|`.
pub const FREQUENCY_FLOOR: f64 = 1e-8;
const RESCALE_THRESHOLD: f64 = 1e100;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RadialPotential {
    pub bg: KerrBackground,
    pub omega: f64,
    pub lambda: f64,
}

impl RadialPotential {
    pub fn new(bg: KerrBackground, omega: f64, lambda: f64) -> Self {
        Self { bg, omega, lambda }
    }

    pub fn big_omega(&self) -> f64 {
        self.bg.big_omega(self.omega)
    }

    /// `λΔ/s² + s^{-1/2} ∂_u² √s` at horizon offset `x`, `s = r² + a²`.
    fn static_part(&self, x: f64) -> f64 {
        let bg = &self.bg;
        let r = bg.r1 + x;
        let s = bg.sigma(r);
        let delta = bg.delta_from_offset(x);
        let ddelta = 2.0 * (r - bg.mass);
        let curvature = delta / (s * s * s) * (ddelta * r + delta - 3.0 * delta * r * r / s);
        self.lambda * delta / (s * s) + curvature
    }

    /// `V` at horizon offset `x`.
    pub fn v_offset(&self, x: f64) -> f64 {
        let s = self.bg.sigma(self.bg.r1 + x);
        let shifted = self.omega + self.bg.ak() / s;
        -shifted * shifted + self.static_part(x)
    }

    /// `V + Ω²`, free of cancellation near the horizon.
    pub fn horizon_excess(&self, x: f64) -> f64 {
        let bg = &self.bg;
        let s = bg.sigma(bg.r1 + x);
        let s1 = bg.sigma(bg.r1);
        let q = bg.ak() * x * (2.0 * bg.r1 + x) / (s * s1);
        2.0 * self.big_omega() * q - q * q + self.static_part(x)
    }

    /// `V + ω²`, free of cancellation at large `u`.
    pub fn far_excess(&self, x: f64) -> f64 {
        let s = self.bg.sigma(self.bg.r1 + x);
        let q = self.bg.ak() / s;
        -2.0 * self.omega * q - q * q + self.static_part(x)
    }

    pub fn potential(&self, u: f64) -> Result<f64> {
        Ok(self.v_offset(self.bg.horizon_offset(u)?))
    }

    fn check_frequency(&self) -> Result<()> {
        if !self.omega.is_finite() || !self.lambda.is_finite() {
            return Err(Error::Domain("non-finite frequency or eigenvalue".into()));
        }
        if self.omega.abs() < FREQUENCY_FLOOR || self.big_omega().abs() < FREQUENCY_FLOOR {
            return Err(Error::ExcludedFrequency(format!(
                "omega = {:e}, Omega = {:e} below floor {FREQUENCY_FLOOR:e}",
                self.omega,
                self.big_omega()
            )));
        }
        Ok(())
    }

    fn error_scale(&self) -> f64 {
        self.omega.abs().max(self.big_omega().abs()).max(0.1)
    }
}

pub fn potential_v(pot: &RadialPotential, u: f64) -> Result<f64> {
    pot.potential(u)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Side {
    /// `φ́ → e^{iΩu}` as `u → -∞`
    Horizon,
    /// `φ̀ → e^{-iωu}` as `u → +∞`
    Infinity,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RadialOptions {
    /// anchor tolerance on the neglected potential tail
    pub anchor_tol: f64,
    pub rtol: f64,
    /// far anchor at `far_factor (|λ| + 1 + |2akω|) / |ω|`
    pub far_factor: f64,
    pub far_cap: f64,
}

impl RadialOptions {
    pub fn from_tol(tol: f64) -> Self {
        Self { anchor_tol: tol, rtol: (0.1 * tol).clamp(1e-13, 1e-8), far_factor: 30.0, far_cap: 1e7 }
    }
}

impl Default for RadialOptions {
    fn default() -> Self {
        Self::from_tol(1e-10)
    }
}

/// A Jost solution sampled on a grid. Stored values are scaled: the true
/// solution is `phi[i] * exp(log_scale[i])`.
#[derive(Debug, Clone)]
pub struct JostSolution {
    pub side: Side,
    pub grid: Vec<f64>,
    pub phi: Vec<C64>,
    pub dphi: Vec<C64>,
    pub log_scale: Vec<f64>,
    pub anchor_u: f64,
    /// `Ω` for the horizon side, `ω` for the infinity side
    pub boundary_frequency: f64,
    /// size estimate of the neglected boundary terms
    pub boundary_residual: f64,
    /// set when the far anchor was clipped to the cap
    pub capped: bool,
}

impl JostSolution {
    pub fn value(&self, i: usize) -> C64 {
        self.phi[i] * self.log_scale[i].exp()
    }

    pub fn derivative(&self, i: usize) -> C64 {
        self.dphi[i] * self.log_scale[i].exp()
    }

    pub fn len(&self) -> usize {
        self.grid.len()
    }

    pub fn is_empty(&self) -> bool {
        self.grid.is_empty()
    }

    /// Wronskian with another solution at grid index `i` (grids must coincide).
    pub fn wronskian_with(&self, other: &JostSolution, i: usize) -> C64 {
        let w = self.phi[i] * other.dphi[i] - self.dphi[i] * other.phi[i];
        w * (self.log_scale[i] + other.log_scale[i]).exp()
    }

    /// `w(self, conj self)`.
    pub fn self_wronskian(&self, i: usize) -> C64 {
        let w = self.phi[i] * self.dphi[i].conj() - self.dphi[i] * self.phi[i].conj();
        w * (2.0 * self.log_scale[i]).exp()
    }
}

pub fn wronskian(f: C64, df: C64, g: C64, dg: C64) -> C64 {
    f * dg - df * g
}

struct RadialSystem<'a> {
    pot: &'a RadialPotential,
    rtol: f64,
    ksc: f64,
}

impl System<5> for RadialSystem<'_> {
    fn rhs(&self, _u: f64, y: &[f64; 5]) -> [f64; 5] {
        let bg = &self.pot.bg;
        let x = y[0].max(f64::MIN_POSITIVE);
        let dx = bg.delta_from_offset(x) / bg.sigma(bg.r1 + x);
        let v = self.pot.v_offset(x);
        [dx, y[3], y[4], v * y[1], v * y[2]]
    }

    fn weights(&self, y: &[f64; 5]) -> [f64; 5] {
        let phi = y[1].hypot(y[2]);
        let dphi = y[3].hypot(y[4]);
        let sc = self.rtol * (phi + dphi / self.ksc) + 1e-300;
        [self.rtol * y[0].abs() + 1e-300, sc, sc, self.ksc * sc, self.ksc * sc]
    }
}

/// Integrates from `(u0, phi0, dphi0)` through `targets` (monotone in the
/// direction of travel), recording scaled values at each target.
fn integrate_through(
    pot: &RadialPotential,
    opts: &RadialOptions,
    u0: f64,
    phi0: C64,
    dphi0: C64,
    targets: &[f64],
) -> Result<(Vec<C64>, Vec<C64>, Vec<f64>)> {
    let sys = RadialSystem { pot, rtol: opts.rtol, ksc: pot.error_scale() };
    let bg = &pot.bg;
    let mut stepper = Dopri5::<5>::new(0.05 / sys.ksc, 50.0);
    stepper.min_step = 1e-14;
    let mut u = u0;
    let mut y = [bg.horizon_offset(u0)?, phi0.re, phi0.im, dphi0.re, dphi0.im];
    let mut log_scale = 0.0;
    let mut phis = Vec::with_capacity(targets.len());
    let mut dphis = Vec::with_capacity(targets.len());
    let mut scales = Vec::with_capacity(targets.len());
    for &target in targets {
        stepper.advance(&sys, &mut u, &mut y, target)?;
        y[0] = bg.horizon_offset(target)?;
        stepper.reset();
        let mag = y[1].hypot(y[2]);
        if mag > RESCALE_THRESHOLD {
            for v in &mut y[1..] {
                *v /= mag;
            }
            log_scale += mag.ln();
        }
        phis.push(C64::new(y[1], y[2]));
        dphis.push(C64::new(y[3], y[4]));
        scales.push(log_scale);
    }
    Ok((phis, dphis, scales))
}

fn check_grid(u_grid: &[f64]) -> Result<()> {
    if u_grid.is_empty() {
        return Err(Error::GridMismatch("empty u grid".into()));
    }
    if u_grid.iter().any(|u| !u.is_finite()) || u_grid.windows(2).any(|p| p[1] <= p[0]) {
        return Err(Error::GridMismatch("u grid must be finite and strictly increasing".into()));
    }
    Ok(())
}

/// Left anchor: first point (scanning left) where the neglected tail
/// `|V + Ω²|` drops below `tol · max(Ω², tol)`.
pub fn horizon_anchor(pot: &RadialPotential, u_lo: f64, tol: f64) -> Result<f64> {
    let om = pot.big_omega();
    let threshold = tol * (om * om).max(tol);
    let mut u = u_lo.min(-10.0);
    loop {
        let g = pot.horizon_excess(pot.bg.horizon_offset(u)?);
        if g.abs() < threshold {
            return Ok(u);
        }
        u -= 5.0;
        if u < -1e5 {
            return Err(Error::NoConvergence(format!("horizon anchor not found above u = {u}")));
        }
    }
}

pub fn jost_acute(pot: &RadialPotential, u_grid: &[f64], tol: f64) -> Result<JostSolution> {
    jost_acute_with(pot, u_grid, &RadialOptions::from_tol(tol))
}

pub fn jost_acute_with(pot: &RadialPotential, u_grid: &[f64], opts: &RadialOptions) -> Result<JostSolution> {
    pot.check_frequency()?;
    check_grid(u_grid)?;
    let bg = &pot.bg;
    let om = pot.big_omega();
    let u_a = horizon_anchor(pot, u_grid[0], opts.anchor_tol)?;
    // plane wave plus the first-order correction from the exponential tail of V + Ω²
    let g = pot.horizon_excess(bg.horizon_offset(u_a)?);
    let kappa = bg.horizon_rate();
    let eps = C64::new(g, 0.0) / (kappa * C64::new(kappa, 2.0 * om));
    let plane = C64::from_polar(1.0, om * u_a);
    let phi0 = plane * (1.0 + eps);
    let dphi0 = plane * (C64::new(0.0, om) * (1.0 + eps) + kappa * eps);
    let (phi, dphi, log_scale) = integrate_through(pot, opts, u_a, phi0, dphi0, u_grid)?;
    Ok(JostSolution {
        side: Side::Horizon,
        grid: u_grid.to_vec(),
        phi,
        dphi,
        log_scale,
        anchor_u: u_a,
        boundary_frequency: om,
        boundary_residual: eps.norm_sqr(),
        capped: false,
    })
}

/// Right anchor position and whether it hit the cap.
pub fn far_anchor(pot: &RadialPotential, u_hi: f64, opts: &RadialOptions) -> (f64, bool) {
    let scale = pot.lambda.abs() + 1.0 + (2.0 * pot.bg.ak() * pot.omega).abs();
    let want = (opts.far_factor * scale / pot.omega.abs()).max(u_hi).max(100.0);
    if want > opts.far_cap {
        (opts.far_cap.max(u_hi), true)
    } else {
        (want, false)
    }
}

/// Boundary data for `φ̀` at `u_f` from the first WKB correction of the
/// tail `W = V + ω²`; the amplitude is fixed by `w(φ̀, conj φ̀) = 2iω`.
fn far_boundary(pot: &RadialPotential, u_f: f64) -> Result<(C64, C64, f64)> {
    let bg = &pot.bg;
    let w_at = |u: f64| -> Result<f64> { Ok(pot.far_excess(bg.horizon_offset(u)?)) };
    // ∫_{u_f}^∞ W du with u = u_f / t
    let (x, wts) = gauss_legendre(24);
    let mut integral = 0.0;
    for (a, b) in [(0.0, 0.5), (0.5, 1.0)] {
        for (xi, wi) in x.iter().zip(&wts) {
            let t = 0.5 * (a + b) + 0.5 * (b - a) * xi;
            let u = u_f / t;
            integral += 0.5 * (b - a) * wi * w_at(u)? * u_f / (t * t);
        }
    }
    let omega = pot.omega;
    let w0 = w_at(u_f)?;
    let h = 1e-3 * u_f;
    let dw = (w_at(u_f + h)? - w_at(u_f - h)?) / (2.0 * h);
    let p = -omega + w0 / (2.0 * omega);
    let zeta = C64::new(dw / (4.0 * omega * omega), p);
    let amp = (-omega / p).sqrt();
    let phase = -omega * u_f - integral / (2.0 * omega);
    let phi = C64::from_polar(amp, phase);
    let residual = (w0 / (omega * omega)).powi(2) + (integral / omega).abs() * (w0 / (omega * omega)).abs();
    Ok((phi, zeta * phi, residual))
}

pub fn jost_grave(pot: &RadialPotential, u_grid: &[f64], tol: f64) -> Result<JostSolution> {
    jost_grave_with(pot, u_grid, &RadialOptions::from_tol(tol))
}

pub fn jost_grave_with(pot: &RadialPotential, u_grid: &[f64], opts: &RadialOptions) -> Result<JostSolution> {
    pot.check_frequency()?;
    check_grid(u_grid)?;
    let (u_f, capped) = far_anchor(pot, *u_grid.last().unwrap(), opts);
    if capped {
        log::warn!(
            "far anchor for omega = {:e} clipped to u = {u_f:e}; boundary accuracy downgraded",
            pot.omega
        );
    }
    let (phi0, dphi0, residual) = far_boundary(pot, u_f)?;
    let reversed: Vec<f64> = u_grid.iter().rev().copied().collect();
    let (mut phi, mut dphi, mut log_scale) = integrate_through(pot, opts, u_f, phi0, dphi0, &reversed)?;
    phi.reverse();
    dphi.reverse();
    log_scale.reverse();
    Ok(JostSolution {
        side: Side::Infinity,
        grid: u_grid.to_vec(),
        phi,
        dphi,
        log_scale,
        anchor_u: u_f,
        boundary_frequency: pot.omega,
        boundary_residual: residual,
        capped,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Transmission {
    pub omega: f64,
    pub big_omega: f64,
    pub lambda: f64,
    pub alpha: C64,
    pub beta: C64,
    /// `[[t11, t12], [t21, t22]]`
    pub t: [[f64; 2]; 2],
}

impl Transmission {
    pub fn from_coefficients(omega: f64, big_omega: f64, lambda: f64, alpha: C64, beta: C64) -> Result<Self> {
        if !(beta.norm() > 1e-300) || !alpha.is_finite() || !beta.is_finite() {
            return Err(Error::Breakdown(format!(
                "transmission coefficient beta = {beta} vanishes or is not finite at omega = {omega}"
            )));
        }
        let ratio = alpha / beta;
        let t = [[1.0 + ratio.re, -ratio.im], [-ratio.im, 1.0 - ratio.re]];
        Ok(Self { omega, big_omega, lambda, alpha, beta, t })
    }

    /// `|α|² - |β|² + ω/Ω`.
    pub fn flux_residual(&self) -> f64 {
        self.alpha.norm_sqr() - self.beta.norm_sqr() + self.omega / self.big_omega
    }

    /// Same residual relative to the size of the terms.
    pub fn relative_flux_residual(&self) -> f64 {
        self.flux_residual().abs() / (1.0 + self.beta.norm_sqr())
    }

    /// `|α/β|²`.
    pub fn reflection(&self) -> f64 {
        (self.alpha / self.beta).norm_sqr()
    }

    pub fn superradiant(&self) -> bool {
        self.omega * self.big_omega < 0.0
    }

    /// Resolvent Wronskian `φ́' φ̀ - φ́ φ̀' = 2iΩβ`.
    pub fn resolvent_wronskian(&self) -> C64 {
        C64::new(0.0, 2.0 * self.big_omega) * self.beta
    }
}

/// Jost pair on a common grid together with the transmission data.
#[derive(Debug, Clone)]
pub struct Scattering {
    pub potential: RadialPotential,
    pub acute: JostSolution,
    pub grave: JostSolution,
    pub transmission: Transmission,
    /// grid index used to extract `α, β`
    pub match_index: usize,
    /// max relative deviation of `w(φ́, φ̀)` along the grid
    pub wronskian_drift: f64,
}

impl Scattering {
    pub fn solve(pot: &RadialPotential, u_grid: &[f64], opts: &RadialOptions) -> Result<Self> {
        let acute = jost_acute_with(pot, u_grid, opts)?;
        let grave = jost_grave_with(pot, u_grid, opts)?;
        let bg = &pot.bg;
        let u_match = bg.tortoise_u((3.0 * bg.mass).max(bg.r1 + 0.5 * bg.mass))?;
        let match_index = u_grid
            .iter()
            .enumerate()
            .min_by(|a, b| (a.1 - u_match).abs().total_cmp(&(b.1 - u_match).abs()))
            .map(|p| p.0)
            .unwrap_or(0);
        let transmission = extract(pot, &acute, &grave, match_index)?;
        let w_ref = acute.wronskian_with(&grave, match_index);
        let wronskian_drift = (0..u_grid.len())
            .map(|i| (acute.wronskian_with(&grave, i) - w_ref).norm() / w_ref.norm())
            .fold(0.0, f64::max);
        Ok(Self { potential: *pot, acute, grave, transmission, match_index, wronskian_drift })
    }
}

fn extract(pot: &RadialPotential, acute: &JostSolution, grave: &JostSolution, i: usize) -> Result<Transmission> {
    let om = pot.big_omega();
    let f = acute.value(i);
    let df = acute.derivative(i);
    let g = grave.value(i);
    let dg = grave.derivative(i);
    let alpha = wronskian(g, dg, f.conj(), df.conj()) / C64::new(0.0, -2.0 * om);
    let beta = wronskian(g, dg, f, df) / C64::new(0.0, 2.0 * om);
    Transmission::from_coefficients(pot.omega, om, pot.lambda, alpha, beta)
}

pub fn transmission(pot: &RadialPotential, tol: f64) -> Result<Transmission> {
    transmission_with(pot, &RadialOptions::from_tol(tol))
}

pub fn transmission_with(pot: &RadialPotential, opts: &RadialOptions) -> Result<Transmission> {
    let bg = &pot.bg;
    let u_match = bg.tortoise_u((3.0 * bg.mass).max(bg.r1 + 0.5 * bg.mass))?;
    Ok(Scattering::solve(pot, &[u_match], opts)?.transmission)
}

/// `g(u, u') = φ́(u) φ̀(u') / w̃` with `w̃ = φ́'φ̀ - φ́φ̀' = 2iΩβ`.
pub fn greens_kernel(pot: &RadialPotential, u: f64, u_prime: f64, tol: f64) -> Result<C64> {
    let mut grid = vec![u, u_prime];
    grid.sort_by(f64::total_cmp);
    grid.dedup();
    let sc = Scattering::solve(pot, &grid, &RadialOptions::from_tol(tol))?;
    let iu = grid.iter().position(|&g| g == u).unwrap();
    let iv = grid.iter().position(|&g| g == u_prime).unwrap();
    Ok(sc.acute.value(iu) * sc.grave.value(iv) / sc.transmission.resolvent_wronskian())
}

/// `-(1/2Ω) Σ t_ab φ_a(u) φ_b(u')` with `φ_1 = Re φ́`, `φ_2 = Im φ́`.
pub fn tabrel_rhs(tr: &Transmission, acute_u: C64, acute_v: C64) -> f64 {
    let a = [acute_u.re, acute_u.im];
    let b = [acute_v.re, acute_v.im];
    let mut s = 0.0;
    for i in 0..2 {
        for j in 0..2 {
            s += tr.t[i][j] * a[i] * b[j];
        }
    }
    -s / (2.0 * tr.big_omega)
}
