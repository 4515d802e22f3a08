//! Energy inner product, pointwise energy density and exterior energies.
//!
//! The inner product is the weak form
//! `∫∫ [s ∂_uΦ̄₁∂_uΦ₂ + (Δ/s)((1-x²)∂_xΦ̄₁∂_xΦ₂ + k²/(1-x²) Φ̄₁Φ₂) - (a²k²/s) Φ̄₁Φ₂ + ρ Ψ̄₁²Ψ₂²] du dx`
//! with `s = r² + a²`, `x = cos θ`. Integrating the density over `dr dx`
//! reproduces it, since `dr = (Δ/s) du`.

use crate::error::{Error, Result};
use crate::field::{pole_weight, FieldState};
use crate::geometry::{delta, KerrBackground, RadialProfile};
use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;
use std::fmt::Write as _;

/// Conjugate-linear in the first slot. Uses the exact derivative arrays when
/// both states carry them, otherwise the summation-by-parts difference form
/// matching the time-domain operator (ghost zeros outside the grid).
///
/// The difference form writes `Φ = (1-x²)^{m/2} g`, `m = |k|`, for which the
/// angular energy is `∫ (1-x²)^{m+1}|g'|² + m(m+1)(1-x²)^m |g|² dx`; `g` is smooth
/// at the poles, so the stencil stays second order there.
pub fn energy_inner_product(bg: &KerrBackground, a: &FieldState, b: &FieldState) -> Result<C64> {
    a.check_compatible(b)?;
    let grid = &a.grid;
    let prof = RadialProfile::new(bg, &grid.u)?;
    let k2 = (a.k as f64).powi(2);
    let a2 = bg.spin * bg.spin;
    let wu = grid.u_weights();
    let wx = &grid.costheta_weights;
    let (nu, nx) = (grid.nu(), grid.nx());
    let exact = a.derivatives.is_some() && b.derivatives.is_some();
    let m = a.k.unsigned_abs() as usize;
    let mm1 = (m * (m + 1)) as f64;
    let mut total = C64::new(0.0, 0.0);

    for iu in 0..nu {
        let (s, dos) = (prof.sigma[iu], prof.delta[iu] / prof.sigma[iu]);
        for ix in 0..nx {
            let i = grid.index(iu, ix);
            let x = grid.costheta[ix];
            let sin2 = 1.0 - x * x;
            let w = wu[iu] * wx[ix];
            let angular = if exact { k2 / sin2 } else { mm1 };
            let pot = dos * angular - a2 * k2 / s;
            total += w * (pot * a.psi1[i].conj() * b.psi1[i] + prof.rho(bg, iu, x) * a.psi2[i].conj() * b.psi2[i]);
        }
    }

    if let (Some(da), Some(db)) = (&a.derivatives, &b.derivatives) {
        for iu in 0..nu {
            let (s, dos) = (prof.sigma[iu], prof.delta[iu] / prof.sigma[iu]);
            for ix in 0..nx {
                let i = grid.index(iu, ix);
                let x = grid.costheta[ix];
                let w = wu[iu] * wx[ix];
                total += w
                    * (s * da.d_u[i].conj() * db.d_u[i]
                        + dos * (1.0 - x * x) * da.d_costheta[i].conj() * db.d_costheta[i]);
            }
        }
        return Ok(total);
    }

    // faces in u, including the two ghost faces
    let u = &grid.u;
    for f in 0..=nu {
        let (lo, hi) = (f.checked_sub(1), (f < nu).then_some(f));
        let h = match (lo, hi) {
            (Some(l), Some(r)) => u[r] - u[l],
            _ if nu > 1 => u[1] - u[0],
            _ => 1.0,
        };
        let uf = match (lo, hi) {
            (Some(l), Some(r)) => 0.5 * (u[l] + u[r]),
            (None, _) => u[0] - 0.5 * h,
            (_, None) => u[nu - 1] + 0.5 * h,
        };
        let sf = bg.sigma(bg.inverse_r(uf)?);
        for ix in 0..nx {
            let val = |s: &FieldState, idx: Option<usize>| idx.map_or(C64::new(0.0, 0.0), |iu| s.psi1[grid.index(iu, ix)]);
            let ga = val(a, hi) - val(a, lo);
            let gb = val(b, hi) - val(b, lo);
            total += wx[ix] * sf / h * ga.conj() * gb;
        }
    }
    // interior faces in x; the pole faces carry the weight (1 - x²)^{m+1} = 0
    let x = &grid.costheta;
    let inv_w: Vec<f64> = x.iter().map(|&x| 1.0 / pole_weight(m, x)).collect();
    for iu in 0..nu {
        let dos = prof.delta[iu] / prof.sigma[iu];
        for ix in 0..nx.saturating_sub(1) {
            let xf = 0.5 * (x[ix] + x[ix + 1]);
            let h = x[ix + 1] - x[ix];
            let i0 = grid.index(iu, ix);
            let ga = a.psi1[i0 + 1] * inv_w[ix + 1] - a.psi1[i0] * inv_w[ix];
            let gb = b.psi1[i0 + 1] * inv_w[ix + 1] - b.psi1[i0] * inv_w[ix];
            total += wu[iu] * dos * (1.0 - xf * xf).powi(m as i32 + 1) / h * ga.conj() * gb;
        }
    }
    Ok(total)
}

/// Physical energy density for a single `k`-mode.
pub fn energy_density(bg: &KerrBackground, phi: C64, dt_phi: C64, dr_phi: C64, dx_phi: C64, r: f64, cos_theta: f64) -> f64 {
    let a2 = bg.spin * bg.spin;
    let sin2 = 1.0 - cos_theta * cos_theta;
    let d = delta(bg, r);
    let s = bg.sigma(r);
    let k2 = (bg.k as f64).powi(2);
    (s * s / d - a2 * sin2) * dt_phi.norm_sqr()
        + d * dr_phi.norm_sqr()
        + sin2 * dx_phi.norm_sqr()
        + (k2 / sin2 - a2 * k2 / d) * phi.norm_sqr()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnergyReport {
    pub t: f64,
    pub r_inner: f64,
    pub exterior_energy: f64,
    pub total_energy: f64,
    pub min_density: f64,
    pub min_density_r: f64,
    pub min_density_costheta: f64,
    /// energy found in the outermost cells; bounds what the grid truncation can miss
    pub tail_bound: f64,
}

/// Pointwise derivatives `(∂_uΦ, ∂_xΦ)`: exact arrays if present, otherwise
/// centred differences (one-sided at the ends). In `x` the smooth factor
/// `g = Φ/(1-x²)^{m/2}` is differenced and the pole weight differentiated exactly.
fn derivatives(state: &FieldState) -> (Vec<C64>, Vec<C64>) {
    if let Some(d) = &state.derivatives {
        return (d.d_u.clone(), d.d_costheta.clone());
    }
    let g = &state.grid;
    let (nu, nx) = (g.nu(), g.nx());
    let mut du = vec![C64::new(0.0, 0.0); g.len()];
    let mut dx = vec![C64::new(0.0, 0.0); g.len()];
    let p = &state.psi1;
    let m = state.k.unsigned_abs() as usize;
    for iu in 0..nu {
        for ix in 0..nx {
            let i = g.index(iu, ix);
            if nu > 1 {
                du[i] = if iu == 0 {
                    (p[i + nx] - p[i]) / (g.u[1] - g.u[0])
                } else if iu == nu - 1 {
                    (p[i] - p[i - nx]) / (g.u[iu] - g.u[iu - 1])
                } else {
                    (p[i + nx] - p[i - nx]) / (g.u[iu + 1] - g.u[iu - 1])
                };
            }
            if nx > 1 {
                let gv = |j: usize| p[g.index(iu, j)] / pole_weight(m, g.costheta[j]);
                let (jl, jr) = (ix.saturating_sub(1), (ix + 1).min(nx - 1));
                let dg = (gv(jr) - gv(jl)) / (g.costheta[jr] - g.costheta[jl]);
                let x = g.costheta[ix];
                let w = pole_weight(m, x);
                let dw = if m == 0 { 0.0 } else { -(m as f64) * x * (1.0 - x * x).powf(0.5 * m as f64 - 1.0) };
                dx[i] = w * dg + dw * gv(ix);
            }
        }
    }
    (du, dx)
}

/// `2π ∫_{r ≥ R} ∫ E dr dx` together with the density minimum.
fn exterior_with_minimum(state: &FieldState, bg: &KerrBackground, r_inner: f64) -> Result<(f64, f64, f64, f64, f64)> {
    let g = &state.grid;
    let prof = RadialProfile::new(bg, &g.u)?;
    if r_inner < prof.r[0] {
        return Err(Error::Domain(format!(
            "R = {r_inner} lies below the grid coverage (r_min = {})",
            prof.r[0]
        )));
    }
    let (du, dx) = derivatives(state);
    let wu = g.u_weights();
    let nu = g.nu();
    let tail_start = nu - (nu / 50).max(2).min(nu);
    let mut total = 0.0;
    let mut tail = 0.0;
    let mut min = (f64::INFINITY, f64::NAN, f64::NAN);
    for iu in 0..nu {
        let r = prof.r[iu];
        if r < r_inner {
            continue;
        }
        let dudr = prof.sigma[iu] / prof.delta[iu];
        for ix in 0..g.nx() {
            let i = g.index(iu, ix);
            let x = g.costheta[ix];
            // Ψ² = i∂_tΦ, so |∂_tΦ| = |Ψ²|
            let e = energy_density(bg, state.psi1[i], state.psi2[i], du[i] * dudr, dx[i], r, x);
            let w = wu[iu] / dudr * g.costheta_weights[ix];
            total += w * e;
            if iu >= tail_start {
                tail += w * e.abs();
            }
            if e < min.0 {
                min = (e, r, x);
            }
        }
    }
    Ok((2.0 * PI * total, min.0, min.1, min.2, 2.0 * PI * tail))
}

pub fn exterior_energy(state: &FieldState, bg: &KerrBackground, r_inner: f64) -> Result<f64> {
    Ok(exterior_with_minimum(state, bg, r_inner)?.0)
}

pub fn energy_report(state: &FieldState, bg: &KerrBackground, r_inner: f64) -> Result<EnergyReport> {
    let (exterior, min_density, min_r, min_x, tail_bound) = exterior_with_minimum(state, bg, r_inner)?;
    let total = 2.0 * PI * energy_inner_product(bg, state, state)?.re;
    Ok(EnergyReport {
        t: state.time,
        r_inner,
        exterior_energy: exterior,
        total_energy: total,
        min_density,
        min_density_r: min_r,
        min_density_costheta: min_x,
        tail_bound,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepResult {
    pub reports: Vec<EnergyReport>,
    pub sup_exterior: f64,
    /// `sup_t E_ext(t) / |E_total(0)|`
    pub growth_factor: f64,
    /// exterior energy grew monotonically past the allowed factor
    pub alert: bool,
}

/// Exterior energy at each requested time from any evolution source.
pub fn boundedness_sweep<F>(mut source: F, bg: &KerrBackground, r_inner: f64, times: &[f64], max_growth: f64) -> Result<SweepResult>
where
    F: FnMut(f64) -> Result<FieldState>,
{
    let mut reports = Vec::with_capacity(times.len());
    for &t in times {
        reports.push(energy_report(&source(t)?, bg, r_inner)?);
    }
    Ok(summarize_sweep(reports, max_growth))
}

pub fn summarize_sweep(reports: Vec<EnergyReport>, max_growth: f64) -> SweepResult {
    let sup = reports.iter().map(|r| r.exterior_energy).fold(f64::NEG_INFINITY, f64::max);
    let reference = reports.first().map_or(0.0, |r| r.total_energy.abs().max(r.exterior_energy.abs()));
    let growth = if reference > 0.0 { sup / reference } else { 0.0 };
    let monotone = reports.windows(2).all(|p| p[1].exterior_energy >= p[0].exterior_energy);
    let alert = reports.len() > 1 && monotone && growth > max_growth;
    SweepResult { reports, sup_exterior: sup, growth_factor: growth, alert }
}

pub const REPORT_CSV_HEADER: &str = "t,R,exterior_energy,total_energy,min_density,min_density_r,min_density_costheta";

pub fn reports_to_csv(reports: &[EnergyReport]) -> String {
    let mut out = String::from(REPORT_CSV_HEADER);
    out.push('\n');
    for r in reports {
        let _ = writeln!(
            out,
            "{:e},{:e},{:e},{:e},{:e},{:e},{:e}",
            r.t, r.r_inner, r.exterior_energy, r.total_energy, r.min_density, r.min_density_r, r.min_density_costheta
        );
    }
    out
}
