//! Independent reference computations shared by the integration tests.
#![allow(dead_code)]

use num_complex::Complex64 as C64;

/// Areal radius for the Schwarzschild tortoise coordinate `u = r + 2M ln((r - 2M)/M)`.
/// Newton on `y = ln((r - 2M)/M)`.
pub fn schwarzschild_r(mass: f64, u: f64) -> f64 {
    let v = u / mass - 2.0;
    let mut y = if v < 1.0 { 0.5 * (v - 1.0) } else { v.ln() };
    for _ in 0..100 {
        let f = y.exp() + 2.0 * y - v;
        let step = f / (y.exp() + 2.0);
        y -= step;
        if step.abs() < 1e-15 * (1.0 + y.abs()) {
            break;
        }
    }
    mass * (2.0 + y.exp())
}

/// Regge-Wheeler potential `(1 - 2M/r)(l(l+1)/r² + 2M/r³)`.
pub fn regge_wheeler(mass: f64, ell: f64, u: f64) -> f64 {
    let r = schwarzschild_r(mass, u);
    (1.0 - 2.0 * mass / r) * (ell * (ell + 1.0) / (r * r) + 2.0 * mass / (r * r * r))
}

/// Solution of `φ'' = (V - ω²) φ` that is `e^{iωu}` at the horizon, sampled at
/// the (ascending) `targets`, by fixed-step RK4 from `u_start`.
pub fn rw_horizon_solution(mass: f64, ell: f64, omega: f64, u_start: f64, h: f64, targets: &[f64]) -> Vec<C64> {
    let i = C64::new(0.0, 1.0);
    let f = |u: f64, y: [C64; 2]| [y[1], (regge_wheeler(mass, ell, u) - omega * omega) * y[0]];
    let mut u = u_start;
    let mut y = [(i * omega * u).exp(), i * omega * (i * omega * u).exp()];
    let mut out = Vec::with_capacity(targets.len());
    for &t in targets {
        while u < t {
            let step = h.min(t - u);
            let k1 = f(u, y);
            let y2 = [y[0] + 0.5 * step * k1[0], y[1] + 0.5 * step * k1[1]];
            let k2 = f(u + 0.5 * step, y2);
            let y3 = [y[0] + 0.5 * step * k2[0], y[1] + 0.5 * step * k2[1]];
            let k3 = f(u + 0.5 * step, y3);
            let y4 = [y[0] + step * k3[0], y[1] + step * k3[1]];
            let k4 = f(u + step, y4);
            for c in 0..2 {
                y[c] += step / 6.0 * (k1[c] + 2.0 * k2[c] + 2.0 * k3[c] + k4[c]);
            }
            u += step;
        }
        out.push(y[0]);
    }
    out
}

/// Orthonormal associated Legendre functions `P̄_l^m`, `l = m … m+count-1`,
/// from the three-term recurrence in unnormalized form, normalized afterwards.
pub fn normalized_legendre(m: usize, count: usize, x: f64) -> Vec<f64> {
    let s = (1.0 - x * x).sqrt();
    // P_m^m = (-1)^m (2m-1)!! s^m, Condon-Shortley phase dropped
    let mut pmm = 1.0;
    for j in 1..=m {
        pmm *= (2 * j - 1) as f64 * s;
    }
    let mut p = Vec::with_capacity(count);
    let (mut a, mut b) = (0.0, pmm);
    for l in m..m + count {
        let v = if l == m {
            pmm
        } else {
            let next = ((2 * l - 1) as f64 * x * b - (l + m - 1) as f64 * a) / (l - m) as f64;
            a = b;
            b = next;
            next
        };
        p.push(v);
    }
    // ∫ P_l^m² dx = 2 (l+m)! / ((2l+1)(l-m)!)
    p.iter()
        .enumerate()
        .map(|(j, v)| {
            let l = m + j;
            let mut ratio = 1.0;
            for q in (l - m + 1)..=(l + m) {
                ratio *= q as f64;
            }
            v / (2.0 * ratio / (2 * l + 1) as f64).sqrt()
        })
        .collect()
}

pub fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    (0..n).map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64).collect()
}
