//! Kerr background quantities and the Regge-Wheeler (tortoise) coordinate.
//!
//! Geometric units `G = c = 1`. The integration constant of the tortoise
//! coordinate is fixed by
//!
//! ```text
//! u(r) = r + [2M r1 ln((r - r1)/M) - 2M r2 ln((r - r2)/M)] / (r1 - r2)
//! ```
//!
//! and every `u` value in the crate uses this convention. Near the horizon
//! the offset `x = r - r1` is exponentially small in `u`, so the inverse map
//! is solved for `x` directly rather than for `r`.

use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KerrBackground {
    pub mass: f64,
    pub spin: f64,
    pub k: i32,
    pub r1: f64,
    pub r2: f64,
    pub omega0: f64,
}

impl KerrBackground {
    pub fn new(mass: f64, spin: f64, k: i32) -> Result<Self> {
        let (r1, r2) = horizon_radii(mass, spin)?;
        let omega0 = -spin * k as f64 / (r1 * r1 + spin * spin);
        Ok(Self { mass, spin, k, r1, r2, omega0 })
    }

    pub fn schwarzschild(mass: f64, k: i32) -> Result<Self> {
        Self::new(mass, 0.0, k)
    }

    pub fn kf(&self) -> f64 {
        self.k as f64
    }

    /// `a k`, the product that controls every rotational coupling.
    pub fn ak(&self) -> f64 {
        self.spin * self.k as f64
    }

    /// `r^2 + a^2`.
    pub fn sigma(&self, r: f64) -> f64 {
        r * r + self.spin * self.spin
    }

    pub fn delta(&self, r: f64) -> f64 {
        delta(self, r)
    }

    /// `Delta` written through the horizon offset `x = r - r1`; exact near the horizon.
    pub fn delta_from_offset(&self, x: f64) -> f64 {
        x * (x + self.r1 - self.r2)
    }

    /// Exponential rate of `r - r1` in `u` near the horizon.
    pub fn horizon_rate(&self) -> f64 {
        (self.r1 - self.r2) / self.sigma(self.r1)
    }

    /// `Omega = omega - omega0`.
    pub fn big_omega(&self, omega: f64) -> f64 {
        omega - self.omega0
    }

    pub fn tortoise_u(&self, r: f64) -> Result<f64> {
        tortoise_u(self, r)
    }

    pub fn inverse_r(&self, u: f64) -> Result<f64> {
        inverse_r(self, u)
    }

    pub fn horizon_offset(&self, u: f64) -> Result<f64> {
        horizon_offset(self, u)
    }

    fn u_of_offset(&self, x: f64) -> f64 {
        let m = self.mass;
        let (r1, r2) = (self.r1, self.r2);
        let log_part = 2.0 * m * r1 * (x / m).ln() - 2.0 * m * r2 * ((x + r1 - r2) / m).ln();
        x + r1 + log_part / (r1 - r2)
    }

    /// `du / d ln x`, positive and bounded below by `(r1^2+a^2)/(r1-r2)`.
    fn du_dlogx(&self, x: f64) -> f64 {
        self.sigma(x + self.r1) / (x + self.r1 - self.r2)
    }
}

pub fn delta(bg: &KerrBackground, r: f64) -> f64 {
    r * r - 2.0 * bg.mass * r + bg.spin * bg.spin
}

pub fn horizon_radii(mass: f64, spin: f64) -> Result<(f64, f64)> {
    if !(mass > 0.0) || !mass.is_finite() || !spin.is_finite() {
        return Err(Error::Domain(format!("mass must be positive and finite, got M = {mass}")));
    }
    let disc = mass * mass - spin * spin;
    if disc <= 0.0 {
        return Err(Error::Domain(format!(
            "extreme or super-extreme background (M = {mass}, a = {spin}); need M^2 > a^2"
        )));
    }
    let root = disc.sqrt();
    Ok((mass + root, mass - root))
}

pub fn tortoise_u(bg: &KerrBackground, r: f64) -> Result<f64> {
    if !(r > bg.r1) {
        return Err(Error::Domain(format!("r = {r} is not outside the horizon r1 = {}", bg.r1)));
    }
    Ok(bg.u_of_offset(r - bg.r1))
}

pub fn inverse_r(bg: &KerrBackground, u: f64) -> Result<f64> {
    Ok(bg.r1 + horizon_offset(bg, u)?)
}

const MAX_INVERSION_ITERATIONS: usize = 200;

/// Solves `u(r1 + x) = u` for the horizon offset `x > 0`.
///
/// Newton iteration in `ln x` with a bisection safeguard; `u` is increasing and
/// convex in `ln x`, so the bracket always shrinks.
pub fn horizon_offset(bg: &KerrBackground, u: f64) -> Result<f64> {
    if !u.is_finite() {
        return Err(Error::Domain(format!("u = {u} is not finite")));
    }
    let m = bg.mass;
    let (r1, r2) = (bg.r1, bg.r2);
    let mut y = if u > r1 + 4.0 * m {
        (u - r1).ln()
    } else {
        // leading near-horizon behaviour of u(x)
        ((u - r1) * (r1 - r2) + 2.0 * m * r2 * ((r1 - r2) / m).ln()) / (2.0 * m * r1) + m.ln()
    };
    let f = |y: f64| bg.u_of_offset(y.exp()) - u;

    let mut lo = y - 1.0;
    let mut hi = y + 1.0;
    let mut step = 1.0;
    while f(lo) > 0.0 {
        step *= 2.0;
        lo -= step;
        if step > 1e6 {
            return Err(Error::NoConvergence(format!("could not bracket tortoise inverse at u = {u}")));
        }
    }
    step = 1.0;
    while f(hi) < 0.0 {
        step *= 2.0;
        hi += step;
        if step > 1e6 {
            return Err(Error::NoConvergence(format!("could not bracket tortoise inverse at u = {u}")));
        }
    }
    y = y.clamp(lo, hi);
    let scale = 1.0 + u.abs();
    for _ in 0..MAX_INVERSION_ITERATIONS {
        let g = f(y);
        if g.abs() <= 4.0 * f64::EPSILON * scale {
            return Ok(y.exp());
        }
        if g < 0.0 {
            lo = y;
        } else {
            hi = y;
        }
        let mut next = y - g / bg.du_dlogx(y.exp());
        if !(next > lo && next < hi) {
            next = 0.5 * (lo + hi);
        }
        if (next - y).abs() <= 1e-15 * (1.0 + y.abs()) {
            return Ok(next.exp());
        }
        y = next;
    }
    Err(Error::NoConvergence(format!(
        "tortoise inverse did not converge at u = {u} within {MAX_INVERSION_ITERATIONS} iterations"
    )))
}

/// `Delta - a^2 sin^2(theta)`; negative inside the ergosphere.
pub fn ergosphere_indicator(bg: &KerrBackground, r: f64, cos_theta: f64) -> f64 {
    let sin2 = 1.0 - cos_theta * cos_theta;
    delta(bg, r) - bg.spin * bg.spin * sin2
}

/// Background coefficients sampled at a list of `u` values.
#[derive(Debug, Clone, PartialEq)]
pub struct RadialProfile {
    pub u: Vec<f64>,
    pub r: Vec<f64>,
    /// `r^2 + a^2`
    pub sigma: Vec<f64>,
    pub delta: Vec<f64>,
}

impl RadialProfile {
    pub fn new(bg: &KerrBackground, u: &[f64]) -> Result<Self> {
        let mut r = Vec::with_capacity(u.len());
        let mut sigma = Vec::with_capacity(u.len());
        let mut delta = Vec::with_capacity(u.len());
        for &ui in u {
            let x = horizon_offset(bg, ui)?;
            let ri = bg.r1 + x;
            r.push(ri);
            sigma.push(bg.sigma(ri));
            delta.push(bg.delta_from_offset(x));
        }
        Ok(Self { u: u.to_vec(), r, sigma, delta })
    }

    /// `ρ = s - (a² Δ / s) sin²θ` at node `i`.
    pub fn rho(&self, bg: &KerrBackground, i: usize, cos_theta: f64) -> f64 {
        let s = self.sigma[i];
        s - bg.spin * bg.spin * self.delta[i] / s * (1.0 - cos_theta * cos_theta)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn bg(a: f64) -> KerrBackground {
        KerrBackground::new(1.0, a, 1).unwrap()
    }

    #[test]
    fn delta_values() {
        assert_eq!(delta(&bg(0.0), 2.0), 0.0);
        let b = bg(0.5);
        assert!(delta(&b, b.r1).abs() < 1e-15);
        assert!(delta(&b, b.r2).abs() < 1e-15);
        assert!((delta(&b, 3.0) - 3.25).abs() < 1e-15);
    }

    #[test]
    fn horizons() {
        assert_eq!(horizon_radii(1.0, 0.0).unwrap(), (2.0, 0.0));
        let (r1, r2) = horizon_radii(1.0, 0.5).unwrap();
        assert!((r1 - 1.8660254037844386).abs() < 1e-15);
        assert!((r2 - 0.1339745962155614).abs() < 1e-15);
        assert!(matches!(horizon_radii(1.0, 1.0), Err(Error::Domain(_))));
        assert!(matches!(horizon_radii(1.0, -1.5), Err(Error::Domain(_))));
        assert!(horizon_radii(0.0, 0.0).is_err());
    }

    #[test]
    fn omega0_sign() {
        assert!(bg(0.5).omega0 < 0.0);
        assert_eq!(bg(0.0).omega0, 0.0);
        assert_eq!(KerrBackground::new(1.0, 0.5, 0).unwrap().omega0, 0.0);
    }

    #[test]
    fn schwarzschild_tortoise() {
        // r + 2M ln((r - 2M)/M)
        assert!((tortoise_u(&bg(0.0), 3.0).unwrap() - 3.0).abs() < 1e-14);
        let u = tortoise_u(&bg(0.0), 6.0).unwrap();
        assert!((u - (6.0 + 2.0 * 4f64.ln())).abs() < 1e-14);
        assert!(tortoise_u(&bg(0.0), 2.0).is_err());
        assert!(tortoise_u(&bg(0.0), 1.0).is_err());
    }

    #[test]
    fn inverse_round_trip() {
        for a in [0.0, 0.5, 0.9] {
            let b = bg(a);
            for r in [2.5, 5.0, 50.0, b.r1 + 1e-9, b.r1 + 0.01, 1e5] {
                if r <= b.r1 {
                    continue;
                }
                let u = tortoise_u(&b, r).unwrap();
                let back = inverse_r(&b, u).unwrap();
                assert!(((back - r) / r).abs() < 1e-12, "a={a} r={r} back={back}");
            }
        }
    }

    #[test]
    fn offset_is_accurate_deep_in_the_horizon_region() {
        let b = bg(0.5);
        for x in [1e-30, 1e-12, 1e-3] {
            let u = b.u_of_offset(x);
            let back = horizon_offset(&b, u).unwrap();
            assert!(((back - x) / x).abs() < 1e-12);
        }
    }

    #[test]
    fn tortoise_diverges_at_horizon() {
        let b = bg(0.5);
        let mut prev = f64::INFINITY;
        for e in 1..12 {
            let u = tortoise_u(&b, b.r1 + 10f64.powi(-e)).unwrap();
            assert!(u < prev);
            prev = u;
        }
        assert!(prev < -10.0);
    }

    #[test]
    fn tortoise_derivative_matches_closed_form() {
        for a in [0.0, 0.5, 0.9] {
            let b = bg(a);
            let mut r = b.r1 + 0.01;
            while r < 100.0 {
                let h = 1e-6 * (r - b.r1).min(1.0);
                let num = (tortoise_u(&b, r + h).unwrap() - tortoise_u(&b, r - h).unwrap()) / (2.0 * h);
                let exact = b.sigma(r) / delta(&b, r);
                assert!(((num - exact) / exact).abs() < 1e-8, "a={a} r={r}");
                r *= 1.07;
            }
        }
    }

    #[test]
    fn ergosphere() {
        let b0 = bg(0.0);
        assert!(ergosphere_indicator(&b0, 3.0, 0.0) > 0.0);
        let b = bg(0.9);
        assert!(ergosphere_indicator(&b, b.r1 + 0.01, 0.0) < 0.0);
        assert!(ergosphere_indicator(&b, b.r1 + 0.01, 1.0) > 0.0);
    }
}
