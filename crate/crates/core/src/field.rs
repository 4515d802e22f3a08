//! Two-component wave data `Ψ = (Φ, i∂_tΦ)` on a `(u, cos θ)` tensor grid.

use crate::error::{Error, Result};
use crate::quadrature::gauss_legendre;
use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

/// How the `cos θ` nodes were laid out; decides the face geometry used by
/// the finite-difference operators.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum AngularLayout {
    /// uniform cells on `[-1, 1]`, nodes at cell centres
    CellCentered,
    /// Gauss-Legendre nodes
    Gauss,
}

/// `(1 - x²)^{m/2}`: the pole behaviour of a smooth field with `|k| = m`.
pub fn pole_weight(m: usize, x: f64) -> f64 {
    (1.0 - x * x).powf(0.5 * m as f64)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    pub u: Vec<f64>,
    pub costheta: Vec<f64>,
    /// quadrature weights on `costheta`
    pub costheta_weights: Vec<f64>,
    pub layout: AngularLayout,
}

impl Grid {
    pub fn new(u: Vec<f64>, costheta: Vec<f64>, costheta_weights: Vec<f64>, layout: AngularLayout) -> Result<Self> {
        let g = Self { u, costheta, costheta_weights, layout };
        g.validate()?;
        Ok(g)
    }

    /// Uniform `u` nodes with cell-centred `cos θ` nodes.
    pub fn uniform(u_min: f64, u_max: f64, nu: usize, nx: usize) -> Result<Self> {
        if nu < 2 || nx < 2 || !(u_max > u_min) {
            return Err(Error::GridMismatch(format!("bad grid spec [{u_min}, {u_max}] x {nu} x {nx}")));
        }
        let du = (u_max - u_min) / (nu - 1) as f64;
        let u = (0..nu).map(|i| u_min + i as f64 * du).collect();
        let h = 2.0 / nx as f64;
        let x = (0..nx).map(|j| -1.0 + (j as f64 + 0.5) * h).collect();
        Self::new(u, x, vec![h; nx], AngularLayout::CellCentered)
    }

    /// Uniform `u` nodes with Gauss-Legendre `cos θ` nodes.
    pub fn uniform_gauss(u_min: f64, u_max: f64, nu: usize, nx: usize) -> Result<Self> {
        if nu < 2 || nx < 2 || !(u_max > u_min) {
            return Err(Error::GridMismatch(format!("bad grid spec [{u_min}, {u_max}] x {nu} x {nx}")));
        }
        let du = (u_max - u_min) / (nu - 1) as f64;
        let u = (0..nu).map(|i| u_min + i as f64 * du).collect();
        let (x, w) = gauss_legendre(nx);
        Self::new(u, x, w, AngularLayout::Gauss)
    }

    pub fn validate(&self) -> Result<()> {
        let inc = |v: &[f64]| v.iter().all(|x| x.is_finite()) && v.windows(2).all(|p| p[1] > p[0]);
        if self.u.is_empty() || !inc(&self.u) {
            return Err(Error::GridMismatch("u grid must be non-empty and strictly increasing".into()));
        }
        if self.costheta.is_empty() || !inc(&self.costheta) {
            return Err(Error::GridMismatch("cos theta grid must be non-empty and strictly increasing".into()));
        }
        if self.costheta[0] <= -1.0 || *self.costheta.last().unwrap() >= 1.0 {
            return Err(Error::GridMismatch("cos theta nodes must lie strictly inside (-1, 1)".into()));
        }
        if self.costheta_weights.len() != self.costheta.len() {
            return Err(Error::GridMismatch("cos theta weights length".into()));
        }
        Ok(())
    }

    pub fn nu(&self) -> usize {
        self.u.len()
    }

    pub fn nx(&self) -> usize {
        self.costheta.len()
    }

    pub fn len(&self) -> usize {
        self.nu() * self.nx()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn index(&self, iu: usize, ix: usize) -> usize {
        iu * self.nx() + ix
    }

    /// Trapezoid-like cell widths in `u` (ends use the adjacent spacing).
    pub fn u_weights(&self) -> Vec<f64> {
        let u = &self.u;
        let n = u.len();
        if n == 1 {
            return vec![1.0];
        }
        (0..n)
            .map(|i| {
                let left = if i > 0 { u[i] - u[i - 1] } else { u[1] - u[0] };
                let right = if i + 1 < n { u[i + 1] - u[i] } else { u[n - 1] - u[n - 2] };
                0.5 * (left + right)
            })
            .collect()
    }

    /// Uniform spacing in `u`, if the grid is uniform to rounding.
    pub fn uniform_du(&self) -> Option<f64> {
        if self.u.len() < 2 {
            return None;
        }
        let du = (self.u[self.u.len() - 1] - self.u[0]) / (self.u.len() - 1) as f64;
        let ok = self.u.windows(2).all(|p| ((p[1] - p[0]) - du).abs() <= 1e-9 * du);
        ok.then_some(du)
    }

    pub fn same_as(&self, other: &Grid) -> bool {
        self == other
    }
}

/// Exact first derivatives of `Φ`, when the producer has them.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Derivatives {
    pub d_u: Vec<C64>,
    pub d_costheta: Vec<C64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FieldState {
    pub k: i32,
    pub grid: Grid,
    /// `Φ`, row-major with `cos θ` fastest
    pub psi1: Vec<C64>,
    /// `i ∂_t Φ`
    pub psi2: Vec<C64>,
    pub time: f64,
    pub derivatives: Option<Derivatives>,
}

impl FieldState {
    pub fn zeros(k: i32, grid: Grid, time: f64) -> Self {
        let n = grid.len();
        Self { k, grid, psi1: vec![C64::new(0.0, 0.0); n], psi2: vec![C64::new(0.0, 0.0); n], time, derivatives: None }
    }

    /// Samples `f(u, x) -> (Φ, i∂_tΦ)` on the grid.
    pub fn from_fn(k: i32, grid: Grid, time: f64, f: impl Fn(f64, f64) -> (C64, C64)) -> Self {
        let mut s = Self::zeros(k, grid, time);
        for iu in 0..s.grid.nu() {
            for ix in 0..s.grid.nx() {
                let i = s.grid.index(iu, ix);
                let (a, b) = f(s.grid.u[iu], s.grid.costheta[ix]);
                s.psi1[i] = a;
                s.psi2[i] = b;
            }
        }
        s
    }

    pub fn check_compatible(&self, other: &FieldState) -> Result<()> {
        if self.k != other.k {
            return Err(Error::GridMismatch(format!("k = {} vs {}", self.k, other.k)));
        }
        if !self.grid.same_as(&other.grid) {
            return Err(Error::GridMismatch("states live on different grids".into()));
        }
        Ok(())
    }

    pub fn scale(&mut self, c: C64) {
        self.psi1.iter_mut().for_each(|v| *v *= c);
        self.psi2.iter_mut().for_each(|v| *v *= c);
        if let Some(d) = &mut self.derivatives {
            d.d_u.iter_mut().for_each(|v| *v *= c);
            d.d_costheta.iter_mut().for_each(|v| *v *= c);
        }
    }

    /// `self + c·other`; derivative arrays survive only if both carry them.
    pub fn axpy(&mut self, c: C64, other: &FieldState) -> Result<()> {
        self.check_compatible(other)?;
        for (a, b) in self.psi1.iter_mut().zip(&other.psi1) {
            *a += c * b;
        }
        for (a, b) in self.psi2.iter_mut().zip(&other.psi2) {
            *a += c * b;
        }
        self.derivatives = match (self.derivatives.take(), &other.derivatives) {
            (Some(mut d), Some(e)) => {
                d.d_u.iter_mut().zip(&e.d_u).for_each(|(a, b)| *a += c * b);
                d.d_costheta.iter_mut().zip(&e.d_costheta).for_each(|(a, b)| *a += c * b);
                Some(d)
            }
            _ => None,
        };
        Ok(())
    }

    /// Plain `L²(du dx)` norm of both components restricted to `u ∈ [lo, hi]`.
    pub fn l2_norm_on(&self, lo: f64, hi: f64) -> f64 {
        let wu = self.grid.u_weights();
        let mut s = 0.0;
        for iu in 0..self.grid.nu() {
            if self.grid.u[iu] < lo || self.grid.u[iu] > hi {
                continue;
            }
            for ix in 0..self.grid.nx() {
                let i = self.grid.index(iu, ix);
                s += wu[iu] * self.grid.costheta_weights[ix] * (self.psi1[i].norm_sqr() + self.psi2[i].norm_sqr());
            }
        }
        s.sqrt()
    }

    /// `‖self - other‖ / ‖other‖` on `u ∈ [lo, hi]`.
    pub fn relative_l2_difference(&self, other: &FieldState, lo: f64, hi: f64) -> Result<f64> {
        self.check_compatible(other)?;
        let mut diff = self.clone();
        diff.derivatives = None;
        diff.axpy(C64::new(-1.0, 0.0), other)?;
        Ok(diff.l2_norm_on(lo, hi) / other.l2_norm_on(lo, hi))
    }

    pub fn max_abs(&self) -> f64 {
        self.psi1.iter().chain(&self.psi2).map(|v| v.norm()).fold(0.0, f64::max)
    }

    /// `u`-range where `|Ψ|` exceeds `rel` times its maximum.
    pub fn support(&self, rel: f64) -> Option<(f64, f64)> {
        let cut = rel * self.max_abs();
        if cut == 0.0 {
            return None;
        }
        let nx = self.grid.nx();
        let hit = |iu: usize| (0..nx).any(|ix| {
            let i = iu * nx + ix;
            self.psi1[i].norm() > cut || self.psi2[i].norm() > cut
        });
        let first = (0..self.grid.nu()).find(|&iu| hit(iu))?;
        let last = (0..self.grid.nu()).rev().find(|&iu| hit(iu))?;
        Some((self.grid.u[first], self.grid.u[last]))
    }
}
