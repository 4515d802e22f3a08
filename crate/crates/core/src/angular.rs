//! Spheroidal angular modes: eigenpairs of
//! `A_ω = -d/dx (1-x²) d/dx + k²/(1-x²) + a²ω²(1-x²) + 2akω`, `x = cos θ`,
//! in the orthonormal associated-Legendre basis.
//!
//! `(aω sin²θ + k)²/sin²θ` splits exactly into `a²ω² sin²θ + 2akω + k²/sin²θ`,
//! so the matrix is pentadiagonal and separates by parity into two
//! tridiagonal blocks.
//!
//! Eigenfunctions are normalized in `L²([-1, 1], dx)`; the azimuthal factor is
//! carried separately.

use crate::error::{Error, Result};
use crate::geometry::KerrBackground;
use crate::legendre;
use crate::tridiag::symmetric_tridiagonal_eigen;
use serde::{Deserialize, Serialize};

const MAX_BASIS: usize = 4096;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AngularMode {
    pub k: i32,
    /// 1-based, ascending in `lambda`
    pub n: usize,
    pub omega: f64,
    pub spin: f64,
    pub lambda: f64,
    /// coefficients of `P̄_l^{|k|}`, `l = |k|, |k|+1, …`
    pub coeffs: Vec<f64>,
    pub n_basis: usize,
}

impl AngularMode {
    pub fn m(&self) -> usize {
        self.k.unsigned_abs() as usize
    }

    pub fn eval(&self, cos_theta: f64) -> f64 {
        theta_eval(self, cos_theta)
    }

    /// `(Θ, dΘ/dx)` at `x = cos θ`, `|x| < 1`.
    pub fn eval_with_derivative(&self, x: f64) -> (f64, f64) {
        let (p, dp) = legendre::values_and_derivatives(self.m(), self.coeffs.len(), x);
        let v = self.coeffs.iter().zip(&p).map(|(c, p)| c * p).sum();
        let d = self.coeffs.iter().zip(&dp).map(|(c, p)| c * p).sum();
        (v, d)
    }

    /// Relative size of the last retained coefficient.
    pub fn tail_ratio(&self) -> f64 {
        let max = self.coeffs.iter().fold(0.0f64, |m, c| m.max(c.abs()));
        self.coeffs.last().map_or(0.0, |c| c.abs() / max)
    }
}

/// Default starting basis size.
pub fn default_basis_size(k: i32, spin: f64, omega: f64, n_max: usize) -> usize {
    let aw = (spin * omega).abs().ceil() as usize;
    16usize.max(k.unsigned_abs() as usize + 8 * aw + 2 * n_max)
}

/// Matrix of multiplication by `sin²θ = 1 - x²` in the first `n` basis functions.
///
/// Entries are those of the infinite matrix, so the block is exact up to truncation.
pub fn sin2_matrix(m: usize, n: usize) -> Vec<Vec<f64>> {
    let mut s = vec![vec![0.0; n]; n];
    for j in 0..n {
        let l = m + j;
        let a_l = legendre::recurrence_coeff(l, m);
        let a_l1 = legendre::recurrence_coeff(l + 1, m);
        s[j][j] = 1.0 - (a_l1 * a_l1 + a_l * a_l);
        if j + 2 < n {
            let v = -a_l1 * legendre::recurrence_coeff(l + 2, m);
            s[j][j + 2] = v;
            s[j + 2][j] = v;
        }
    }
    s
}

/// The `n_max` lowest modes with a fixed basis size (no adaptivity).
pub fn spheroidal_eigs_fixed(bg: &KerrBackground, omega: f64, n_max: usize, n_basis: usize) -> Result<Vec<AngularMode>> {
    if n_max == 0 {
        return Err(Error::Domain("n_max must be at least 1".into()));
    }
    let n_basis = n_basis.max(n_max + 2);
    let m = bg.k.unsigned_abs() as usize;
    let aw2 = (bg.spin * omega).powi(2);
    let shift = 2.0 * bg.ak() * omega;

    let mut all: Vec<(f64, Vec<f64>)> = Vec::with_capacity(n_basis);
    for parity in 0..2 {
        let idx: Vec<usize> = (parity..n_basis).step_by(2).collect();
        if idx.is_empty() {
            continue;
        }
        let mut d = Vec::with_capacity(idx.len());
        let mut e = Vec::with_capacity(idx.len().saturating_sub(1));
        for (pos, &j) in idx.iter().enumerate() {
            let l = m + j;
            let a_l = legendre::recurrence_coeff(l, m);
            let a_l1 = legendre::recurrence_coeff(l + 1, m);
            let sin2_diag = 1.0 - (a_l1 * a_l1 + a_l * a_l);
            d.push((l * (l + 1)) as f64 + aw2 * sin2_diag + shift);
            if pos + 1 < idx.len() {
                e.push(-aw2 * a_l1 * legendre::recurrence_coeff(l + 2, m));
            }
        }
        let (vals, vecs) = symmetric_tridiagonal_eigen(&d, &e)?;
        for (v, vec) in vals.into_iter().zip(vecs) {
            let mut full = vec![0.0; n_basis];
            for (pos, &j) in idx.iter().enumerate() {
                full[j] = vec[pos];
            }
            all.push((v, full));
        }
    }
    all.sort_by(|x, y| x.0.total_cmp(&y.0));
    Ok(all
        .into_iter()
        .take(n_max)
        .enumerate()
        .map(|(i, (lambda, mut coeffs))| {
            let dominant = coeffs.iter().copied().fold(0.0f64, |best, c| if c.abs() > best.abs() { c } else { best });
            if dominant < 0.0 {
                coeffs.iter_mut().for_each(|c| *c = -*c);
            }
            AngularMode { k: bg.k, n: i + 1, omega, spin: bg.spin, lambda, coeffs, n_basis }
        })
        .collect())
}

/// The `n_max` lowest eigenpairs, doubling the basis until every eigenvalue
/// moves by less than `tol` and the coefficient tails are below `tol`.
pub fn spheroidal_eigs(bg: &KerrBackground, omega: f64, n_max: usize, tol: f64) -> Result<Vec<AngularMode>> {
    if !(tol > 0.0) {
        return Err(Error::Domain(format!("tolerance must be positive, got {tol}")));
    }
    if !omega.is_finite() {
        return Err(Error::Domain(format!("omega = {omega} is not finite")));
    }
    let mut n = default_basis_size(bg.k, bg.spin, omega, n_max);
    let mut prev = spheroidal_eigs_fixed(bg, omega, n_max, n)?;
    while n < MAX_BASIS {
        n *= 2;
        let next = spheroidal_eigs_fixed(bg, omega, n_max, n)?;
        let moved = prev.iter().zip(&next).map(|(p, q)| (p.lambda - q.lambda).abs()).fold(0.0, f64::max);
        let tails = prev.iter().map(AngularMode::tail_ratio).fold(0.0, f64::max);
        if moved < tol && tails < tol.max(1e-14) {
            return Ok(prev);
        }
        prev = next;
    }
    Err(Error::NoConvergence(format!(
        "spheroidal eigenvalues not converged at basis size {MAX_BASIS} (omega = {omega})"
    )))
}

pub fn theta_eval(mode: &AngularMode, cos_theta: f64) -> f64 {
    let p = legendre::values(mode.m(), mode.coeffs.len(), cos_theta);
    mode.coeffs.iter().zip(&p).map(|(c, p)| c * p).sum()
}

fn paired<'a>(a: &'a [f64], b: &'a [f64]) -> impl Iterator<Item = (f64, f64)> + 'a {
    let n = a.len().max(b.len());
    (0..n).map(move |i| (a.get(i).copied().unwrap_or(0.0), b.get(i).copied().unwrap_or(0.0)))
}

/// `∫ Θ Θ' dx` via the coefficient vectors.
pub fn angular_overlap(mode: &AngularMode, other: &AngularMode) -> f64 {
    assert_eq!(mode.k, other.k, "overlap across different k");
    paired(&mode.coeffs, &other.coeffs).map(|(x, y)| x * y).sum()
}

/// `∫ Θ sin²θ Θ' dx` via the pentadiagonal matrix.
pub fn sin2_overlap(mode: &AngularMode, other: &AngularMode) -> f64 {
    assert_eq!(mode.k, other.k, "overlap across different k");
    let m = mode.m();
    let n = mode.coeffs.len().max(other.coeffs.len());
    let c: Vec<(f64, f64)> = paired(&mode.coeffs, &other.coeffs).collect();
    let mut sum = 0.0;
    for j in 0..n {
        let l = m + j;
        let a_l = legendre::recurrence_coeff(l, m);
        let a_l1 = legendre::recurrence_coeff(l + 1, m);
        sum += (1.0 - a_l1 * a_l1 - a_l * a_l) * c[j].0 * c[j].1;
        if j + 2 < n {
            let off = -a_l1 * legendre::recurrence_coeff(l + 2, m);
            sum += off * (c[j].0 * c[j + 2].1 + c[j + 2].0 * c[j].1);
        }
    }
    sum
}

/// `[2ak ⟨Θ,Θ'⟩ + a²(ω+ω') ⟨Θ, sin²θ Θ'⟩] / (λ - λ')`.
pub fn alpha_coupling(mode: &AngularMode, other: &AngularMode) -> Result<f64> {
    let gap = mode.lambda - other.lambda;
    let scale = 1.0 + mode.lambda.abs().max(other.lambda.abs());
    if gap.abs() < 1e-10 * scale {
        return Err(Error::Domain(format!(
            "degenerate pair: lambda = {} and {} are not separated",
            mode.lambda, other.lambda
        )));
    }
    let a = mode.spin;
    let ak = a * mode.k as f64;
    let num = 2.0 * ak * angular_overlap(mode, other) + a * a * (mode.omega + other.omega) * sin2_overlap(mode, other);
    Ok(num / gap)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quadrature::gauss_legendre;

    fn bg(a: f64, k: i32) -> KerrBackground {
        KerrBackground::new(1.0, a, k).unwrap()
    }

    #[test]
    fn legendre_limit() {
        for omega in [0.0, 0.7, -2.0] {
            let modes = spheroidal_eigs(&bg(0.0, 1), omega, 3, 1e-12).unwrap();
            let l: Vec<f64> = modes.iter().map(|m| m.lambda).collect();
            for (got, want) in l.iter().zip([2.0, 6.0, 12.0]) {
                assert!((got - want).abs() < 1e-10);
            }
        }
        let modes = spheroidal_eigs(&bg(0.5, 1), 0.0, 1, 1e-12).unwrap();
        assert!((modes[0].lambda - 2.0).abs() < 1e-12);
    }

    #[test]
    fn first_mode_is_p11_at_zero_spin() {
        let mode = &spheroidal_eigs(&bg(0.0, 1), 0.4, 1, 1e-12).unwrap()[0];
        for x in [-0.9, -0.2, 0.0, 0.5, 0.99] {
            let want = legendre::values(1, 1, x)[0];
            assert!((mode.eval(x) - want).abs() < 1e-12);
        }
        assert_eq!(mode.eval(1.0), 0.0);
        assert_eq!(mode.eval(-1.0), 0.0);
    }

    #[test]
    fn normalized_by_quadrature() {
        let (x, w) = gauss_legendre(96);
        for mode in spheroidal_eigs(&bg(0.9, 2), 1.7, 4, 1e-12).unwrap() {
            let s: f64 = x.iter().zip(&w).map(|(x, w)| w * mode.eval(*x).powi(2)).sum();
            assert!((s - 1.0).abs() < 1e-10);
        }
    }

    #[test]
    fn eigenvalues_increase_and_overlaps_vanish() {
        let modes = spheroidal_eigs(&bg(0.5, 1), 0.4, 5, 1e-12).unwrap();
        for p in modes.windows(2) {
            assert!(p[1].lambda > p[0].lambda);
        }
        for (i, a) in modes.iter().enumerate() {
            for (j, b) in modes.iter().enumerate() {
                let want = if i == j { 1.0 } else { 0.0 };
                assert!((angular_overlap(a, b) - want).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn sin2_matrix_is_symmetric_pentadiagonal() {
        for m in [0usize, 1, 3] {
            let s = sin2_matrix(m, 12);
            for i in 0..12 {
                for j in 0..12 {
                    assert_eq!(s[i][j], s[j][i]);
                    if i.abs_diff(j) != 0 && i.abs_diff(j) != 2 {
                        assert_eq!(s[i][j], 0.0);
                    }
                }
            }
        }
    }

    #[test]
    fn sin2_matrix_matches_quadrature() {
        let (x, w) = gauss_legendre(60);
        let m = 2;
        let n = 10;
        let s = sin2_matrix(m, n + 2);
        for i in 0..n {
            for j in 0..n {
                let q: f64 = x
                    .iter()
                    .zip(&w)
                    .map(|(x, w)| {
                        let p = legendre::values(m, n, *x);
                        w * (1.0 - x * x) * p[i] * p[j]
                    })
                    .sum();
                assert!((q - s[i][j]).abs() < 1e-13, "{i} {j}");
            }
        }
    }

    #[test]
    fn sign_convention() {
        for mode in spheroidal_eigs(&bg(0.5, 1), 1.3, 4, 1e-12).unwrap() {
            let dominant = mode.coeffs.iter().copied().fold(0.0f64, |b, c| if c.abs() > b.abs() { c } else { b });
            assert!(dominant > 0.0);
        }
    }

    #[test]
    fn coupling_vanishes_without_spin() {
        let m1 = spheroidal_eigs(&bg(0.0, 1), 0.2, 2, 1e-12).unwrap();
        let m2 = spheroidal_eigs(&bg(0.0, 1), 0.3, 2, 1e-12).unwrap();
        assert_eq!(alpha_coupling(&m1[0], &m2[1]).unwrap(), 0.0);
    }

    #[test]
    fn coupling_identity() {
        let b = bg(0.5, 1);
        let m1 = spheroidal_eigs_fixed(&b, 0.2, 2, 40).unwrap();
        let m2 = spheroidal_eigs_fixed(&b, 0.3, 2, 40).unwrap();
        let lhs = angular_overlap(&m1[0], &m2[1]);
        let rhs = (0.2 - 0.3) * alpha_coupling(&m1[0], &m2[1]).unwrap();
        assert!((lhs - rhs).abs() < 1e-12);
    }

    #[test]
    fn degenerate_pair_rejected() {
        let m1 = spheroidal_eigs(&bg(0.5, 1), 0.2, 1, 1e-12).unwrap();
        assert!(alpha_coupling(&m1[0], &m1[0]).is_err());
    }

    #[test]
    fn derivative_matches_differences() {
        let mode = &spheroidal_eigs(&bg(0.5, 2), 1.1, 3, 1e-12).unwrap()[2];
        for x in [-0.6, 0.2, 0.8] {
            let (_, d) = mode.eval_with_derivative(x);
            let fd = (mode.eval(x + 1e-6) - mode.eval(x - 1e-6)) / 2e-6;
            assert!((d - fd).abs() < 1e-6);
        }
    }
}
