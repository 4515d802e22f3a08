//! Comparisons against independent reference computations.

mod common;

use common::*;
use kerr_scatter::angular::spheroidal_eigs;
use kerr_scatter::quadrature::gauss_legendre;
use kerr_scatter::radial::{jost_acute, RadialPotential};
use kerr_scatter::KerrBackground;
use nalgebra::DMatrix;

/// Dense spheroidal matrix assembled by quadrature in a separately computed
/// Legendre basis, diagonalized with a general symmetric eigensolver.
fn dense_spheroidal(a: f64, k: i32, omega: f64, size: usize) -> (Vec<f64>, Vec<Vec<f64>>) {
    let m = k.unsigned_abs() as usize;
    let (x, w) = gauss_legendre(2 * size + 8);
    let basis: Vec<Vec<f64>> = x.iter().map(|&xi| normalized_legendre(m, size, xi)).collect();
    let aw = a * omega;
    let mut mat = DMatrix::<f64>::zeros(size, size);
    for i in 0..size {
        let l = (m + i) as f64;
        mat[(i, i)] += l * (l + 1.0) + 2.0 * a * k as f64 * omega;
        for j in 0..size {
            let s: f64 = (0..x.len()).map(|q| w[q] * (1.0 - x[q] * x[q]) * basis[q][i] * basis[q][j]).sum();
            mat[(i, j)] += aw * aw * s;
        }
    }
    let eig = mat.symmetric_eigen();
    let mut order: Vec<usize> = (0..size).collect();
    order.sort_by(|&p, &q| eig.eigenvalues[p].total_cmp(&eig.eigenvalues[q]));
    let values = order.iter().map(|&p| eig.eigenvalues[p]).collect();
    let vectors = order.iter().map(|&p| eig.eigenvectors.column(p).iter().copied().collect()).collect();
    (values, vectors)
}

#[test]
fn spheroidal_eigenpairs_match_dense_solver() {
    for (a, k) in [(0.5, 1), (0.9, 2), (0.3, 0), (0.7, -1)] {
        let bg = KerrBackground::new(1.0, a, k).unwrap();
        for omega in [-2.0, -0.3, 0.25, 1.1, 3.5] {
            let modes = spheroidal_eigs(&bg, omega, 4, 1e-12).unwrap();
            let (values, vectors) = dense_spheroidal(a, k, omega, 40);
            let m = k.unsigned_abs() as usize;
            for (n, mode) in modes.iter().enumerate() {
                let scale = 1.0 + values[n].abs();
                assert!((mode.lambda - values[n]).abs() < 1e-10 * scale, "a={a} k={k} w={omega} n={}", n + 1);
                // compare Θ pointwise up to a global sign
                let xs = [-0.95, -0.5, -0.1, 0.2, 0.6, 0.9];
                let dense: Vec<f64> = xs
                    .iter()
                    .map(|&x| normalized_legendre(m, 40, x).iter().zip(&vectors[n]).map(|(p, c)| p * c).sum())
                    .collect();
                let ours: Vec<f64> = xs.iter().map(|&x| mode.eval(x)).collect();
                let sign = if dense.iter().zip(&ours).map(|(p, q)| p * q).sum::<f64>() < 0.0 { -1.0 } else { 1.0 };
                for (p, q) in dense.iter().zip(&ours) {
                    assert!((sign * p - q).abs() < 1e-9, "eigenfunction mismatch a={a} k={k} w={omega} n={}", n + 1);
                }
            }
        }
    }
}

#[test]
fn schwarzschild_horizon_solution_matches_regge_wheeler_integrator() {
    let bg = KerrBackground::new(1.0, 0.0, 1).unwrap();
    let targets = [-20.0, -6.0, 0.0, 3.0, 8.0, 15.0, 25.0];
    for (ell, omega) in [(1.0, 0.3), (1.0, -0.8), (2.0, 1.5), (3.0, 0.45)] {
        let pot = RadialPotential::new(bg, omega, ell * (ell + 1.0));
        let jost = jost_acute(&pot, &targets, 1e-10).unwrap();
        let oracle = rw_horizon_solution(1.0, ell, omega, -80.0, 2e-3, &targets);
        let scale = oracle.iter().map(|z| z.norm()).fold(0.0, f64::max);
        for (i, z) in oracle.iter().enumerate() {
            let err = (jost.value(i) - z).norm() / scale;
            assert!(err < 1e-7, "l={ell} w={omega} u={}: {err:e}", targets[i]);
        }
    }
}

#[test]
fn reference_legendre_is_orthonormal() {
    let (x, w) = gauss_legendre(40);
    for m in 0..3 {
        let vals: Vec<Vec<f64>> = x.iter().map(|&xi| normalized_legendre(m, 6, xi)).collect();
        for i in 0..6 {
            for j in 0..6 {
                let s: f64 = (0..x.len()).map(|q| w[q] * vals[q][i] * vals[q][j]).sum();
                assert!((s - if i == j { 1.0 } else { 0.0 }).abs() < 1e-12);
            }
        }
    }
}
