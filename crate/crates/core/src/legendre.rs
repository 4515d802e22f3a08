//! Orthonormal associated Legendre functions `P̄_l^m`, with `∫_{-1}^{1} P̄_l^m P̄_{l'}^m dx = δ_{ll'}`.
//!
//! No Condon-Shortley phase; `P̄_m^m > 0` on the open interval.

/// Recurrence coefficient `sqrt((l^2 - m^2)/(4 l^2 - 1))`: `x P̄_l = a_{l+1} P̄_{l+1} + a_l P̄_{l-1}`.
pub fn recurrence_coeff(l: usize, m: usize) -> f64 {
    if l <= m {
        return 0.0;
    }
    let (l, m) = (l as f64, m as f64);
    ((l * l - m * m) / (4.0 * l * l - 1.0)).sqrt()
}

/// Values `P̄_l^m(x)` for `l = m, …, m + count - 1`.
pub fn values(m: usize, count: usize, x: f64) -> Vec<f64> {
    let mut out = Vec::with_capacity(count);
    if count == 0 {
        return out;
    }
    let mut prod = 1.0;
    for i in 1..=m {
        prod *= (2 * i - 1) as f64 / (2 * i) as f64;
    }
    let s2 = (1.0 - x * x).max(0.0);
    let pmm = ((2 * m + 1) as f64 / 2.0).sqrt() * prod.sqrt() * s2.powf(0.5 * m as f64);
    out.push(pmm);
    if count == 1 {
        return out;
    }
    out.push(x * ((2 * m + 3) as f64).sqrt() * pmm);
    for j in 2..count {
        let l = m + j - 1;
        let next = (x * out[j - 1] - recurrence_coeff(l, m) * out[j - 2]) / recurrence_coeff(l + 1, m);
        out.push(next);
    }
    out
}

/// Values and `d/dx` for `l = m, …, m + count - 1`; requires `|x| < 1`.
pub fn values_and_derivatives(m: usize, count: usize, x: f64) -> (Vec<f64>, Vec<f64>) {
    let p = values(m, count, x);
    let s2 = 1.0 - x * x;
    let mut dp = Vec::with_capacity(count);
    for (j, &pl) in p.iter().enumerate() {
        let l = (m + j) as f64;
        let lower = if j > 0 {
            let mf = m as f64;
            ((2.0 * l + 1.0) * (l - mf) * (l + mf) / (2.0 * l - 1.0)).sqrt() * p[j - 1]
        } else {
            0.0
        };
        dp.push((-l * x * pl + lower) / s2);
    }
    (p, dp)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quadrature::gauss_legendre;

    #[test]
    fn orthonormal() {
        let (x, w) = gauss_legendre(80);
        for m in [0usize, 1, 2, 5] {
            let n = 12;
            let mut gram = vec![vec![0.0; n]; n];
            for (xi, wi) in x.iter().zip(&w) {
                let p = values(m, n, *xi);
                for i in 0..n {
                    for j in 0..n {
                        gram[i][j] += wi * p[i] * p[j];
                    }
                }
            }
            for i in 0..n {
                for j in 0..n {
                    let target = if i == j { 1.0 } else { 0.0 };
                    assert!((gram[i][j] - target).abs() < 1e-12, "m={m} {i} {j}");
                }
            }
        }
    }

    #[test]
    fn closed_forms() {
        let x: f64 = 0.3;
        let p = values(1, 2, x);
        let s = (1.0 - x * x).sqrt();
        assert!((p[0] - (3.0f64 / 4.0).sqrt() * s).abs() < 1e-15);
        assert!((p[1] - (15.0f64 / 4.0).sqrt() * x * s).abs() < 1e-15);
    }

    #[test]
    fn derivatives_match_differences() {
        for m in [0usize, 1, 3] {
            for &x in &[-0.7, 0.1, 0.55] {
                let (_, dp) = values_and_derivatives(m, 10, x);
                let h = 1e-6;
                let up = values(m, 10, x + h);
                let dn = values(m, 10, x - h);
                for j in 0..10 {
                    let fd = (up[j] - dn[j]) / (2.0 * h);
                    assert!((fd - dp[j]).abs() < 1e-6 * (1.0 + dp[j].abs()), "m={m} x={x} j={j}");
                }
            }
        }
    }
}
