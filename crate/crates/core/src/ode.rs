//! Adaptive Dormand-Prince 5(4) stepper for small real systems.

use crate::error::{Error, Result};

const C: [f64; 7] = [0.0, 1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0];
const A: [[f64; 6]; 7] = [
    [0.0; 6],
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
    [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
    [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
];
const B5: [f64; 7] = [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0, 0.0];
const B4: [f64; 7] = [
    5179.0 / 57600.0,
    0.0,
    7571.0 / 16695.0,
    393.0 / 640.0,
    -92097.0 / 339200.0,
    187.0 / 2100.0,
    1.0 / 40.0,
];

/// Error weights: the stepper accepts a step when every `|err_i| <= weight_i`.
pub trait System<const N: usize> {
    fn rhs(&self, t: f64, y: &[f64; N]) -> [f64; N];
    fn weights(&self, y: &[f64; N]) -> [f64; N];
}

#[derive(Debug, Clone)]
pub struct Dopri5<const N: usize> {
    pub h: f64,
    pub min_step: f64,
    pub max_step: f64,
    pub accepted: usize,
    pub rejected: usize,
    fsal: Option<[f64; N]>,
}

impl<const N: usize> Dopri5<N> {
    pub fn new(h0: f64, max_step: f64) -> Self {
        Self { h: h0, min_step: 1e-12, max_step, accepted: 0, rejected: 0, fsal: None }
    }

    /// Drops the cached derivative; call after modifying the state externally.
    pub fn reset(&mut self) {
        self.fsal = None;
    }

    /// Advances `y` from `t` to exactly `t_end` (either direction).
    pub fn advance<S: System<N>>(&mut self, sys: &S, t: &mut f64, y: &mut [f64; N], t_end: f64) -> Result<()> {
        let dir = if t_end >= *t { 1.0 } else { -1.0 };
        while (t_end - *t) * dir > 0.0 {
            let remaining = (t_end - *t).abs();
            let mut h = self.h.abs().min(self.max_step);
            let last = h >= remaining * (1.0 - 1e-12);
            if last {
                h = remaining;
            }
            let k1 = match self.fsal {
                Some(k) => k,
                None => sys.rhs(*t, y),
            };
            let mut k = [[0.0; N]; 7];
            k[0] = k1;
            let hs = h * dir;
            for s in 1..7 {
                let mut ys = *y;
                for (j, kj) in k.iter().enumerate().take(s) {
                    let a = A[s][j];
                    if a != 0.0 {
                        for i in 0..N {
                            ys[i] += hs * a * kj[i];
                        }
                    }
                }
                k[s] = sys.rhs(*t + C[s] * hs, &ys);
            }
            let mut y5 = *y;
            let mut err = [0.0; N];
            for i in 0..N {
                let mut d5 = 0.0;
                let mut d4 = 0.0;
                for s in 0..7 {
                    d5 += B5[s] * k[s][i];
                    d4 += B4[s] * k[s][i];
                }
                y5[i] += hs * d5;
                err[i] = hs * (d5 - d4);
            }
            let w_old = sys.weights(y);
            let w_new = sys.weights(&y5);
            let mut ratio = 0.0f64;
            for i in 0..N {
                let w = w_old[i].max(w_new[i]);
                ratio = ratio.max(err[i].abs() / w);
            }
            if !ratio.is_finite() {
                return Err(Error::Breakdown(format!("non-finite ODE state near t = {}", *t)));
            }
            let factor = if ratio == 0.0 { 5.0 } else { (0.9 * ratio.powf(-0.2)).clamp(0.2, 5.0) };
            if ratio <= 1.0 {
                *t = if last { t_end } else { *t + hs };
                *y = y5;
                self.fsal = Some(k[6]);
                self.accepted += 1;
                // a shortened final step says little about growing h
                if !last || factor < 1.0 {
                    self.h = h * factor;
                }
            } else {
                self.rejected += 1;
                self.h = h * factor.min(1.0);
                if self.h < self.min_step * (1.0 + t.abs()) {
                    return Err(Error::StepUnderflow { u: *t });
                }
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    struct Oscillator;

    impl System<2> for Oscillator {
        fn rhs(&self, _t: f64, y: &[f64; 2]) -> [f64; 2] {
            [y[1], -y[0]]
        }
        fn weights(&self, y: &[f64; 2]) -> [f64; 2] {
            let s = 1e-12 * (y[0].abs() + y[1].abs()) + 1e-300;
            [s, s]
        }
    }

    #[test]
    fn harmonic_oscillator() {
        let mut st = Dopri5::new(0.1, 1.0);
        let mut t = 0.0;
        let mut y = [1.0, 0.0];
        for j in 1..=20 {
            st.advance(&Oscillator, &mut t, &mut y, j as f64).unwrap();
            assert_eq!(t, j as f64);
        }
        assert!((y[0] - 20f64.cos()).abs() < 1e-9);
        assert!((y[1] + 20f64.sin()).abs() < 1e-9);
    }

    #[test]
    fn backwards() {
        let mut st = Dopri5::new(0.1, 1.0);
        let mut t = 0.0;
        let mut y = [1.0, 0.0];
        st.advance(&Oscillator, &mut t, &mut y, -3.0).unwrap();
        assert!((y[0] - 3f64.cos()).abs() < 1e-10);
        assert!((y[1] - 3f64.sin()).abs() < 1e-10);
    }

    struct Exponential;

    impl System<1> for Exponential {
        fn rhs(&self, _t: f64, y: &[f64; 1]) -> [f64; 1] {
            [y[0]]
        }
        fn weights(&self, y: &[f64; 1]) -> [f64; 1] {
            [1e-13 * y[0].abs()]
        }
    }

    #[test]
    fn fifth_order_convergence() {
        let mut st = Dopri5::new(0.01, 0.5);
        let mut t = 0.0;
        let mut y = [1.0];
        st.advance(&Exponential, &mut t, &mut y, 2.0).unwrap();
        assert!(((y[0] - 2f64.exp()) / 2f64.exp()).abs() < 1e-11);
    }
}
