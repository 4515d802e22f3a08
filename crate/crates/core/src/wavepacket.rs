//! Wave-packet initial data
//! `Ψ0 = Θ_{ñ,ω̃}(θ) η_L(u)/√(r²+a²) [c_in e^{-iω̃u}(1, ω̃) + c_out e^{iω̃u}(1, -ω̃)]`,
//! the `U = U₊ - U₋` split of the propagator kernel, and the packet scattering
//! experiment on the superradiant window.

use crate::angular::{spheroidal_eigs, AngularMode};
use crate::energy::{energy_inner_product, energy_report};
use crate::error::{Error, Result};
use crate::field::{FieldState, Grid};
use crate::geometry::{KerrBackground, RadialProfile};
use crate::radial::{RadialOptions, RadialPotential, Scattering, Transmission};
use crate::spectral::{chi_high, chi_low, project_all, SynthesisConfig};
use crate::timedomain::{evolve, EvolutionConfig};
use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

/// Standard bump `exp(1 - 1/(1-x²))` on `(-1, 1)`, `η(0) = 1`.
pub fn eta(x: f64) -> f64 {
    if x.abs() < 1.0 {
        (1.0 - 1.0 / (1.0 - x * x)).exp()
    } else {
        0.0
    }
}

/// `η_L(u) = η((u - L²)/L)/√L`.
pub fn eta_l(l: f64, u: f64) -> f64 {
    eta((u - l * l) / l) / l.sqrt()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WavePacketSpec {
    pub k: i32,
    /// 1-based angular mode index
    pub n_tilde: usize,
    pub omega_tilde: f64,
    pub c_in: C64,
    pub c_out: C64,
    #[serde(rename = "L")]
    pub l: f64,
}

impl WavePacketSpec {
    pub fn support(&self) -> (f64, f64) {
        (self.l * self.l - self.l, self.l * self.l + self.l)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.l > 0.0) || !self.l.is_finite() {
            return Err(Error::Domain(format!("packet scale L = {} must be positive", self.l)));
        }
        if self.n_tilde == 0 {
            return Err(Error::Domain("mode index n_tilde is 1-based".into()));
        }
        if !self.omega_tilde.is_finite() || !self.c_in.is_finite() || !self.c_out.is_finite() {
            return Err(Error::Domain("packet parameters must be finite".into()));
        }
        Ok(())
    }
}

/// Samples the packet on `grid`. `angular_tol` controls the seed mode `Θ_{ñ,ω̃}`.
pub fn build_wavepacket(spec: &WavePacketSpec, bg: &KerrBackground, grid: &Grid, angular_tol: f64) -> Result<FieldState> {
    spec.validate()?;
    grid.validate()?;
    if spec.k != bg.k {
        return Err(Error::GridMismatch(format!("packet k = {} but background k = {}", spec.k, bg.k)));
    }
    let (lo, hi) = spec.support();
    let u = &grid.u;
    if lo < u[0] || hi > u[u.len() - 1] {
        return Err(Error::SupportAtBoundary(format!(
            "packet support [{lo}, {hi}] not inside grid [{}, {}]",
            u[0],
            u[u.len() - 1]
        )));
    }
    if spec.omega_tilde != 0.0 {
        let h = u
            .windows(2)
            .filter(|p| p[1] >= lo && p[0] <= hi)
            .map(|p| p[1] - p[0])
            .fold(0.0, f64::max);
        let want = 2.0 * std::f64::consts::PI / spec.omega_tilde.abs() / 16.0;
        if h > want {
            return Err(Error::Domain(format!(
                "carrier under-resolved: spacing {h:.4} exceeds {want:.4} (16 points per wavelength)"
            )));
        }
    }
    let mode = seed_mode(bg, spec, angular_tol)?;
    let theta: Vec<f64> = grid.costheta.iter().map(|&x| mode.eval(x)).collect();
    let prof = RadialProfile::new(bg, u)?;
    let w = spec.omega_tilde;
    let mut state = FieldState::zeros(bg.k, grid.clone(), 0.0);
    for iu in 0..grid.nu() {
        let env = eta_l(spec.l, u[iu]);
        if env == 0.0 {
            continue;
        }
        let amp = env / prof.sigma[iu].sqrt();
        let ein = spec.c_in * C64::from_polar(1.0, -w * u[iu]);
        let eout = spec.c_out * C64::from_polar(1.0, w * u[iu]);
        let (p1, p2) = (ein + eout, w * (ein - eout));
        for (ix, th) in theta.iter().enumerate() {
            let i = grid.index(iu, ix);
            state.psi1[i] = amp * th * p1;
            state.psi2[i] = amp * th * p2;
        }
    }
    Ok(state)
}

fn seed_mode(bg: &KerrBackground, spec: &WavePacketSpec, tol: f64) -> Result<AngularMode> {
    Ok(spheroidal_eigs(bg, spec.omega_tilde, spec.n_tilde, tol)?.swap_remove(spec.n_tilde - 1))
}

pub type Mat2 = [[C64; 2]; 2];

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct UMatrices {
    pub u: Mat2,
    pub u_plus: Mat2,
    pub u_minus: Mat2,
}

/// `U = (1/2ω²)[[1, -ᾱ/β], [-α/β̄, 1]]` and its split into positive parts.
pub fn u_matrix(tr: &Transmission) -> Result<UMatrices> {
    let w = tr.omega;
    if w == 0.0 || tr.big_omega == 0.0 {
        return Err(Error::ExcludedFrequency(format!("U is singular at omega = {w}, Omega = {}", tr.big_omega)));
    }
    let (a, b) = (tr.alpha, tr.beta);
    let one = C64::new(1.0, 0.0);
    let c = 1.0 / (2.0 * w * w);
    let u = [[c * one, -c * a.conj() / b], [-c * a / b.conj(), c * one]];
    let zero = C64::new(0.0, 0.0);
    let u_minus = if tr.superradiant() {
        let ab = a * b;
        let phase = if ab.norm() > 0.0 { ab / ab.norm() } else { one };
        let d = ((a / b).norm() - 1.0) / (4.0 * w * w);
        [[d * one, d * phase.conj()], [d * phase, d * one]]
    } else {
        [[zero; 2]; 2]
    };
    let mut u_plus = u;
    for i in 0..2 {
        for j in 0..2 {
            u_plus[i][j] += u_minus[i][j];
        }
    }
    Ok(UMatrices { u, u_plus, u_minus })
}

/// Eigenvalues of a Hermitian 2×2 matrix, ascending.
pub fn hermitian_eigenvalues(m: &Mat2) -> [f64; 2] {
    let (p, q) = (m[0][0].re, m[1][1].re);
    let mean = 0.5 * (p + q);
    let rad = (0.25 * (p - q) * (p - q) + m[0][1].norm_sqr()).sqrt();
    [mean - rad, mean + rad]
}

/// `⟨Φ̀(u), U Φ̀(v)⟩` with `Φ̀ = (conj φ̀, φ̀)` and the inner product conjugate-linear in the first slot.
///
/// Equal to `(1/ωΩ) Σ t_ab φ_a(u) φ_b(v)` for the `α, β` convention of the radial module.
pub fn u_form(um: &UMatrices, grave_u: C64, grave_v: C64) -> C64 {
    let x = [grave_u.conj(), grave_u];
    let y = [grave_v.conj(), grave_v];
    let mut s = C64::new(0.0, 0.0);
    for i in 0..2 {
        for j in 0..2 {
            s += x[i].conj() * um.u[i][j] * y[j];
        }
    }
    s
}

/// `(1/ωΩ) Σ t_ab φ_a(u) φ_b(v)` with `φ_1 = Re φ́`, `φ_2 = Im φ́`.
pub fn t_form(tr: &Transmission, acute_u: C64, acute_v: C64) -> f64 {
    let a = [acute_u.re, acute_u.im];
    let b = [acute_v.re, acute_v.im];
    let mut s = 0.0;
    for i in 0..2 {
        for j in 0..2 {
            s += tr.t[i][j] * a[i] * b[j];
        }
    }
    s / (tr.omega * tr.big_omega)
}

/// Largest `|t_form - u_form|` over all pairs of grid points, relative to the largest `|t_form|`.
pub fn u_identity_residual(sc: &Scattering) -> Result<f64> {
    let um = u_matrix(&sc.transmission)?;
    let n = sc.acute.len();
    let (mut err, mut scale) = (0.0f64, 0.0f64);
    for i in 0..n {
        for j in 0..n {
            let lhs = t_form(&sc.transmission, sc.acute.value(i), sc.acute.value(j));
            let rhs = u_form(&um, sc.grave.value(i), sc.grave.value(j));
            err = err.max((rhs - lhs).norm());
            scale = scale.max(lhs.abs());
        }
    }
    Ok(if scale > 0.0 { err / scale } else { err })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuperradianceConfig {
    pub n_tilde: usize,
    /// carrier frequency; defaults to the midpoint of `(ω₀, 0)`
    pub omega_tilde: Option<f64>,
    pub c_in: C64,
    pub c_out: C64,
    #[serde(rename = "L")]
    pub ls: Vec<f64>,
    /// inner radius of the exterior region; defaults to `1.2 r1`
    pub r_inner: Option<f64>,
    /// final time; defaults to `2L²` so the scattered packet has separated
    pub t_end: Option<f64>,
    pub du: f64,
    pub ncostheta: usize,
    /// tail energies are reported for `n₀ = 1..=n_max + 1`
    pub n_max: usize,
    pub angular_tol: f64,
    pub radial_tol: f64,
    /// when set, also report the low-frequency energy from a spectral projection
    pub spectral: Option<SynthesisConfig>,
}

impl Default for SuperradianceConfig {
    fn default() -> Self {
        Self {
            n_tilde: 1,
            omega_tilde: None,
            c_in: C64::new(1.0, 0.0),
            c_out: C64::new(0.0, 0.0),
            ls: vec![4.0, 6.0, 8.0],
            r_inner: None,
            t_end: None,
            du: 0.1,
            ncostheta: 16,
            n_max: 4,
            angular_tol: 1e-12,
            radial_tol: 1e-10,
            spectral: None,
        }
    }
}

impl SuperradianceConfig {
    pub fn carrier(&self, bg: &KerrBackground) -> f64 {
        self.omega_tilde.unwrap_or(0.5 * bg.omega0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TailEnergy {
    pub n0: usize,
    pub energy: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PacketRecord {
    #[serde(rename = "L")]
    pub l: f64,
    /// `2π ⟨Ψ0, Ψ0⟩`
    pub total_energy: f64,
    /// energy beyond `R` at `t_end`
    pub exterior_energy: f64,
    /// `|α/β|²` at the carrier
    pub flux_ratio: f64,
    /// exterior energy at `t_end` of the modes `n ≥ n₀`
    pub tail_energy: Vec<TailEnergy>,
    pub superradiant: bool,
    /// `⟨Ψ0, Ψ0⟩`
    pub packet_norm: f64,
    pub omega_tilde: f64,
    pub t_end: f64,
    pub r_inner: f64,
    /// outgoing energy at `t_end` over the initial energy
    pub amplification: f64,
    /// `E<_N` when a spectral configuration was given
    pub low_energy: Option<f64>,
    /// `|⟨Ψ(t_end), Ψ(t_end)⟩ - ⟨Ψ0, Ψ0⟩| / |⟨Ψ0, Ψ0⟩|`
    pub energy_drift: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuperradianceReport {
    pub mass: f64,
    pub spin: f64,
    pub k: i32,
    pub omega0: f64,
    pub records: Vec<PacketRecord>,
}

/// Packet spec and a time-domain grid wide enough for the causal buffer up to `t_end`.
pub fn packet_setup(bg: &KerrBackground, cfg: &SuperradianceConfig, l: f64) -> Result<(WavePacketSpec, Grid, f64)> {
    let spec = WavePacketSpec {
        k: bg.k,
        n_tilde: cfg.n_tilde,
        omega_tilde: cfg.carrier(bg),
        c_in: cfg.c_in,
        c_out: cfg.c_out,
        l,
    };
    spec.validate()?;
    let t_end = cfg.t_end.unwrap_or(2.0 * l * l);
    let (lo, hi) = spec.support();
    // characteristic speeds stay below 1.05 for |a| < M
    let pad = 1.05 * t_end + 5.0;
    let (u_min, u_max) = (lo - pad, hi + pad);
    let nu = ((u_max - u_min) / cfg.du).ceil() as usize + 1;
    let grid = Grid::uniform(u_min, u_max, nu, cfg.ncostheta)?;
    Ok((spec, grid, t_end))
}

/// Energy beyond `r_inner` of `Ψ - Σ_{n<n₀} P_n Ψ`, `P_n` the angular projection onto `modes[n-1]`.
pub fn tail_energies(state: &FieldState, bg: &KerrBackground, modes: &[AngularMode], r_inner: f64) -> Result<Vec<TailEnergy>> {
    let g = &state.grid;
    let (nu, nx) = (g.nu(), g.nx());
    let theta: Vec<Vec<f64>> = modes.iter().map(|m| g.costheta.iter().map(|&x| m.eval(x)).collect()).collect();
    let wx = &g.costheta_weights;
    let mut rest = state.clone();
    rest.derivatives = None;
    let mut out = Vec::with_capacity(modes.len() + 1);
    for n0 in 1..=modes.len() + 1 {
        out.push(TailEnergy { n0, energy: energy_report(&rest, bg, r_inner)?.exterior_energy });
        if n0 > modes.len() {
            break;
        }
        let th = &theta[n0 - 1];
        for iu in 0..nu {
            let row = iu * nx..(iu + 1) * nx;
            for psi in [&mut rest.psi1, &mut rest.psi2] {
                let c: C64 = psi[row.clone()].iter().zip(th).zip(wx).map(|((p, t), w)| p * t * w).sum();
                for (p, t) in psi[row.clone()].iter_mut().zip(th) {
                    *p -= c * t;
                }
            }
        }
    }
    Ok(out)
}

/// Transmission data at the carrier for the seed mode.
pub fn carrier_transmission(bg: &KerrBackground, cfg: &SuperradianceConfig) -> Result<Transmission> {
    let w = cfg.carrier(bg);
    let modes = spheroidal_eigs(bg, w, cfg.n_tilde, cfg.angular_tol)?;
    let pot = RadialPotential::new(*bg, w, modes[cfg.n_tilde - 1].lambda);
    crate::radial::transmission_with(&pot, &RadialOptions::from_tol(cfg.radial_tol))
}

pub fn run_packet(bg: &KerrBackground, cfg: &SuperradianceConfig, l: f64, tr: &Transmission) -> Result<PacketRecord> {
    let (spec, grid, t_end) = packet_setup(bg, cfg, l)?;
    let psi0 = build_wavepacket(&spec, bg, &grid, cfg.angular_tol)?;
    let norm = energy_inner_product(bg, &psi0, &psi0)?.re;
    let r_inner = cfg.r_inner.unwrap_or(1.2 * bg.r1);
    let low_energy = match &cfg.spectral {
        Some(sc) => {
            let proj = project_all(bg, &psi0, sc)?;
            let j = sc.j;
            Some(proj.spectral_form(|w| chi_low(w, j) * (chi_low(w, j) + 2.0 * chi_high(w, j)), None))
        }
        None => None,
    };
    let ev_cfg = EvolutionConfig { snapshot_times: vec![t_end], ..Default::default() };
    let ev = evolve(&psi0, bg, &ev_cfg)?;
    let last = &ev.snapshots[0];
    let report = energy_report(last, bg, r_inner)?;
    // outgoing part: halfway between the barrier and the reflected packet centre
    let u_out = 0.5 * (t_end - l * l).max(0.0) + 0.5 * l;
    let r_out = bg.inverse_r(u_out)?;
    let outgoing = energy_report(last, bg, r_out)?.exterior_energy;
    let total = 2.0 * std::f64::consts::PI * norm;
    let modes = spheroidal_eigs(bg, spec.omega_tilde, cfg.n_max, cfg.angular_tol)?;
    let tail_energy = tail_energies(last, bg, &modes, r_inner)?;
    log::info!("L = {l}: norm {norm:.6e}, exterior {:.6e}, outgoing/initial {:.6e}", report.exterior_energy, outgoing / total);
    Ok(PacketRecord {
        l,
        total_energy: total,
        exterior_energy: report.exterior_energy,
        flux_ratio: tr.reflection(),
        tail_energy,
        superradiant: tr.superradiant(),
        packet_norm: norm,
        omega_tilde: spec.omega_tilde,
        t_end,
        r_inner,
        amplification: outgoing / total,
        low_energy,
        energy_drift: (ev.energies[0].1 - norm).abs() / norm.abs(),
    })
}

/// One evolution per packet scale; the runs are independent.
pub fn superradiance_experiment(bg: &KerrBackground, cfg: &SuperradianceConfig) -> Result<SuperradianceReport> {
    if cfg.ls.is_empty() {
        return Err(Error::Config("superradiance experiment needs at least one packet scale L".into()));
    }
    let tr = carrier_transmission(bg, cfg)?;
    let records = cfg.ls.iter().map(|&l| run_packet(bg, cfg, l, &tr)).collect::<Result<Vec<_>>>()?;
    Ok(SuperradianceReport { mass: bg.mass, spin: bg.spin, k: bg.k, omega0: bg.omega0, records })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::radial::RadialOptions;

    fn bg() -> KerrBackground {
        KerrBackground::new(1.0, 0.9, 1).unwrap()
    }

    fn spec(l: f64, w: f64) -> WavePacketSpec {
        WavePacketSpec { k: 1, n_tilde: 1, omega_tilde: w, c_in: C64::new(1.0, 0.0), c_out: C64::new(0.0, 0.0), l }
    }

    #[test]
    fn eta_shape() {
        assert_eq!(eta(0.0), 1.0);
        assert_eq!(eta(1.0), 0.0);
        assert_eq!(eta(-1.5), 0.0);
        assert!((eta(0.5) - eta(-0.5)).abs() < 1e-16);
        assert_eq!(eta_l(4.0, 16.0), 0.5);
        assert_eq!(eta_l(4.0, 11.9), 0.0);
        assert_eq!(eta_l(4.0, 20.1), 0.0);
    }

    #[test]
    fn eta_l_norm_is_scale_free() {
        let norm = |l: f64| {
            let n = 20000;
            let h = 2.0 * l / n as f64;
            (0..n).map(|i| eta_l(l, l * l - l + (i as f64 + 0.5) * h).powi(2) * h).sum::<f64>()
        };
        let n4 = norm(4.0);
        for l in [1.0, 6.0, 8.0, 20.0] {
            assert!((norm(l) - n4).abs() < 1e-10 * n4);
        }
    }

    #[test]
    fn ingoing_packet_components() {
        let b = bg();
        let s = spec(4.0, -0.3);
        let grid = Grid::uniform(10.0, 22.0, 601, 8).unwrap();
        let st = build_wavepacket(&s, &b, &grid, 1e-12).unwrap();
        let mut seen = 0.0f64;
        for i in 0..st.psi1.len() {
            assert!((st.psi2[i] - s.omega_tilde * st.psi1[i]).norm() < 1e-15);
            seen = seen.max(st.psi1[i].norm());
        }
        assert!(seen > 0.0);

        // amplitude at the centre: Θ(x) η(0)/√L /√s
        let iu = 300;
        assert!((grid.u[iu] - 16.0).abs() < 1e-12);
        let modes = spheroidal_eigs(&b, -0.3, 1, 1e-12).unwrap();
        let prof = RadialProfile::new(&b, &grid.u[iu..=iu]).unwrap();
        let x = grid.costheta[3];
        let want = modes[0].eval(x) * 0.5 / prof.sigma[0].sqrt();
        let phase = C64::from_polar(1.0, 0.3 * 16.0);
        assert!((st.psi1[grid.index(iu, 3)] - want * phase).norm() < 1e-13);
    }

    #[test]
    fn packet_preconditions() {
        let b = bg();
        let grid = Grid::uniform(13.0, 22.0, 601, 8).unwrap();
        assert!(matches!(build_wavepacket(&spec(4.0, -0.3), &b, &grid, 1e-12), Err(Error::SupportAtBoundary(_))));
        let coarse = Grid::uniform(10.0, 22.0, 21, 8).unwrap();
        assert!(matches!(build_wavepacket(&spec(4.0, -3.0), &b, &coarse, 1e-12), Err(Error::Domain(_))));
        let mut bad = spec(4.0, -0.3);
        bad.l = 0.0;
        assert!(bad.validate().is_err());
    }

    #[test]
    fn u_split_and_identity() {
        let b = bg();
        let opts = RadialOptions::from_tol(1e-11);
        let grid: Vec<f64> = vec![-7.3, -1.1, 0.4, 2.9, 6.5, 13.0];
        for w in [-0.25, -0.1, 0.2, -0.6, 0.9] {
            let lambda = spheroidal_eigs(&b, w, 2, 1e-12).unwrap()[1].lambda;
            let pot = RadialPotential::new(b, w, lambda);
            let sc = Scattering::solve(&pot, &grid, &opts).unwrap();
            let um = u_matrix(&sc.transmission).unwrap();
            for i in 0..2 {
                for j in 0..2 {
                    let d = um.u[i][j] - (um.u_plus[i][j] - um.u_minus[i][j]);
                    assert!(d.norm() < 1e-14 * um.u[0][0].norm());
                }
            }
            let neg = hermitian_eigenvalues(&um.u_minus);
            let pos = hermitian_eigenvalues(&um.u_plus);
            let s = um.u[0][0].re;
            assert!(neg[0] >= -1e-12 * s && pos[0] >= -1e-12 * s, "w = {w}: {neg:?} {pos:?}");
            if sc.transmission.superradiant() {
                assert!(sc.transmission.reflection() > 1.0);
                assert!(um.u_minus[0][0].re > 0.0);
                assert!(hermitian_eigenvalues(&um.u)[0] < 0.0);
            } else {
                assert!(um.u_minus.iter().flatten().all(|c| c.norm() == 0.0));
                assert!(hermitian_eigenvalues(&um.u)[0] >= -1e-12 * s);
                assert!(sc.transmission.beta.norm() > sc.transmission.alpha.norm());
            }
            let res = u_identity_residual(&sc).unwrap();
            assert!(res < 1e-7, "w = {w}: identity residual {res:e}");
        }
    }
}
