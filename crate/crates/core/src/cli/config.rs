//! Run configuration: one TOML file (sections or dotted `section.key = value`
//! lines) fully determines a run. Unknown keys are rejected.

use crate::error::{Error, Result};
use crate::field::Grid;
use crate::geometry::KerrBackground;
use crate::spectral::SynthesisConfig;
use crate::wavepacket::SuperradianceConfig;
use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};
use std::path::Path;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BackgroundSection {
    #[serde(rename = "M")]
    pub mass: f64,
    pub a: f64,
    pub k: i32,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct AngularSection {
    pub n_max: usize,
    pub tol: f64,
}

impl Default for AngularSection {
    fn default() -> Self {
        Self { n_max: 3, tol: 1e-12 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RadialSection {
    pub tol: f64,
    /// grid on which Wronskian drift is monitored
    pub u_range: [f64; 2],
    pub u_points: usize,
    pub far_factor: f64,
}

impl Default for RadialSection {
    fn default() -> Self {
        Self { tol: 1e-10, u_range: [-30.0, 60.0], u_points: 31, far_factor: 30.0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SpectralSection {
    #[serde(rename = "J")]
    pub j: f64,
    #[serde(rename = "W")]
    pub w: f64,
    /// Gauss order per panel
    pub panels: usize,
    pub max_panel_width: f64,
    pub exclusion_radius: f64,
    pub refine_levels: usize,
    pub refine_ratio: f64,
    /// modes used in synthesis; defaults to `angular.n_max`
    pub n_max: Option<usize>,
}

impl Default for SpectralSection {
    fn default() -> Self {
        let d = SynthesisConfig::default();
        Self {
            j: d.j,
            w: d.window,
            panels: d.panel_order,
            max_panel_width: d.max_panel_width,
            exclusion_radius: d.exclusion_radius,
            refine_levels: d.refine_levels,
            refine_ratio: d.refine_ratio,
            n_max: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GridSection {
    pub u_min: f64,
    pub u_max: f64,
    pub nu: usize,
    pub ncostheta: usize,
}

impl Default for GridSection {
    fn default() -> Self {
        Self { u_min: -50.0, u_max: 70.0, nu: 4001, ncostheta: 32 }
    }
}

/// Frequency list for `eig` and `scatter`: `count` equispaced points on
/// `[min, max]`, minus those within `spectral.exclusion_radius` of `0` and `ω₀`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct FrequencySection {
    pub min: f64,
    pub max: f64,
    pub count: usize,
}

impl Default for FrequencySection {
    fn default() -> Self {
        Self { min: -2.0, max: 2.0, count: 201 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DataKind {
    /// `P̄_l^{|k|}(cos θ) exp(-(u - center)²/(2 width²))`
    Gaussian,
    /// the wave packet of the `superradiance` section at scale `data.L`
    Wavepacket,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DataSection {
    pub kind: DataKind,
    pub center: f64,
    pub width: f64,
    /// Legendre degree of the angular profile; defaults to `|k|`
    pub l: Option<usize>,
    /// set `Ψ² = i ∂_tΦ` for an ingoing profile instead of zero
    pub ingoing: bool,
    #[serde(rename = "L")]
    pub scale: f64,
}

impl Default for DataSection {
    fn default() -> Self {
        Self { kind: DataKind::Gaussian, center: 10.0, width: 1.5, l: None, ingoing: false, scale: 4.0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct EvolveSection {
    pub times: Vec<f64>,
    pub dt: Option<f64>,
    pub cfl_safety: f64,
    pub boundary_tol: f64,
    /// also write a CSV export next to each snapshot
    pub csv: bool,
}

impl Default for EvolveSection {
    fn default() -> Self {
        Self { times: vec![0.0, 10.0, 20.0, 30.0, 40.0], dt: None, cfl_safety: 0.9, boundary_tol: 1e-6, csv: false }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct EnergySection {
    /// inner radius in units of `r1`
    pub r_factor: f64,
    pub max_growth: f64,
}

impl Default for EnergySection {
    fn default() -> Self {
        Self { r_factor: 1.2, max_growth: 2.0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CompareSection {
    pub t: f64,
    pub u_lo: f64,
    pub u_hi: f64,
}

impl Default for CompareSection {
    fn default() -> Self {
        Self { t: 20.0, u_lo: -10.0, u_hi: 30.0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SuperradianceSection {
    pub n_tilde: usize,
    pub omega_tilde: Option<f64>,
    pub c_in: [f64; 2],
    pub c_out: [f64; 2],
    #[serde(rename = "L")]
    pub scales: Vec<f64>,
    pub t_end: Option<f64>,
    pub du: f64,
    pub ncostheta: usize,
    pub n_max: usize,
    pub low_energy: bool,
}

impl Default for SuperradianceSection {
    fn default() -> Self {
        let d = SuperradianceConfig::default();
        Self {
            n_tilde: d.n_tilde,
            omega_tilde: d.omega_tilde,
            c_in: [d.c_in.re, d.c_in.im],
            c_out: [d.c_out.re, d.c_out.im],
            scales: d.ls,
            t_end: d.t_end,
            du: d.du,
            ncostheta: d.ncostheta,
            n_max: d.n_max,
            low_energy: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub background: BackgroundSection,
    #[serde(default)]
    pub angular: AngularSection,
    #[serde(default)]
    pub radial: RadialSection,
    #[serde(default)]
    pub spectral: SpectralSection,
    #[serde(default)]
    pub grid: GridSection,
    #[serde(default)]
    pub frequencies: FrequencySection,
    #[serde(default)]
    pub data: DataSection,
    #[serde(default)]
    pub evolve: EvolveSection,
    #[serde(default)]
    pub energy: EnergySection,
    #[serde(default)]
    pub compare: CompareSection,
    #[serde(default)]
    pub superradiance: SuperradianceSection,
}

impl RunConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: Self = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_toml(&text).map_err(|e| match e {
            Error::Config(m) => Error::Config(format!("{}: {m}", path.display())),
            other => other,
        })
    }

    pub fn background(&self) -> Result<KerrBackground> {
        let b = &self.background;
        KerrBackground::new(b.mass, b.a, b.k).map_err(|e| Error::Config(format!("background: {e}")))
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |field: &str, why: &str| Err(Error::Config(format!("{field}: {why}")));
        let b = &self.background;
        if !(b.mass > 0.0) || !(b.a.abs() < b.mass) {
            return bad("background", &format!("need M > 0 and M² > a² (M = {}, a = {})", b.mass, b.a));
        }
        self.background()?;
        if self.angular.n_max == 0 {
            return bad("angular.n_max", "must be at least 1");
        }
        for (name, v) in [
            ("angular.tol", self.angular.tol),
            ("radial.tol", self.radial.tol),
            ("radial.far_factor", self.radial.far_factor),
            ("evolve.boundary_tol", self.evolve.boundary_tol),
            ("evolve.cfl_safety", self.evolve.cfl_safety),
            ("data.width", self.data.width),
            ("data.L", self.data.scale),
            ("superradiance.du", self.superradiance.du),
        ] {
            if !(v > 0.0) || !v.is_finite() {
                return bad(name, &format!("must be positive, got {v}"));
            }
        }
        let [lo, hi] = self.radial.u_range;
        if !(lo < hi) || self.radial.u_points == 0 {
            return bad("radial.u_range", "need u_range[0] < u_range[1] and u_points >= 1");
        }
        let g = &self.grid;
        if !(g.u_min < g.u_max) || g.nu < 3 || g.ncostheta < 2 {
            return bad("grid", "need u_min < u_max, nu >= 3, ncostheta >= 2");
        }
        if self.data.kind == DataKind::Gaussian {
            let reach = 8.0 * self.data.width;
            if self.data.center - reach <= g.u_min || self.data.center + reach >= g.u_max {
                return bad("data.center", "grid does not cover the data support (center ± 8 width)");
            }
        }
        let f = &self.frequencies;
        if !(f.min <= f.max) || f.count == 0 {
            return bad("frequencies", "need min <= max and count >= 1");
        }
        if self.evolve.times.iter().any(|t| !(*t >= 0.0)) {
            return bad("evolve.times", "times must be non-negative");
        }
        if self.superradiance.scales.is_empty() || self.superradiance.scales.iter().any(|l| !(*l > 0.0)) {
            return bad("superradiance.L", "need a non-empty list of positive scales");
        }
        if self.superradiance.n_tilde == 0 {
            return bad("superradiance.n_tilde", "mode index is 1-based");
        }
        self.synthesis().validate()?;
        Ok(())
    }

    pub fn synthesis(&self) -> SynthesisConfig {
        let s = &self.spectral;
        SynthesisConfig {
            n_max: s.n_max.unwrap_or(self.angular.n_max),
            window: s.w,
            j: s.j,
            exclusion_radius: s.exclusion_radius,
            refine_levels: s.refine_levels,
            refine_ratio: s.refine_ratio,
            panel_order: s.panels,
            max_panel_width: s.max_panel_width,
            angular_tol: self.angular.tol,
            radial_tol: self.radial.tol,
            far_factor: self.radial.far_factor,
        }
    }

    pub fn superradiance_config(&self) -> SuperradianceConfig {
        let s = &self.superradiance;
        SuperradianceConfig {
            n_tilde: s.n_tilde,
            omega_tilde: s.omega_tilde,
            c_in: C64::new(s.c_in[0], s.c_in[1]),
            c_out: C64::new(s.c_out[0], s.c_out[1]),
            ls: s.scales.clone(),
            r_inner: None,
            t_end: s.t_end,
            du: s.du,
            ncostheta: s.ncostheta,
            n_max: s.n_max,
            angular_tol: self.angular.tol,
            radial_tol: self.radial.tol,
            spectral: s.low_energy.then(|| self.synthesis()),
        }
    }

    /// Frequencies for mode tables, with the excluded neighbourhoods removed.
    pub fn frequency_list(&self, bg: &KerrBackground) -> Vec<f64> {
        let f = &self.frequencies;
        let r = self.spectral.exclusion_radius;
        (0..f.count)
            .map(|i| if f.count == 1 { f.min } else { f.min + (f.max - f.min) * i as f64 / (f.count - 1) as f64 })
            .filter(|w| w.abs() >= r && (w - bg.omega0).abs() >= r)
            .collect()
    }

    pub fn time_grid(&self) -> Result<Grid> {
        let g = &self.grid;
        Grid::uniform(g.u_min, g.u_max, g.nu, g.ncostheta)
    }

    /// Grid used to sample data for spectral projection: same `u` nodes, Gauss nodes in `cos θ`.
    pub fn projection_grid(&self) -> Result<Grid> {
        let g = &self.grid;
        Grid::uniform_gauss(g.u_min, g.u_max, g.nu, g.ncostheta.max(16))
    }

    pub fn r_inner(&self, bg: &KerrBackground) -> f64 {
        self.energy.r_factor * bg.r1
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = "background.M = 1.0\nbackground.a = 0.5\nbackground.k = 1\n";

    #[test]
    fn dotted_keys_and_defaults() {
        let cfg = RunConfig::from_toml(MINIMAL).unwrap();
        assert_eq!(cfg.background.a, 0.5);
        assert_eq!(cfg.angular, AngularSection::default());
        let text = format!("{MINIMAL}spectral.J = 0.5\ngrid.nu = 101\n[angular]\nn_max = 2\n");
        let cfg = RunConfig::from_toml(&text).unwrap();
        assert_eq!(cfg.spectral.j, 0.5);
        assert_eq!(cfg.grid.nu, 101);
        assert_eq!(cfg.angular.n_max, 2);
        assert_eq!(cfg.synthesis().n_max, 2);
    }

    #[test]
    fn rejects_unknown_and_invalid() {
        let e = RunConfig::from_toml(&format!("{MINIMAL}angular.nmax = 3\n")).unwrap_err();
        let msg = e.to_string();
        assert!(matches!(e, Error::Config(_)) && msg.contains("nmax") && msg.contains("line"), "{msg}");
        assert!(RunConfig::from_toml("background.M = 1.0\nbackground.a = 1.2\nbackground.k = 1\n").is_err());
        assert!(RunConfig::from_toml(&format!("{MINIMAL}radial.tol = 0.0\n")).is_err());
        assert!(RunConfig::from_toml(&format!("{MINIMAL}data.center = 65.0\n")).is_err());
    }

    #[test]
    fn frequency_list_skips_excluded_points() {
        let cfg = RunConfig::from_toml(MINIMAL).unwrap();
        let bg = cfg.background().unwrap();
        let ws = cfg.frequency_list(&bg);
        assert!(ws.len() < 201 && ws.len() > 190);
        assert!(ws.iter().all(|w| w.abs() >= 0.05 && (w - bg.omega0).abs() >= 0.05));
    }
}
