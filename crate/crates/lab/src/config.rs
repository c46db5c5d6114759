use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sgkink_core::field::Grid;
use sgkink_core::integrator::{Scheme, SchemeKind};
use sgkink_core::scattering::{WavePacketSpec, MIN_EXTRACTION_TIME};

use crate::error::{LabError, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExperimentKind {
    KinkStability,
    BacklundRoundtrip,
    Conservation,
    SmallDataScattering,
    Wobbler,
    ExteriorDecay,
}

impl ExperimentKind {
    pub const ALL: [ExperimentKind; 6] = [
        ExperimentKind::KinkStability,
        ExperimentKind::BacklundRoundtrip,
        ExperimentKind::Conservation,
        ExperimentKind::SmallDataScattering,
        ExperimentKind::Wobbler,
        ExperimentKind::ExteriorDecay,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            ExperimentKind::KinkStability => "kink-stability",
            ExperimentKind::BacklundRoundtrip => "backlund-roundtrip",
            ExperimentKind::Conservation => "conservation",
            ExperimentKind::SmallDataScattering => "small-data-scattering",
            ExperimentKind::Wobbler => "wobbler",
            ExperimentKind::ExteriorDecay => "exterior-decay",
        }
    }

    pub fn describe(self) -> &'static str {
        match self {
            ExperimentKind::KinkStability => {
                "perturbed kink: Backlund partner, center tracking and distance to the modulated kink"
            }
            ExperimentKind::BacklundRoundtrip => "forward then inverse transform of a random small field",
            ExperimentKind::Conservation => "drift of E0, P, E2, E4 for kink, breather and perturbed kink",
            ExperimentKind::SmallDataScattering => {
                "zero-topology small data: decay rate, profile W, log-phase law, predictor residuals"
            }
            ExperimentKind::Wobbler => "wobbling kink keeps a fixed distance from every static kink",
            ExperimentKind::ExteriorDecay => "perturbed kink outside the light cone against the decay shape",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    pub x_min: f64,
    pub x_max: f64,
    pub n: usize,
}

impl Default for GridConfig {
    fn default() -> Self {
        GridConfig {
            x_min: -256.0,
            x_max: 256.0,
            n: 8192,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SchemeConfig {
    #[serde(default = "default_kind")]
    pub kind: SchemeKind,
    /// Defaults to `dx / 2`.
    #[serde(default)]
    pub dt: Option<f64>,
}

fn default_kind() -> SchemeKind {
    SchemeKind::SixthOrderSplitSpectral
}

impl Default for SchemeConfig {
    fn default() -> Self {
        SchemeConfig {
            kind: default_kind(),
            dt: None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum Perturbation {
    /// `eps e^{-(x - x0)^2}` in both components.
    Gaussian,
    /// `eps sech(x - x0) tanh(x - x0)` in both components.
    OddSech,
    /// CSV with columns `x, u0, u1` on the run grid, scaled by `eps`.
    Custom(PathBuf),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ConservationCase {
    Kink,
    Breather,
    PerturbedKink,
}

impl ConservationCase {
    pub fn as_str(self) -> &'static str {
        match self {
            ConservationCase::Kink => "kink",
            ConservationCase::Breather => "breather",
            ConservationCase::PerturbedKink => "perturbed_kink",
        }
    }
}

/// Pass/fail limits applied by the experiments.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Tolerances {
    pub drift_e0_p: f64,
    pub drift_e2_e4: f64,
    pub roundtrip: f64,
    pub backlund_residual: f64,
    /// `|x(t) - x(0)| <= center_factor * eps`.
    pub center_factor: f64,
    /// `||(f - K, f_t - K_t)||_{H^1 x L^2} <= pair_energy_factor * eps`.
    pub pair_energy_factor: f64,
    /// Upper bound for `diff_linf(100) / diff_linf(5)`.
    pub diff_linf_decrease: f64,
    pub decay_exponent: f64,
    pub decay_band: f64,
    pub boost_exponent: f64,
    pub phase_law: f64,
    pub predictor_ratio: f64,
    pub method_agreement: f64,
    pub envelope_exponent: f64,
    pub cauchy: f64,
    pub gamma_variation: f64,
    pub wobbler_fraction: f64,
    pub exterior_l2_slack: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            drift_e0_p: 1e-6,
            drift_e2_e4: 1e-4,
            roundtrip: 1e-6,
            backlund_residual: 1e-8,
            center_factor: 10.0,
            pair_energy_factor: 10.0,
            diff_linf_decrease: 0.5,
            decay_exponent: -0.5,
            decay_band: 0.1,
            boost_exponent: -0.25,
            phase_law: 0.2,
            predictor_ratio: 0.25,
            method_agreement: 0.15,
            envelope_exponent: -1.0,
            cauchy: 0.15,
            gamma_variation: 0.1,
            wobbler_fraction: 0.5,
            exterior_l2_slack: 0.05,
        }
    }
}

fn d_epsilon() -> f64 {
    0.01
}
fn d_s() -> f64 {
    1.0
}
fn d_m() -> f64 {
    2.0
}
fn d_t_end() -> f64 {
    100.0
}
fn d_every() -> f64 {
    1.0
}
fn d_wobble() -> f64 {
    0.5
}
fn d_cases() -> Vec<ConservationCase> {
    vec![
        ConservationCase::Kink,
        ConservationCase::Breather,
        ConservationCase::PerturbedKink,
    ]
}
fn d_probe_times() -> Vec<f64> {
    vec![150.0, 300.0]
}
fn d_xi_max() -> f64 {
    8.0
}
fn d_xi_step() -> f64 {
    0.1
}
fn d_chi() -> f64 {
    0.2
}
fn d_perturbation() -> Perturbation {
    Perturbation::Gaussian
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub name: ExperimentKind,
    #[serde(default)]
    pub grid: GridConfig,
    #[serde(default)]
    pub scheme: SchemeConfig,
    #[serde(default = "d_epsilon")]
    pub epsilon: f64,
    #[serde(default)]
    pub beta0: f64,
    #[serde(default)]
    pub x0: f64,
    /// Exterior decay weight exponent.
    #[serde(default = "d_s")]
    pub s: f64,
    /// Sobolev order of the data, echoed only.
    #[serde(default = "d_m")]
    pub m: f64,
    #[serde(default = "d_perturbation")]
    pub perturbation: Perturbation,
    #[serde(default = "d_t_end")]
    pub t_end: f64,
    #[serde(default = "d_every")]
    pub snapshot_every: f64,
    #[serde(default)]
    pub seed: u64,
    /// Internal parameter of the wobbling kink.
    #[serde(default = "d_wobble")]
    pub wobble: f64,
    #[serde(default = "d_cases")]
    pub cases: Vec<ConservationCase>,
    /// Times at which predictor residuals are measured.
    #[serde(default = "d_probe_times")]
    pub probe_times: Vec<f64>,
    #[serde(default = "d_xi_max")]
    pub xi_max: f64,
    #[serde(default = "d_xi_step")]
    pub xi_step: f64,
    #[serde(default = "d_chi")]
    pub chi_radius: f64,
    /// Offset `R` of the exterior region `|x| >= t + R`.
    #[serde(default)]
    pub exterior_radius: f64,
    #[serde(default)]
    pub save_snapshots: bool,
    #[serde(default)]
    pub tolerances: Tolerances,
    /// Directory that relative paths are resolved against.
    #[serde(skip)]
    pub base_dir: PathBuf,
}

impl ExperimentConfig {
    /// Config with every optional field at its default.
    pub fn new(name: ExperimentKind) -> Self {
        ExperimentConfig {
            name,
            grid: GridConfig::default(),
            scheme: SchemeConfig::default(),
            epsilon: d_epsilon(),
            beta0: 0.0,
            x0: 0.0,
            s: d_s(),
            m: d_m(),
            perturbation: d_perturbation(),
            t_end: d_t_end(),
            snapshot_every: d_every(),
            seed: 0,
            wobble: d_wobble(),
            cases: d_cases(),
            probe_times: d_probe_times(),
            xi_max: d_xi_max(),
            xi_step: d_xi_step(),
            chi_radius: d_chi(),
            exterior_radius: 0.0,
            save_snapshots: false,
            tolerances: Tolerances::default(),
            base_dir: PathBuf::new(),
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: ExperimentConfig = serde_json::from_str(text)?;
        Ok(cfg)
    }

    /// Reads and validates a config file.
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|source| LabError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        let mut cfg = Self::from_json(&text)?;
        cfg.base_dir = path.parent().map(Path::to_path_buf).unwrap_or_default();
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn grid(&self) -> Result<Grid> {
        Grid::new(self.grid.x_min, self.grid.x_max, self.grid.n)
            .map_err(|e| LabError::Config(e.to_string()))
    }

    pub fn scheme(&self) -> Result<Scheme> {
        let dx = self.grid()?.dx();
        Scheme::new(self.scheme.kind, self.scheme.dt.unwrap_or(0.5 * dx))
            .map_err(|e| LabError::Config(e.to_string()))
    }

    pub fn packet_spec(&self) -> Result<WavePacketSpec> {
        WavePacketSpec::new(self.chi_radius).map_err(|e| LabError::Config(e.to_string()))
    }

    pub fn xi_grid(&self) -> Vec<f64> {
        let k = (self.xi_max / self.xi_step).round() as i64;
        (-k..=k).map(|i| i as f64 * self.xi_step).collect()
    }

    pub fn resolve(&self, p: &Path) -> PathBuf {
        if p.is_absolute() {
            p.to_path_buf()
        } else {
            self.base_dir.join(p)
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(LabError::Config(m));
        self.grid()?;
        self.scheme()?;
        // zero is allowed so the unperturbed case can be run
        if !(0.0..=0.2).contains(&self.epsilon) {
            return bad(format!("epsilon {} outside [0, 0.2]", self.epsilon));
        }
        if !(self.beta0.abs() < 1.0) {
            return bad(format!("beta0 {} outside (-1, 1)", self.beta0));
        }
        if !self.x0.is_finite() || !self.s.is_finite() || !self.m.is_finite() {
            return bad("x0, s and m must be finite".into());
        }
        if !(self.t_end > 0.0 && self.snapshot_every > 0.0) {
            return bad("t_end and snapshot_every must be positive".into());
        }
        let count = self.t_end / self.snapshot_every;
        if (count - count.round()).abs() > 1e-6 {
            return bad("t_end must be a multiple of snapshot_every".into());
        }
        if let Perturbation::Custom(p) = &self.perturbation {
            let full = self.resolve(p);
            if !full.is_file() {
                return Err(LabError::MissingFile(full));
            }
        }
        if !(self.xi_max > 0.0 && self.xi_step > 0.0 && self.xi_max / self.xi_step >= 1.0) {
            return bad("xi grid needs 0 < xi_step <= xi_max".into());
        }
        if self.exterior_radius < 0.0 {
            return bad("exterior_radius must be non-negative".into());
        }
        self.packet_spec()?;
        match self.name {
            ExperimentKind::SmallDataScattering => {
                if self.t_end < MIN_EXTRACTION_TIME {
                    return bad(format!("small-data-scattering needs t_end >= {MIN_EXTRACTION_TIME}"));
                }
                if let Some(t) = self.probe_times.iter().find(|&&t| !(t > 0.0 && t <= self.t_end)) {
                    return bad(format!("probe time {t} outside (0, t_end]"));
                }
            }
            ExperimentKind::Wobbler => {
                if !(self.wobble > 0.0 && self.wobble < 1.0) {
                    return bad(format!("wobble {} outside (0, 1)", self.wobble));
                }
                if self.t_end < 20.0 {
                    return bad("wobbler needs t_end >= 20".into());
                }
            }
            ExperimentKind::Conservation => {
                if self.cases.is_empty() {
                    return bad("no conservation cases".into());
                }
            }
            ExperimentKind::ExteriorDecay => {
                if self.t_end < 10.0 {
                    return bad("exterior-decay needs t_end >= 10".into());
                }
            }
            _ => {}
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_fill_in() {
        let c = ExperimentConfig::from_json(r#"{"name": "conservation"}"#).unwrap();
        assert_eq!(c.grid, GridConfig::default());
        assert_eq!(c.scheme().unwrap().dt, 1.0 / 32.0);
        assert_eq!(c.s, 1.0);
        assert_eq!(c.m, 2.0);
        assert_eq!(c.cases.len(), 3);
        c.validate().unwrap();
    }

    #[test]
    fn rejects_bad_values() {
        for text in [
            r#"{"name": "conservation", "epsilon": 0.3}"#,
            r#"{"name": "conservation", "grid": {"x_min": 0, "x_max": 1, "n": 100}}"#,
            r#"{"name": "conservation", "t_end": 10, "snapshot_every": 3}"#,
            r#"{"name": "small-data-scattering", "t_end": 50}"#,
            r#"{"name": "wobbler", "wobble": 1.5}"#,
        ] {
            let c = ExperimentConfig::from_json(text).unwrap();
            assert!(c.validate().is_err(), "{text}");
        }
        assert!(ExperimentConfig::from_json(r#"{"name": "nope"}"#).is_err());
        assert!(ExperimentConfig::from_json(r#"{"name": "wobbler", "typo": 1}"#).is_err());
    }

    #[test]
    fn custom_file_must_exist() {
        let c = ExperimentConfig::from_json(
            r#"{"name": "kink-stability", "perturbation": {"Custom": "/nonexistent/p.csv"}}"#,
        )
        .unwrap();
        assert!(matches!(c.validate(), Err(LabError::MissingFile(_))));
    }

    #[test]
    fn xi_grid_is_symmetric() {
        let c = ExperimentConfig::new(ExperimentKind::SmallDataScattering);
        let xi = c.xi_grid();
        assert_eq!(xi.len(), 161);
        assert_eq!(xi[80], 0.0);
        assert_eq!(xi[0], -8.0);
    }
}
