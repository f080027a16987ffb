//! Scenario configuration.
//!
//! Scenarios are TOML documents: flat `key = value` pairs grouped in
//! sections, with arrays of tables for mode lists. Every key has a default
//! except the chart, so a minimal scenario names a chart and its suites.
//! The grammar is documented in the repository README.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::dirac_dynamics::{EvolveOptions, PlaneWave};
use crate::error::{Error, Result};
use crate::field::SpinorField;
use crate::geometry::{MetricChart, MetricModel, Profile};
use crate::grid::Grid;
use crate::linalg::{c, Spinor, ZERO};
use crate::spin_algebra::{PhysicalConstants, NEUTRON_MASS_CGS};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Suite {
    Identities,
    Connection,
    Evolve,
    Current,
    Pairing,
    Fock,
}

impl Suite {
    pub const ALL: [Suite; 6] = [
        Suite::Identities,
        Suite::Connection,
        Suite::Evolve,
        Suite::Current,
        Suite::Pairing,
        Suite::Fock,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Suite::Identities => "identities",
            Suite::Connection => "connection",
            Suite::Evolve => "evolve",
            Suite::Current => "current",
            Suite::Pairing => "pairing",
            Suite::Fock => "fock",
        }
    }
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Suite {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Suite::ALL
            .into_iter()
            .find(|x| x.name() == s.trim())
            .ok_or_else(|| Error::Parse(format!("unknown suite {s:?}")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum UnitSystem {
    Natural,
    Cgs,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct UnitsConfig {
    pub system: UnitSystem,
    /// Defaults to 1 in natural units and the neutron mass in CGS.
    pub mass: Option<f64>,
}

impl Default for UnitsConfig {
    fn default() -> Self {
        Self {
            system: UnitSystem::Natural,
            mass: None,
        }
    }
}

impl UnitsConfig {
    pub fn constants(&self) -> Result<PhysicalConstants> {
        match self.system {
            UnitSystem::Natural => PhysicalConstants::natural(self.mass.unwrap_or(1.0)),
            UnitSystem::Cgs => PhysicalConstants::cgs(self.mass.unwrap_or(NEUTRON_MASS_CGS)),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ChartFamilyConfig {
    Minkowski,
    StaticDiagonal,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChartConfig {
    pub family: ChartFamilyConfig,
    /// Spatial node counts; 1 marks a reduced direction.
    pub nodes: [usize; 3],
    /// Periodic box lengths along x¹, x², x³.
    pub length: [f64; 3],
    /// `g₀₀` of a static diagonal chart.
    #[serde(default)]
    pub lapse: Option<Profile>,
    /// `g₁₁, g₂₂, g₃₃` of a static diagonal chart; default −1.
    #[serde(default)]
    pub spatial: Option<[Profile; 3]>,
}

impl ChartConfig {
    pub fn spatial_grid(&self) -> Result<Grid> {
        Grid::periodic_box(self.nodes, self.length, 0.0)
    }

    /// The chart on this box with every non-reduced axis refined `factor`
    /// times.
    pub fn refined(&self, factor: usize) -> ChartConfig {
        let mut out = self.clone();
        for n in &mut out.nodes {
            if *n > 1 {
                *n *= factor;
            }
        }
        out
    }

    pub fn chart(&self) -> Result<MetricChart> {
        let grid = self.spatial_grid()?;
        match self.family {
            ChartFamilyConfig::Minkowski => MetricChart::minkowski(grid),
            ChartFamilyConfig::StaticDiagonal => {
                let minus = Profile::Constant { value: -1.0 };
                let lapse = self.lapse.unwrap_or(Profile::Constant { value: 1.0 });
                let [a, b, c_] = self.spatial.unwrap_or([minus; 3]);
                MetricChart::new(
                    grid,
                    MetricModel::StaticDiagonal {
                        diagonal: [lapse, a, b, c_],
                    },
                )
            }
        }
    }
}

/// One component of initial data or one pairing mode.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ModeSpec {
    /// A plane wave `a u exp(i k·x)`.
    Wave {
        k: [f64; 3],
        #[serde(default)]
        spin: usize,
        #[serde(default = "default_true")]
        positive: bool,
        #[serde(default = "default_amplitude")]
        amplitude: [f64; 2],
    },
    /// A Gaussian envelope `exp(−|x − center|²/(2 width²))` on a plane wave,
    /// or on an explicit constant `spinor` (re, im pairs).
    Packet {
        center: [f64; 3],
        width: f64,
        #[serde(default)]
        k: [f64; 3],
        #[serde(default)]
        spin: usize,
        #[serde(default = "default_true")]
        positive: bool,
        #[serde(default = "default_amplitude")]
        amplitude: [f64; 2],
        #[serde(default)]
        spinor: Option<[[f64; 2]; 4]>,
    },
}

fn default_true() -> bool {
    true
}

fn default_amplitude() -> [f64; 2] {
    [1.0, 0.0]
}

impl ModeSpec {
    /// Value at `x` on the initial slice (x⁰ is ignored).
    pub fn initial_value(&self, k: &PhysicalConstants, grid: &Grid, x: [f64; 4]) -> Result<Spinor> {
        match self {
            ModeSpec::Wave {
                k: kv,
                spin,
                positive,
                amplitude,
            } => {
                let w = PlaneWave::new(*kv, k, *spin, *positive)?;
                let a = c(amplitude[0], amplitude[1]);
                Ok(w.value([0.0, x[1], x[2], x[3]]).map(|z| z * a))
            }
            ModeSpec::Packet {
                center,
                width,
                k: kv,
                spin,
                positive,
                amplitude,
                spinor,
            } => {
                let u = match spinor {
                    Some(s) => s.map(|[re, im]| c(re, im)),
                    None => PlaneWave::new(*kv, k, *spin, *positive)?.amplitude,
                };
                let mut r2 = 0.0;
                for axis in 1..4 {
                    if grid.n[axis] > 1 {
                        // Nearest periodic image, so the envelope is continuous across the seam.
                        let length = grid.n[axis] as f64 * grid.step[axis];
                        let mut d = x[axis] - center[axis - 1];
                        if grid.periodic[axis] {
                            d -= length * (d / length).round();
                        }
                        r2 += d * d;
                    }
                }
                let phase = kv[0] * x[1] + kv[1] * x[2] + kv[2] * x[3];
                let env = c(amplitude[0], amplitude[1]) * (-r2 / (2.0 * width * width)).exp() * num_complex::Complex64::from_polar(1.0, phase);
                Ok(u.map(|z| z * env))
            }
        }
    }

    /// The exact solution, when this mode is a plane wave on a flat chart.
    pub fn plane_wave(&self, k: &PhysicalConstants) -> Option<(PlaneWave, num_complex::Complex64)> {
        match self {
            ModeSpec::Wave {
                k: kv,
                spin,
                positive,
                amplitude,
            } => PlaneWave::new(*kv, k, *spin, *positive)
                .ok()
                .map(|w| (w, c(amplitude[0], amplitude[1]))),
            ModeSpec::Packet { .. } => None,
        }
    }
}

/// Sum of `modes` on one time level of `grid`.
pub fn initial_field(modes: &[ModeSpec], k: &PhysicalConstants, grid: &Grid) -> Result<SpinorField> {
    let mut data = vec![[ZERO; 4]; grid.len()];
    for m in modes {
        for (idx, v) in data.iter_mut().enumerate() {
            let s = m.initial_value(k, grid, grid.point(idx))?;
            for a in 0..4 {
                v[a] += s[a];
            }
        }
    }
    SpinorField::from_data(grid.clone(), data)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct InitialConfig {
    /// Rescale so that the pairing norm on x⁰ = 0 is 1.
    pub normalize: bool,
    pub modes: Vec<ModeSpec>,
}

impl Default for InitialConfig {
    fn default() -> Self {
        Self {
            normalize: true,
            modes: vec![ModeSpec::Wave {
                k: [0.0; 3],
                spin: 0,
                positive: true,
                amplitude: default_amplitude(),
            }],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EvolveConfig {
    pub dt: f64,
    pub steps: usize,
    pub snapshot_every: usize,
    pub growth_limit: f64,
    pub cfl_limit: f64,
    /// Also run with half the step and report the error ratio.
    pub convergence: bool,
    /// Check the action integral on the trajectory.
    pub action: bool,
    /// Random compact perturbations for the variational check.
    pub perturbations: usize,
    /// Random smooth fields for the reality check.
    pub random_fields: usize,
}

impl EvolveConfig {
    pub fn options(&self) -> EvolveOptions {
        EvolveOptions {
            dt: self.dt,
            steps: self.steps,
            snapshot_every: self.snapshot_every,
            growth_limit: self.growth_limit,
            cfl_limit: self.cfl_limit,
        }
    }
}

impl Default for EvolveConfig {
    fn default() -> Self {
        let o = EvolveOptions::default();
        Self {
            dt: o.dt,
            steps: o.steps,
            snapshot_every: o.snapshot_every,
            growth_limit: o.growth_limit,
            cfl_limit: o.cfl_limit,
            convergence: false,
            action: false,
            perturbations: 20,
            random_fields: 50,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ConnectionConfig {
    /// Compare against a chart with every axis refined twice.
    pub refine: bool,
    /// Coarse node counts for the convergence study; defaults to the chart's.
    /// Fourth-order residuals reach roundoff quickly, so the study usually
    /// wants a coarser box than the evolution.
    pub nodes: Option<[usize; 3]>,
}

impl Default for ConnectionConfig {
    fn default() -> Self {
        Self { refine: true, nodes: None }
    }
}

impl ConnectionConfig {
    /// The chart configuration the connection suite samples.
    pub fn chart(&self, chart: &ChartConfig) -> ChartConfig {
        let mut out = chart.clone();
        if let Some(n) = self.nodes {
            out.nodes = n;
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CurrentConfig {
    /// Random spinors for the time-likeness check.
    pub samples: usize,
}

impl Default for CurrentConfig {
    fn default() -> Self {
        Self { samples: 100_000 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(default, deny_unknown_fields)]
pub struct PairingConfig {
    /// Raw modes, each evolved with the `[evolve]` options.
    pub modes: Vec<ModeSpec>,
    /// Slope of a tilted slice through the middle of the run (flat charts).
    pub tilt: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FockConfig {
    pub modes: usize,
}

impl Default for FockConfig {
    fn default() -> Self {
        Self { modes: 6 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Tolerances {
    pub orthonormality: f64,
    pub ratio_min: f64,
    pub ratio_max: f64,
    pub oracle: f64,
    pub residual: f64,
    pub norm_drift: f64,
    pub divergence: f64,
    pub reality: f64,
    pub closed_form: f64,
    pub timelike: f64,
    pub hermiticity: f64,
    pub slice: f64,
    pub gram: f64,
    pub action_reality: f64,
    pub variation: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            orthonormality: 1e-12,
            ratio_min: 12.0,
            ratio_max: 20.0,
            oracle: 1e-6,
            residual: 1e-8,
            norm_drift: 1e-8,
            divergence: 1e-6,
            reality: 1e-13,
            closed_form: 1e-12,
            timelike: 1e-12,
            hermiticity: 1e-12,
            slice: 1e-6,
            gram: 1e-8,
            action_reality: 1e-10,
            variation: 1e-6,
        }
    }
}

impl Tolerances {
    fn validate(&self) -> Result<()> {
        let all = [
            ("orthonormality", self.orthonormality),
            ("ratio_min", self.ratio_min),
            ("ratio_max", self.ratio_max),
            ("oracle", self.oracle),
            ("residual", self.residual),
            ("norm_drift", self.norm_drift),
            ("divergence", self.divergence),
            ("reality", self.reality),
            ("closed_form", self.closed_form),
            ("timelike", self.timelike),
            ("hermiticity", self.hermiticity),
            ("slice", self.slice),
            ("gram", self.gram),
            ("action_reality", self.action_reality),
            ("variation", self.variation),
        ];
        for (name, v) in all {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::Parse(format!("tolerance {name} must be > 0, got {v}")));
            }
        }
        if self.ratio_min > self.ratio_max {
            return Err(Error::Parse("ratio_min exceeds ratio_max".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    #[serde(default)]
    pub name: String,
    #[serde(default)]
    pub description: String,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_suites")]
    pub suites: Vec<Suite>,
    #[serde(default)]
    pub units: UnitsConfig,
    pub chart: ChartConfig,
    #[serde(default)]
    pub initial: InitialConfig,
    #[serde(default)]
    pub evolve: EvolveConfig,
    #[serde(default)]
    pub connection: ConnectionConfig,
    #[serde(default)]
    pub current: CurrentConfig,
    #[serde(default)]
    pub pairing: PairingConfig,
    #[serde(default)]
    pub fock: FockConfig,
    #[serde(default)]
    pub tolerances: Tolerances,
    /// Output directory; the CLI `--out` flag overrides it.
    #[serde(default)]
    pub output: Option<String>,
}

fn default_suites() -> Vec<Suite> {
    Suite::ALL.to_vec()
}

impl ScenarioConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: ScenarioConfig = toml::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        self.tolerances.validate()?;
        self.units.constants()?;
        self.chart.chart()?;
        self.connection.chart(&self.chart).chart()?;
        let o = self.evolve.options();
        if !(o.dt.is_finite() && o.dt > 0.0) || o.snapshot_every == 0 {
            return Err(Error::Parse("evolve.dt must be > 0 and evolve.snapshot_every >= 1".into()));
        }
        if !(o.growth_limit > 1.0 && o.cfl_limit > 0.0) {
            return Err(Error::Parse("evolve.growth_limit must be > 1 and evolve.cfl_limit > 0".into()));
        }
        if let Some(t) = self.pairing.tilt {
            if !(t.abs() < 1.0) {
                return Err(Error::Parse(format!("pairing.tilt must satisfy |tilt| < 1, got {t}")));
            }
        }
        if self.suites.is_empty() {
            return Err(Error::Parse("no suites selected".into()));
        }
        Ok(())
    }
}

/// A scenario shipped with the binary.
#[derive(Debug, Clone, Copy)]
pub struct BundledScenario {
    pub name: &'static str,
    pub text: &'static str,
}

pub const BUNDLED: &[BundledScenario] = &[
    BundledScenario {
        name: "identities",
        text: include_str!("../scenarios/identities.toml"),
    },
    BundledScenario {
        name: "flat_rest_wave",
        text: include_str!("../scenarios/flat_rest_wave.toml"),
    },
    BundledScenario {
        name: "flat_boosted_wave",
        text: include_str!("../scenarios/flat_boosted_wave.toml"),
    },
    BundledScenario {
        name: "flat_pairing",
        text: include_str!("../scenarios/flat_pairing.toml"),
    },
    BundledScenario {
        name: "massless_chiral_packet",
        text: include_str!("../scenarios/massless_chiral_packet.toml"),
    },
    BundledScenario {
        name: "curved_static",
        text: include_str!("../scenarios/curved_static.toml"),
    },
    BundledScenario {
        name: "fock_m6",
        text: include_str!("../scenarios/fock_m6.toml"),
    },
    BundledScenario {
        name: "cfl_violation",
        text: include_str!("../scenarios/cfl_violation.toml"),
    },
];

pub fn bundled(name: &str) -> Option<&'static BundledScenario> {
    BUNDLED.iter().find(|s| s.name == name)
}

/// `2π n / L`, the wave number of the n-th Fourier mode of a periodic box.
pub fn box_wavenumber(n: i64, length: f64) -> f64 {
    2.0 * PI * n as f64 / length
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bundled_scenarios_parse() {
        for s in BUNDLED {
            let cfg = ScenarioConfig::from_toml(s.text).unwrap_or_else(|e| panic!("{}: {e}", s.name));
            assert_eq!(cfg.name, s.name);
            assert!(!cfg.description.is_empty());
        }
    }

    #[test]
    fn minimal_config_uses_defaults() {
        let cfg = ScenarioConfig::from_toml(
            "[chart]\nfamily = \"minkowski\"\nnodes = [8, 1, 1]\nlength = [1.0, 1.0, 1.0]\n",
        )
        .unwrap();
        assert_eq!(cfg.suites, Suite::ALL.to_vec());
        assert_eq!(cfg.tolerances, Tolerances::default());
        assert_eq!(cfg.units.constants().unwrap(), PhysicalConstants::natural(1.0).unwrap());
    }

    #[test]
    fn rejects_bad_input() {
        assert!(ScenarioConfig::from_toml("[chart]\nfamily = \"minkowski\"").is_err());
        assert!(ScenarioConfig::from_toml(
            "suites = [\"nope\"]\n[chart]\nfamily = \"minkowski\"\nnodes = [8, 1, 1]\nlength = [1.0, 1.0, 1.0]\n"
        )
        .is_err());
        assert!(ScenarioConfig::from_toml(
            "[chart]\nfamily = \"minkowski\"\nnodes = [8, 1, 1]\nlength = [1.0, 1.0, 1.0]\n[tolerances]\noracle = 0.0\n"
        )
        .is_err());
        assert!("evolve".parse::<Suite>().is_ok());
        assert!("bogus".parse::<Suite>().is_err());
    }
}
