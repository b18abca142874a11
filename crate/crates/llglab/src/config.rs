//! Experiment configuration files.
//!
//! TOML with a fixed schema; unknown keys, unknown experiment names and
//! missing blocks are rejected before anything runs.

use std::f64::consts::PI;
use std::path::{Path, PathBuf};

use llglab_core::cgl::CglConfig;
use llglab_core::field::Grid;
use llglab_core::lab::InitialDataSpec;
use llglab_core::llg::{LlgConfig, Scheme};
use serde::Deserialize;

#[derive(Debug)]
pub struct ConfigError(pub String);

impl std::fmt::Display for ConfigError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for ConfigError {}

fn err<T>(msg: impl Into<String>) -> Result<T, ConfigError> {
    Err(ConfigError(msg.into()))
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LabConfig {
    #[serde(default)]
    pub seed: u64,
    /// Output directory, relative to the config file.
    pub output: Option<PathBuf>,
    pub grid: GridSection,
    #[serde(default)]
    pub initial: InitialSection,
    pub llg: Option<LlgSection>,
    pub cgl: Option<CglSection>,
    #[serde(default)]
    pub semigroup: SemigroupSection,
    #[serde(default)]
    pub window: WindowSection,
    #[serde(default)]
    pub mollify: MollifySection,
    #[serde(default)]
    pub stability: StabilitySection,
    #[serde(default)]
    pub morrey: MorreySection,
    #[serde(default)]
    pub experiments: ExperimentsSection,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSection {
    pub dim: usize,
    pub n: usize,
    #[serde(default = "two_pi")]
    pub length: f64,
}

fn two_pi() -> f64 {
    2.0 * PI
}

#[derive(Clone, Copy, Debug, Deserialize, PartialEq, Eq)]
#[serde(rename_all = "snake_case")]
pub enum InitialKind {
    Constant,
    EquatorialWave,
    BumpChart,
    RoughMollified,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InitialSection {
    pub kind: InitialKind,
    #[serde(default = "default_amplitude")]
    pub amplitude: f64,
    #[serde(default = "one")]
    pub wavenumber: f64,
    #[serde(default = "default_width")]
    pub width: f64,
    #[serde(default = "default_k")]
    pub mollification_k: f64,
    #[serde(default = "e3")]
    pub m_infinity: [f64; 3],
    /// Snapshot file to load instead of generating data.
    pub snapshot: Option<PathBuf>,
}

impl Default for InitialSection {
    fn default() -> Self {
        InitialSection {
            kind: InitialKind::Constant,
            amplitude: default_amplitude(),
            wavenumber: 1.0,
            width: default_width(),
            mollification_k: default_k(),
            m_infinity: e3(),
            snapshot: None,
        }
    }
}

fn default_amplitude() -> f64 {
    0.1
}
fn one() -> f64 {
    1.0
}
fn default_width() -> f64 {
    0.5
}
fn default_k() -> f64 {
    4.0
}
fn e3() -> [f64; 3] {
    [0.0, 0.0, 1.0]
}

impl InitialSection {
    pub fn spec(&self, seed: u64) -> InitialDataSpec {
        match self.kind {
            InitialKind::Constant => InitialDataSpec::Constant { m_inf: self.m_infinity },
            InitialKind::EquatorialWave => InitialDataSpec::EquatorialWave { amplitude: self.amplitude, wavenumber: self.wavenumber },
            InitialKind::BumpChart => InitialDataSpec::BumpChart { m_inf: self.m_infinity, amplitude: self.amplitude, width: self.width },
            InitialKind::RoughMollified => InitialDataSpec::RoughMollified { m_inf: self.m_infinity, amplitude: self.amplitude, k: self.mollification_k, seed },
        }
    }
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LlgSection {
    #[serde(default = "one")]
    pub lambda: f64,
    pub t_final: f64,
    /// Fixed step; when absent the step is the stability cap divided by
    /// `cap_divisor`.
    pub dt: Option<f64>,
    #[serde(default = "default_cap_divisor")]
    pub cap_divisor: f64,
    #[serde(default = "default_scheme")]
    pub scheme: String,
    #[serde(default = "default_output_every")]
    pub output_every: usize,
}

fn default_cap_divisor() -> f64 {
    4.0
}
fn default_scheme() -> String {
    "rk4".into()
}
fn default_output_every() -> usize {
    10
}

impl LlgSection {
    pub fn build(&self, grid: &Grid) -> Result<LlgConfig, ConfigError> {
        let scheme: Scheme = self.scheme.parse().map_err(|e| ConfigError(format!("llg.scheme: {e}")))?;
        let mut cfg = match self.dt {
            Some(dt) => LlgConfig::new(grid, self.lambda, self.t_final, dt, scheme),
            None => LlgConfig::at_cap_fraction(grid, self.lambda, self.t_final, self.cap_divisor, scheme),
        }
        .map_err(|e| ConfigError(format!("llg: {e}")))?;
        cfg.output_every = self.output_every;
        cfg.validate(grid).map_err(|e| ConfigError(format!("llg: {e}")))?;
        Ok(cfg)
    }
}

#[derive(Clone, Copy, Debug, Deserialize, PartialEq, Eq)]
#[serde(rename_all = "snake_case")]
pub enum CglData {
    /// `u` of the initial spin field in the Coulomb gauge.
    FromInitial,
    /// Generic two-bump data scaled to `‖v0‖_{M^{2,2}} = m22`.
    Generic,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CglSection {
    #[serde(default = "one")]
    pub lambda: f64,
    #[serde(default = "default_p")]
    pub p: f64,
    pub t_final: f64,
    pub time_steps: usize,
    #[serde(default = "default_tol")]
    pub tol: f64,
    #[serde(default = "default_max_iter")]
    pub max_iter: usize,
    #[serde(default = "default_substeps")]
    pub substeps: usize,
    #[serde(default = "default_eps0")]
    pub eps0: f64,
    #[serde(default = "default_data")]
    pub data: CglData,
    #[serde(default = "default_m22")]
    pub m22: f64,
    /// Fill the `xpt_R*` columns for every iterate, not only the last.
    #[serde(default = "yes")]
    pub log_xpt: bool,
}

fn default_p() -> f64 {
    3.2
}
fn default_tol() -> f64 {
    1e-8
}
fn default_max_iter() -> usize {
    40
}
fn default_substeps() -> usize {
    8
}
fn default_eps0() -> f64 {
    llglab_core::cgl::DEFAULT_EPS0
}
fn default_data() -> CglData {
    CglData::FromInitial
}
fn default_m22() -> f64 {
    1e-3
}
fn yes() -> bool {
    true
}

impl CglSection {
    pub fn build(&self) -> Result<CglConfig, ConfigError> {
        let mut cfg = CglConfig::new(self.lambda, self.p, self.t_final, self.time_steps).map_err(|e| ConfigError(format!("cgl: {e}")))?;
        cfg.picard_tol = self.tol;
        cfg.picard_max_iter = self.max_iter;
        cfg.duhamel_substeps = self.substeps;
        cfg.eps0 = self.eps0;
        cfg.log_xpt = self.log_xpt;
        cfg.validate().map_err(|e| ConfigError(format!("cgl: {e}")))?;
        Ok(cfg)
    }
}

#[derive(Clone, Debug, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SemigroupSection {
    pub lambda: f64,
    pub t0: f64,
    pub t1: f64,
    pub samples: usize,
    /// Bump widths in grid cells.
    pub widths: Vec<f64>,
    pub c_max: f64,
}

impl Default for SemigroupSection {
    fn default() -> Self {
        SemigroupSection { lambda: 1.0, t0: 1e-3, t1: 1e-1, samples: 21, widths: vec![0.5, 1.0], c_max: 50.0 }
    }
}

#[derive(Clone, Debug, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct WindowSection {
    pub p_min: f64,
    pub p_max: f64,
    pub samples: usize,
}

impl Default for WindowSection {
    fn default() -> Self {
        WindowSection { p_min: 2.5, p_max: 4.0, samples: 200 }
    }
}

#[derive(Clone, Debug, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MollifySection {
    pub amplitude: f64,
    pub ks: Vec<f64>,
    pub max_ratio: f64,
}

impl Default for MollifySection {
    fn default() -> Self {
        MollifySection { amplitude: 0.2, ks: vec![2.0, 4.0, 8.0], max_ratio: 8.0 }
    }
}

#[derive(Clone, Debug, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct StabilitySection {
    pub deltas: Vec<f64>,
    pub max_spread: f64,
}

impl Default for StabilitySection {
    fn default() -> Self {
        StabilitySection { deltas: vec![1e-3, 5e-4, 2.5e-4], max_spread: 0.25 }
    }
}

#[derive(Clone, Debug, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MorreySection {
    pub p: f64,
    pub q: f64,
}

impl Default for MorreySection {
    fn default() -> Self {
        MorreySection { p: 2.0, q: 2.0 }
    }
}

#[derive(Clone, Copy, Debug, Deserialize, PartialEq, Eq, Hash)]
#[serde(rename_all = "snake_case")]
pub enum Experiment {
    Identities,
    Energy,
    Decay,
    Semigroup,
    Cgl,
    Window,
    Mollify,
    CrossValidation,
    Uniqueness,
    Stability,
    Morrey,
}

impl Experiment {
    pub fn name(self) -> &'static str {
        match self {
            Experiment::Identities => "identities",
            Experiment::Energy => "energy",
            Experiment::Decay => "decay",
            Experiment::Semigroup => "semigroup",
            Experiment::Cgl => "cgl",
            Experiment::Window => "window",
            Experiment::Mollify => "mollify",
            Experiment::CrossValidation => "cross_validation",
            Experiment::Uniqueness => "uniqueness",
            Experiment::Stability => "stability",
            Experiment::Morrey => "morrey",
        }
    }

    fn needs_llg(self) -> bool {
        matches!(self, Experiment::Energy | Experiment::Decay | Experiment::Uniqueness)
    }

    fn needs_cgl(self) -> bool {
        matches!(self, Experiment::Cgl | Experiment::CrossValidation | Experiment::Stability)
    }
}

#[derive(Clone, Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentsSection {
    #[serde(default)]
    pub run: Vec<Experiment>,
}

impl LabConfig {
    pub fn parse(text: &str) -> Result<LabConfig, ConfigError> {
        let cfg: LabConfig = toml::from_str(text).map_err(|e| ConfigError(e.to_string()))?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<LabConfig, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|e| ConfigError(format!("{}: {e}", path.display())))?;
        let mut cfg = LabConfig::parse(&text).map_err(|e| ConfigError(format!("{}: {e}", path.display())))?;
        let base = path.parent().unwrap_or(Path::new("."));
        if let Some(out) = &cfg.output {
            if out.is_relative() {
                cfg.output = Some(base.join(out));
            }
        }
        if let Some(s) = &cfg.initial.snapshot {
            if s.is_relative() {
                cfg.initial.snapshot = Some(base.join(s));
            }
        }
        Ok(cfg)
    }

    pub fn grid(&self) -> Result<Grid, ConfigError> {
        Grid::new(self.grid.dim, self.grid.n, self.grid.length).map_err(|e| ConfigError(format!("grid: {e}")))
    }

    /// Checks every block an experiment depends on.
    pub fn validate(&self) -> Result<(), ConfigError> {
        let grid = self.grid()?;
        let mut seen = std::collections::HashSet::new();
        for e in &self.experiments.run {
            if !seen.insert(*e) {
                return err(format!("experiments.run: '{}' listed twice", e.name()));
            }
            if e.needs_llg() && self.llg.is_none() {
                return err(format!("experiment '{}' needs an [llg] block", e.name()));
            }
            if e.needs_cgl() && self.cgl.is_none() {
                return err(format!("experiment '{}' needs a [cgl] block", e.name()));
            }
        }
        if let Some(l) = &self.llg {
            l.build(&grid)?;
        }
        if let Some(c) = &self.cgl {
            c.build()?;
            if !(c.m22 >= 0.0) {
                return err("cgl.m22 must be >= 0");
            }
        }
        let s = &self.semigroup;
        if !(s.t0 > 0.0 && s.t1 > s.t0) || s.samples < 2 || s.widths.iter().any(|w| !(*w > 0.0)) || !(s.lambda > 0.0) {
            return err("semigroup: need 0 < t0 < t1, samples >= 2, positive widths and lambda");
        }
        let w = &self.window;
        if !(w.p_max > w.p_min) || w.samples == 0 {
            return err("window: need p_min < p_max and samples >= 1");
        }
        if self.mollify.ks.iter().any(|k| !(*k > 0.0)) || !(self.mollify.amplitude >= 0.0) {
            return err("mollify: ks must be positive and amplitude >= 0");
        }
        if self.stability.deltas.is_empty() {
            return err("stability.deltas must not be empty");
        }
        if !(self.morrey.p >= 1.0) || !(self.morrey.q >= 1.0) {
            return err("morrey: need p, q >= 1");
        }
        let n = self.initial.m_infinity.iter().map(|x| x * x).sum::<f64>();
        if !(n > 0.0) {
            return err("initial.m_infinity must be nonzero");
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = "[grid]\ndim = 1\nn = 16\n";

    #[test]
    fn minimal_parses() {
        let cfg = LabConfig::parse(MINIMAL).unwrap();
        cfg.validate().unwrap();
        assert!(cfg.experiments.run.is_empty());
        assert_eq!(cfg.grid.length, 2.0 * PI);
    }

    #[test]
    fn unknown_key_is_rejected_with_location() {
        let e = LabConfig::parse("[grid]\ndim = 1\nn = 16\nsize = 3\n").unwrap_err();
        assert!(e.0.contains("size"), "{e}");
        assert!(e.0.contains("line 4"), "{e}");
    }

    #[test]
    fn missing_block_is_rejected() {
        let cfg = LabConfig::parse(&format!("{MINIMAL}[experiments]\nrun = [\"energy\"]\n")).unwrap();
        assert!(cfg.validate().is_err());
        assert!(LabConfig::parse(&format!("{MINIMAL}[experiments]\nrun = [\"nonsense\"]\n")).is_err());
    }
}
