//! Run configuration: one TOML file with `[system]`, `[params]`, `[data]`
//! and `[run]` tables.

use serde::Deserialize;
use wavetrack::calibration::{compatible_data, random_data};
use wavetrack::hypsys::{builtin, wave_curve, SystemDef};
use wavetrack::riemann::SolverParams;
use wavetrack::{Mode, Orientation, PiecewiseState, State};

use crate::CliError;

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Config {
    pub system: SystemSection,
    #[serde(default)]
    pub params: ParamsSection,
    pub data: DataSection,
    #[serde(default)]
    pub run: RunSection,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SystemSection {
    pub name: String,
    #[serde(default)]
    pub gamma: f64,
    pub r: Option<f64>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ParamsSection {
    #[serde(default = "default_step")]
    pub eps: f64,
    #[serde(default = "default_step")]
    pub h: f64,
    pub gen_max: Option<u32>,
    pub rho: Option<f64>,
    pub np_speed: Option<f64>,
    pub event_cap: Option<usize>,
}

fn default_step() -> f64 {
    0.02
}

impl Default for ParamsSection {
    fn default() -> Self {
        ParamsSection { eps: default_step(), h: default_step(), gen_max: None, rho: None, np_speed: None, event_cap: None }
    }
}

/// A jump of `family` (1-based) with parameter `sigma` at `x`.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WaveSpec {
    pub x: f64,
    pub family: usize,
    pub sigma: f64,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RandomSpec {
    pub seed: u64,
    #[serde(default = "default_jumps")]
    pub jumps: usize,
    pub tv: f64,
}

fn default_jumps() -> usize {
    3
}

/// Step function with values on `[0, horizon)`.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StepSpec {
    #[serde(default)]
    pub breaks: Vec<f64>,
    pub values: Vec<Vec<f64>>,
}

/// Initial data as explicit pieces, as waves from a left state, or seeded.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DataSection {
    #[serde(default = "default_length")]
    pub length: f64,
    #[serde(default)]
    pub breaks: Vec<f64>,
    pub states: Option<Vec<Vec<f64>>>,
    pub u0: Option<Vec<f64>>,
    #[serde(default)]
    pub waves: Vec<WaveSpec>,
    pub random: Option<RandomSpec>,
    pub g1: Option<StepSpec>,
    pub g2: Option<StepSpec>,
}

fn default_length() -> f64 {
    1.0
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ModeName {
    He,
    Eh,
    Plain,
}

impl From<ModeName> for Mode {
    fn from(m: ModeName) -> Mode {
        match m {
            ModeName::He => Mode::Splitting,
            ModeName::Eh => Mode::ZeroWave,
            ModeName::Plain => Mode::Plain,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OrientationName {
    Forward,
    Rightward,
}

impl From<OrientationName> for Orientation {
    fn from(o: OrientationName) -> Orientation {
        match o {
            OrientationName::Forward => Orientation::Forward,
            OrientationName::Rightward => Orientation::Rightward,
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunSection {
    #[serde(default = "default_horizon")]
    pub horizon: f64,
    #[serde(default = "default_mode")]
    pub mode: ModeName,
    #[serde(default = "default_orientation")]
    pub orientation: OrientationName,
    /// Times of the slice files; the horizon when empty.
    #[serde(default)]
    pub slices: Vec<f64>,
    /// `(ε, h)` pairs of the convergence study, coarse to fine.
    #[serde(default)]
    pub levels: Vec<[f64; 2]>,
    /// Acceptance tolerance of `control --strict`; `ε + h` when absent.
    pub tolerance: Option<f64>,
    /// Initial L¹ distance of the stability pair.
    #[serde(default = "default_perturbation")]
    pub perturbation: f64,
    /// Record functional samples with the Glimm weights of this constant.
    pub glimm_constant: Option<f64>,
}

fn default_horizon() -> f64 {
    1.0
}

fn default_mode() -> ModeName {
    ModeName::He
}

fn default_orientation() -> OrientationName {
    OrientationName::Forward
}

fn default_perturbation() -> f64 {
    0.01
}

impl Default for RunSection {
    fn default() -> Self {
        RunSection {
            horizon: default_horizon(),
            mode: default_mode(),
            orientation: default_orientation(),
            slices: Vec::new(),
            levels: Vec::new(),
            tolerance: None,
            perturbation: default_perturbation(),
            glimm_constant: None,
        }
    }
}

/// Everything a run needs, resolved and validated.
#[derive(Debug, Clone)]
pub struct Resolved {
    pub sys: SystemDef,
    pub params: SolverParams,
    pub ubar: PiecewiseState,
    pub g1: PiecewiseState,
    pub g2: PiecewiseState,
}

fn bad(msg: impl Into<String>) -> CliError {
    CliError::Config(msg.into())
}

fn state(v: &[f64], n: usize, what: &str) -> Result<State, CliError> {
    if v.len() != n {
        return Err(bad(format!("{what}: expected {n} components, got {}", v.len())));
    }
    if v.iter().any(|x| !x.is_finite()) {
        return Err(bad(format!("{what}: non-finite value")));
    }
    Ok(State::from_vec(v.to_vec()))
}

fn check_breaks(breaks: &[f64], lo: f64, hi: f64, what: &str) -> Result<(), CliError> {
    if breaks.iter().any(|b| !(*b > lo && *b < hi)) {
        return Err(bad(format!("{what}: breakpoints must lie inside ({lo}, {hi})")));
    }
    if breaks.windows(2).any(|w| w[0] >= w[1]) {
        return Err(bad(format!("{what}: breakpoints must be increasing")));
    }
    Ok(())
}

fn step(spec: &StepSpec, dim: usize, horizon: f64, what: &str) -> Result<PiecewiseState, CliError> {
    check_breaks(&spec.breaks, 0.0, horizon, what)?;
    if spec.values.len() != spec.breaks.len() + 1 {
        return Err(bad(format!("{what}: need one more value than breakpoints")));
    }
    let values = spec.values.iter().map(|v| state(v, dim, what)).collect::<Result<Vec<_>, _>>()?;
    Ok(PiecewiseState::new(0.0, horizon, spec.breaks.clone(), values))
}

impl Config {
    pub fn parse(text: &str) -> Result<Config, CliError> {
        toml::from_str(text).map_err(|e| bad(e.to_string()))
    }

    pub fn system(&self) -> Result<SystemDef, CliError> {
        let sys = builtin(&self.system.name, self.system.gamma, self.system.r).map_err(|e| bad(e.to_string()))?;
        sys.validate().map_err(|e| bad(e.to_string()))?;
        Ok(sys)
    }

    pub fn solver_params(&self, sys: &SystemDef, eps: f64, h: f64) -> Result<SolverParams, CliError> {
        let mut p = SolverParams::new(sys, eps, h);
        let ps = &self.params;
        if let Some(g) = ps.gen_max {
            p.gen_max = g;
        }
        if let Some(r) = ps.rho {
            p.rho = r;
        }
        if let Some(s) = ps.np_speed {
            p.np_speed = s;
        }
        if let Some(c) = ps.event_cap {
            p.event_cap = c;
        }
        p.validate(sys).map_err(|e| bad(e.to_string()))?;
        Ok(p)
    }

    /// Initial data in the system's own orientation.
    fn initial(&self, sys: &SystemDef) -> Result<PiecewiseState, CliError> {
        let d = &self.data;
        if !(d.length > 0.0 && d.length.is_finite()) {
            return Err(bad("data.length must be positive"));
        }
        let given = [d.states.is_some(), d.u0.is_some(), d.random.is_some()].iter().filter(|b| **b).count();
        if given != 1 {
            return Err(bad("data: give exactly one of `states`, `u0` (with `waves`) or `random`"));
        }
        if let Some(states) = &d.states {
            check_breaks(&d.breaks, 0.0, d.length, "data.breaks")?;
            if states.len() != d.breaks.len() + 1 {
                return Err(bad("data: need one more state than breakpoints"));
            }
            let st = states.iter().map(|v| state(v, sys.n, "data.states")).collect::<Result<Vec<_>, _>>()?;
            return Ok(PiecewiseState::new(0.0, d.length, d.breaks.clone(), st));
        }
        if let Some(u0) = &d.u0 {
            let mut waves = d.waves.clone();
            waves.sort_by(|a, b| a.x.total_cmp(&b.x));
            let breaks: Vec<f64> = waves.iter().map(|w| w.x).collect();
            check_breaks(&breaks, 0.0, d.length, "data.waves")?;
            let mut states = vec![state(u0, sys.n, "data.u0")?];
            for w in &waves {
                if w.family == 0 || w.family > sys.n {
                    return Err(bad(format!("data.waves: family {} out of range 1..={}", w.family, sys.n)));
                }
                let next = wave_curve(sys, w.family - 1, w.sigma, states.last().unwrap()).map_err(CliError::Solver)?;
                states.push(next);
            }
            return Ok(PiecewiseState::new(0.0, d.length, breaks, states));
        }
        let r = d.random.as_ref().unwrap();
        random_data(sys, r.seed, r.jumps, r.tv, d.length).map_err(CliError::Solver)
    }

    /// System, parameters and data at the configured `(ε, h)`. For the
    /// rightward orientation the system is the rightward reading and `[data]`
    /// is the trace at `x = 0` over `(0, length)`.
    pub fn resolve(&self) -> Result<Resolved, CliError> {
        self.resolve_at(self.params.eps, self.params.h)
    }

    pub fn resolve_at(&self, eps: f64, h: f64) -> Result<Resolved, CliError> {
        let base = self.system()?;
        let sys = match self.run.orientation {
            OrientationName::Forward => base,
            OrientationName::Rightward => wavetrack::zerowave::make_rightward(&base).map_err(CliError::Solver)?.sys,
        };
        let horizon = self.run.horizon;
        if !(horizon > 0.0 && horizon.is_finite()) {
            return Err(bad("run.horizon must be positive"));
        }
        let params = self.solver_params(&sys, eps, h)?;
        let ubar = self.initial(&sys)?;
        let (dg1, dg2) = compatible_data(&sys, &ubar, horizon);
        let g1 = match &self.data.g1 {
            Some(s) => step(s, sys.n - sys.m, horizon, "data.g1")?,
            None => dg1,
        };
        let g2 = match &self.data.g2 {
            Some(s) => step(s, sys.m, horizon, "data.g2")?,
            None => dg2,
        };
        Ok(Resolved { sys, params, ubar, g1, g2 })
    }

    pub fn slice_times(&self) -> Vec<f64> {
        if self.run.slices.is_empty() {
            vec![self.run.horizon]
        } else {
            self.run.slices.clone()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"
[system]
name = "SYS-DLD"
gamma = 0.01

[data]
u0 = [0.0, 0.0]
waves = [{ x = 0.5, family = 2, sigma = 0.01 }, { x = 0.25, family = 1, sigma = -0.02 }]
"#;

    #[test]
    fn defaults_and_wave_data() {
        let cfg = Config::parse(MINIMAL).unwrap();
        assert_eq!(cfg.params.eps, 0.02);
        assert_eq!(cfg.run.mode, ModeName::He);
        let r = cfg.resolve().unwrap();
        assert_eq!(r.ubar.breaks, vec![0.25, 0.5]);
        assert_eq!(r.g1.dim(), 1);
        assert_eq!(r.g1.first()[0], r.sys.eval_b1(r.ubar.first())[0]);
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let text = MINIMAL.replace("gamma = 0.01", "gamma = 0.01\nspeed = 3");
        assert!(matches!(Config::parse(&text), Err(CliError::Config(_))));
    }

    #[test]
    fn state_dimension_is_checked() {
        let text = MINIMAL.replace("u0 = [0.0, 0.0]", "u0 = [0.0]");
        let cfg = Config::parse(&text).unwrap();
        assert!(matches!(cfg.resolve(), Err(CliError::Config(_))));
    }

    #[test]
    fn exactly_one_data_source() {
        let text = MINIMAL.replace("[data]", "[data]\nrandom = { seed = 1, tv = 0.05 }");
        let cfg = Config::parse(&text).unwrap();
        assert!(matches!(cfg.resolve(), Err(CliError::Config(_))));
    }
}
