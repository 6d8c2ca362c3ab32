use std::path::PathBuf;

use bergman_core::density::Weight;
use bergman_core::poly::Term;
use bergman_core::spaces::SeipOptions;
use bergman_core::{DefiningPolynomial, C64};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    Selftest,
    DensityMap,
    PotentialCheck,
    Flatness,
    SeipSweep,
    RestrictionCheck,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Selftest => "selftest",
            Command::DensityMap => "density-map",
            Command::PotentialCheck => "potential-check",
            Command::Flatness => "flatness",
            Command::SeipSweep => "seip-sweep",
            Command::RestrictionCheck => "restriction-check",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WeightKind {
    /// `−β log(1 − |z|^2)`.
    Log,
    /// `−β log(1 − |z|^2) + c |z|^2`.
    Quadratic,
    /// `−β log(1 − |z|^2) + 2 Re p`.
    Pluriharmonic,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WeightSpec {
    pub kind: WeightKind,
    pub beta: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub c: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub polynomial: Option<Vec<Term>>,
}

impl Default for WeightSpec {
    fn default() -> Self {
        Self {
            kind: WeightKind::Log,
            beta: 3.0,
            c: None,
            polynomial: None,
        }
    }
}

/// Pseudohyperbolic grid of evaluation points.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    pub max_pseudoradius: f64,
    pub rings: usize,
}

impl Default for GridSpec {
    fn default() -> Self {
        Self {
            max_pseudoradius: 0.5,
            rings: 2,
        }
    }
}

/// A run: read from a JSON file, then overridden by flags.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    pub command: Option<Command>,
    pub dimension: usize,
    /// Defining polynomial of `W`; absent means `T = 1` (empty `W`).
    pub polynomial: Option<Vec<Term>>,
    pub weight: WeightSpec,
    pub r_ladder: Vec<f64>,
    pub grid: GridSpec,
    pub eps: Vec<f64>,
    pub degree: u32,
    pub seed: u64,
    /// Directory for the CSV and JSON reports; stdout/stderr when absent.
    pub output: Option<PathBuf>,
    pub separations: Vec<f64>,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            command: None,
            dimension: 1,
            polynomial: None,
            weight: WeightSpec::default(),
            r_ladder: vec![0.5, 0.6, 0.7],
            grid: GridSpec::default(),
            eps: vec![0.05, 0.1],
            degree: 12,
            seed: 1,
            output: None,
            separations: SeipOptions::default().separations,
        }
    }
}

impl RunConfig {
    pub fn from_json(text: &str) -> Result<Self, String> {
        serde_json::from_str(text).map_err(|e| format!("config: {e}"))
    }

    pub fn polynomial(&self) -> Result<DefiningPolynomial, String> {
        match &self.polynomial {
            Some(records) => DefiningPolynomial::from_records(self.dimension, records)
                .map_err(|e| format!("polynomial: {e}")),
            None => DefiningPolynomial::constant(self.dimension, C64::new(1.0, 0.0))
                .map_err(|e| e.to_string()),
        }
    }

    pub fn weight(&self) -> Result<Weight, String> {
        let base = Weight::log_family(self.weight.beta).map_err(|e| format!("weight: {e}"))?;
        match self.weight.kind {
            WeightKind::Log => Ok(base),
            WeightKind::Quadratic => {
                let c = self.weight.c.ok_or("weight: quadratic weights need `c`")?;
                Ok(base.with_quadratic(c))
            }
            WeightKind::Pluriharmonic => {
                let records = self
                    .weight
                    .polynomial
                    .as_ref()
                    .ok_or("weight: pluriharmonic weights need `polynomial`")?;
                let p = DefiningPolynomial::from_records(self.dimension, records)
                    .map_err(|e| format!("weight: {e}"))?;
                Ok(base.with_pluriharmonic(&p))
            }
        }
    }

    /// Reject inconsistent or out-of-range settings before any computation.
    pub fn validate(&self) -> Result<(), String> {
        let command = self.command.ok_or("no command given")?;
        if self.dimension == 0 || self.dimension > 4 {
            return Err(format!(
                "dimension must lie in 1..=4, got {}",
                self.dimension
            ));
        }
        let t = self.polynomial()?;
        if t.terms().is_empty() {
            return Err("polynomial: T must not vanish identically".into());
        }
        let weight = self.weight()?;
        if self.weight.kind == WeightKind::Quadratic && self.weight.c.is_some_and(|c| c < 0.0) {
            return Err("weight: c must be non-negative".into());
        }
        if !self.grid.max_pseudoradius.is_finite()
            || !(0.0..1.0).contains(&self.grid.max_pseudoradius)
        {
            return Err("grid: max_pseudoradius must lie in [0, 1)".into());
        }
        match command {
            Command::Selftest => {}
            Command::DensityMap | Command::PotentialCheck => {
                if self.r_ladder.is_empty() {
                    return Err("r_ladder must not be empty".into());
                }
                if self.r_ladder.iter().any(|&r| !(r > 0.0 && r <= 0.95)) {
                    return Err("r_ladder entries must lie in (0, 0.95]".into());
                }
                if command == Command::DensityMap && self.r_ladder.windows(2).any(|w| w[1] <= w[0])
                {
                    return Err("r_ladder must be increasing".into());
                }
            }
            Command::Flatness | Command::RestrictionCheck => {
                if self.eps.is_empty() || self.eps.iter().any(|&e| !(e > 0.0 && e < 0.5)) {
                    return Err("eps entries must lie in (0, 0.5)".into());
                }
                if self.dimension > 2 {
                    return Err("flatness and restriction checks are implemented for n <= 2".into());
                }
                if command == Command::RestrictionCheck {
                    self.check_space(&weight)?;
                }
            }
            Command::SeipSweep => {
                if self.dimension != 1 {
                    return Err("seip-sweep runs in dimension 1".into());
                }
                if self.separations.is_empty()
                    || self.separations.iter().any(|&s| !(s > 0.0 && s < 1.0))
                {
                    return Err("separations must lie in (0, 1)".into());
                }
                if self.weight.kind != WeightKind::Log {
                    return Err("seip-sweep uses the log weight family".into());
                }
                self.check_space(&weight)?;
            }
        }
        Ok(())
    }

    fn check_space(&self, weight: &Weight) -> Result<(), String> {
        if !(weight.beta * weight.scale > self.dimension as f64) {
            return Err(format!(
                "weight: beta = {} must exceed the dimension {}",
                weight.beta, self.dimension
            ));
        }
        if self.degree > 40 {
            return Err(format!("degree must be at most 40, got {}", self.degree));
        }
        Ok(())
    }
}
