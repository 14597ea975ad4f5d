//! Run configuration: built-in defaults, then a JSON document, then flags.

use std::path::{Path, PathBuf};

use anyhow::{bail, Context};
use clap::ValueEnum;
use mfbose::lattice::{LatticeSpec, Mode};
use mfbose::suite::SuiteConfig;
use mfbose::{Interaction, ModelParams};
use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Csv,
    Json,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InteractionEntry {
    pub mode: [i32; 3],
    pub value: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LatticeConfig {
    pub cutoff_norm: f64,
    #[serde(default = "yes")]
    pub include_zero: bool,
}

fn yes() -> bool {
    true
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct EdConfig {
    pub modes: Vec<[i32; 3]>,
    pub n_max: u32,
    pub total_max: u32,
    /// Particle number multiplying `λ`; the mean-field particle number of
    /// the truncated mode set when absent.
    pub n_ref: Option<f64>,
    pub dimension_cap: usize,
    /// Step of the difference-quotient bracket in `λ`.
    pub step: f64,
}

impl Default for EdConfig {
    fn default() -> Self {
        EdConfig {
            modes: vec![[0, 0, 0], [1, 0, 0]],
            n_max: 14,
            total_max: 14,
            n_ref: None,
            dimension_cap: mfbose::focked::basis::DEFAULT_DIMENSION_CAP,
            step: 1e-3,
        }
    }
}

/// The JSON document. Absent keys take per-command defaults.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    pub beta: Option<Vec<f64>>,
    /// `β / β_c(μ, η)`; mutually exclusive with `beta`.
    pub kappa: Option<Vec<f64>>,
    pub mu: Option<Vec<f64>>,
    pub eta: Option<Vec<f64>>,
    /// Contact interaction `v̂ = v̂(0) δ_{p,0}`; mutually exclusive with
    /// `interaction`.
    pub vhat0: Option<f64>,
    pub interaction: Option<Vec<InteractionEntry>>,
    /// Explicit momentum cutoff; a certified truncation is used when absent.
    pub lattice: Option<LatticeConfig>,
    pub lambda: Option<Vec<f64>>,
    pub delta: Option<Vec<f64>>,
    /// Envelope constant `K`.
    pub k: Option<f64>,
    pub surface_resolution: Option<usize>,
    pub ed: Option<EdConfig>,
    pub suite: Option<SuiteConfig>,
    pub seed: Option<u64>,
    pub tol: Option<f64>,
    pub jobs: Option<usize>,
    pub format: Option<Format>,
    pub out: Option<PathBuf>,
}

/// Flag values; `None` leaves the config value in place.
#[derive(Clone, Debug, Default)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub tol: Option<f64>,
    pub jobs: Option<usize>,
    pub format: Option<Format>,
    pub out: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Command {
    MuSolve,
    Phase,
    Bounds,
    Surface,
    Ed,
    Verify,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::MuSolve => "mu-solve",
            Command::Phase => "phase",
            Command::Bounds => "bounds",
            Command::Surface => "surface",
            Command::Ed => "ed",
            Command::Verify => "verify",
        }
    }
}

/// Either inverse temperatures or ratios to the critical one.
#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Temperature {
    Beta(Vec<f64>),
    Kappa(Vec<f64>),
}

/// A fully resolved configuration.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Resolved {
    pub command: &'static str,
    pub temperature: Temperature,
    pub mu: Vec<f64>,
    pub eta: Vec<f64>,
    pub interaction: Vec<InteractionEntry>,
    pub lattice: Option<LatticeConfig>,
    pub lambda: Vec<f64>,
    pub delta: Vec<f64>,
    pub k: f64,
    pub surface_resolution: usize,
    pub ed: EdConfig,
    pub suite: SuiteConfig,
    pub seed: u64,
    pub tol: f64,
    pub jobs: usize,
    pub format: Format,
    #[serde(skip)]
    pub out: Option<PathBuf>,
}

pub fn load(path: &Path) -> anyhow::Result<RunConfig> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading config {}", path.display()))?;
    serde_json::from_str(&text).with_context(|| format!("parsing config {}", path.display()))
}

fn grid(name: &str, values: Option<Vec<f64>>, default: &[f64]) -> anyhow::Result<Vec<f64>> {
    let v = values.unwrap_or_else(|| default.to_vec());
    if v.is_empty() {
        bail!("grid `{name}` is empty");
    }
    if let Some(x) = v.iter().find(|x| !x.is_finite()) {
        bail!("grid `{name}` contains non-finite value {x}");
    }
    Ok(v)
}

fn lambda_grid() -> Vec<f64> {
    (-3..=3).map(|k| k as f64 * 0.1).collect()
}

impl RunConfig {
    pub fn resolve(self, command: Command, flags: Overrides) -> anyhow::Result<Resolved> {
        // ED works at toy scale, everything else at large η
        let toy = command == Command::Ed;
        let temperature = match (self.beta, self.kappa) {
            (Some(_), Some(_)) => bail!("give either `beta` or `kappa`, not both"),
            (Some(b), None) => Temperature::Beta(grid("beta", Some(b), &[])?),
            (None, Some(k)) => Temperature::Kappa(grid("kappa", Some(k), &[])?),
            (None, None) if toy => Temperature::Beta(vec![0.08]),
            (None, None) => Temperature::Kappa(vec![2.0]),
        };
        let interaction = match (self.vhat0, self.interaction) {
            (Some(_), Some(_)) => bail!("give either `vhat0` or `interaction`, not both"),
            (Some(v), None) => vec![InteractionEntry {
                mode: [0, 0, 0],
                value: v,
            }],
            (None, Some(list)) => list,
            (None, None) if toy => vec![
                InteractionEntry {
                    mode: [0, 0, 0],
                    value: 1.0,
                },
                InteractionEntry {
                    mode: [1, 0, 0],
                    value: 0.5,
                },
                InteractionEntry {
                    mode: [-1, 0, 0],
                    value: 0.5,
                },
            ],
            (None, None) => vec![InteractionEntry {
                mode: [0, 0, 0],
                value: 1.0,
            }],
        };
        let jobs = flags.jobs.or(self.jobs).unwrap_or(1);
        if jobs == 0 {
            bail!("`jobs` must be at least 1");
        }
        let tol = flags.tol.or(self.tol).unwrap_or(1e-10);
        if !(tol > 0.0 && tol < 1.0) {
            bail!("`tol` must lie in (0, 1), got {tol}");
        }
        let k = self.k.unwrap_or(1.0);
        if !(k >= 0.0) || !k.is_finite() {
            bail!("`k` must be nonnegative and finite, got {k}");
        }
        let seed = flags.seed.or(self.seed).unwrap_or(0);
        let mut suite = self.suite.unwrap_or_default();
        suite.seed = seed;
        let resolved = Resolved {
            command: command.name(),
            temperature,
            mu: grid("mu", self.mu, if toy { &[1.5] } else { &[1.0] })?,
            eta: grid("eta", self.eta, if toy { &[3.0] } else { &[1e3] })?,
            interaction,
            lattice: self.lattice,
            lambda: grid("lambda", self.lambda, &lambda_grid())?,
            delta: grid("delta", self.delta, &[0.0])?,
            k,
            surface_resolution: self.surface_resolution.unwrap_or(201),
            ed: self.ed.unwrap_or_default(),
            suite,
            seed,
            tol,
            jobs,
            format: flags.format.or(self.format).unwrap_or_default(),
            out: flags.out.or(self.out),
        };
        // reject bad physics before any work starts
        resolved.interaction()?;
        resolved.lattice_spec()?;
        if resolved.surface_resolution < 2 {
            bail!("`surface_resolution` must be at least 2");
        }
        Ok(resolved)
    }
}

impl Resolved {
    pub fn interaction(&self) -> anyhow::Result<Interaction> {
        Ok(Interaction::from_pairs(
            self.interaction.iter().map(|e| (Mode(e.mode), e.value)),
        )?)
    }

    pub fn lattice_spec(&self) -> anyhow::Result<Option<LatticeSpec>> {
        match &self.lattice {
            None => Ok(None),
            Some(l) => {
                if !(l.cutoff_norm >= 0.0) || !l.cutoff_norm.is_finite() {
                    bail!("lattice cutoff must be nonnegative and finite, got {}", l.cutoff_norm);
                }
                Ok(Some(LatticeSpec::new(l.cutoff_norm, l.include_zero)))
            }
        }
    }

    /// Every `(β or κ, μ, η)` tuple, temperature outermost.
    pub fn tuples(&self) -> anyhow::Result<Vec<ModelParams>> {
        let v = self.interaction()?;
        let temps = match &self.temperature {
            Temperature::Beta(b) | Temperature::Kappa(b) => b,
        };
        let mut out = Vec::new();
        for &t in temps {
            for &mu in &self.mu {
                for &eta in &self.eta {
                    let p = match self.temperature {
                        Temperature::Beta(_) => ModelParams::new(t, mu, eta, v.clone())?,
                        Temperature::Kappa(_) => ModelParams::at_kappa(t, mu, eta, v.clone())?,
                    };
                    out.push(p);
                }
            }
        }
        Ok(out)
    }

    /// Every `(λ, δ)` pair, `λ` outermost.
    pub fn perturbations(&self) -> Vec<(f64, f64)> {
        self.lambda
            .iter()
            .flat_map(|&l| self.delta.iter().map(move |&d| (l, d)))
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unknown_keys_are_rejected() {
        assert!(serde_json::from_str::<RunConfig>(r#"{"bta": [1.0]}"#).is_err());
        assert!(serde_json::from_str::<RunConfig>(r#"{"ed": {"nmax": 3}}"#).is_err());
    }

    #[test]
    fn flags_override_config() {
        let cfg: RunConfig = serde_json::from_str(r#"{"seed": 3, "tol": 1e-8, "format": "json"}"#).unwrap();
        let flags = Overrides {
            seed: Some(9),
            ..Overrides::default()
        };
        let r = cfg.resolve(Command::MuSolve, flags).unwrap();
        assert_eq!(r.seed, 9);
        assert_eq!(r.suite.seed, 9);
        assert_eq!(r.tol, 1e-8);
        assert_eq!(r.format, Format::Json);
    }

    #[test]
    fn negative_interaction_is_rejected() {
        let cfg: RunConfig = serde_json::from_str(r#"{"interaction": [{"mode": [0,0,0], "value": -1.0}]}"#).unwrap();
        assert!(cfg.resolve(Command::Verify, Overrides::default()).is_err());
    }

    #[test]
    fn beta_and_kappa_exclude_each_other() {
        let cfg: RunConfig = serde_json::from_str(r#"{"beta": [1.0], "kappa": [2.0]}"#).unwrap();
        assert!(cfg.resolve(Command::MuSolve, Overrides::default()).is_err());
        let empty: RunConfig = serde_json::from_str(r#"{"mu": []}"#).unwrap();
        assert!(empty.resolve(Command::MuSolve, Overrides::default()).is_err());
    }

    #[test]
    fn tuples_follow_input_order() {
        let cfg: RunConfig = serde_json::from_str(r#"{"beta": [0.1, 0.2], "mu": [1.0], "eta": [10.0, 20.0]}"#).unwrap();
        let r = cfg.resolve(Command::MuSolve, Overrides::default()).unwrap();
        let t: Vec<(f64, f64)> = r.tuples().unwrap().iter().map(|p| (p.beta, p.eta)).collect();
        assert_eq!(t, vec![(0.1, 10.0), (0.1, 20.0), (0.2, 10.0), (0.2, 20.0)]);
    }
}
