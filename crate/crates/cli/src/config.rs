//! Run configuration: command-line flags layered over an optional JSON file.

use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use ontic_nogo::hilbert::Direction;
use ontic_nogo::optimize::SimplexOptions;
use ontic_nogo::report::ScenarioKind;
use ontic_nogo::ontic::DEFAULT_ENUMERATION_CAP;
use serde::{Deserialize, Serialize};

use crate::CliError;

#[derive(Debug, Parser)]
#[command(name = "ontic-nogo", version, about = "Encapsulated-measurement no-go scenarios with reproducible reports")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Friend measures a spin; the superobserver verifies the two-branch state.
    EmBasic {
        /// Number of repeated verification measurements.
        #[arg(long)]
        repeats: Option<usize>,
        #[command(flatten)]
        common: CommonArgs,
    },
    /// Free routing between two superobservers with ontic-state bookkeeping.
    ArgumentOne {
        /// Direction n̂₁ as `polar,azimuth` in radians.
        #[arg(long, value_parser = parse_direction)]
        n1: Option<[f64; 2]>,
        /// Direction n̂₂ as `polar,azimuth` in radians.
        #[arg(long, value_parser = parse_direction)]
        n2: Option<[f64; 2]>,
        #[arg(long)]
        trials: Option<usize>,
        /// Let routing coins be independent of the ontic state.
        #[arg(long)]
        no_superdeterminism: bool,
        #[command(flatten)]
        common: CommonArgs,
    },
    /// Friend's outcome followed by a signal that may leave the lab untouched.
    ArgumentTwo {
        /// Time at which the updated state is assigned.
        #[arg(long)]
        t0: Option<f64>,
        #[arg(long, value_enum)]
        branch: Option<Branch>,
        #[command(flatten)]
        common: CommonArgs,
    },
    /// Largest classical overlap of two qubit states over a measurement set.
    OverlapLp {
        /// First state: spin up along `polar,azimuth`.
        #[arg(long, value_parser = parse_direction)]
        a: Option<[f64; 2]>,
        /// Second state: spin up along `polar,azimuth`.
        #[arg(long, value_parser = parse_direction)]
        b: Option<[f64; 2]>,
        /// Measurement axes, `polar,azimuth` each; repeat the flag for more.
        #[arg(long = "basis", value_parser = parse_direction)]
        bases: Vec<[f64; 2]>,
        /// Run the two-copy |0⟩,|+⟩ case with the entangled antidistinguishing basis instead.
        #[arg(long)]
        pbr: bool,
        /// Upper bound on the number of ontic states.
        #[arg(long)]
        lp_cap: Option<usize>,
        #[command(flatten)]
        common: CommonArgs,
    },
    /// Quantum overlap and the (2/d)·ω_Q bound.
    Bclm {
        /// |⟨a|b⟩|.
        #[arg(long)]
        inner: Option<f64>,
        /// Hilbert-space dimension.
        #[arg(long)]
        dim: Option<usize>,
        #[command(flatten)]
        common: CommonArgs,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Branch {
    Up,
    Down,
    Random,
}

#[derive(Debug, Default, Args)]
pub struct CommonArgs {
    /// JSON file with any of the run settings; flags take precedence.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Write the JSON report here instead of stdout.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Also write the trial log as CSV.
    #[arg(long)]
    pub csv: Option<PathBuf>,
    #[arg(long, env = "ONTIC_NOGO_THREADS")]
    pub threads: Option<usize>,
    /// Exit with status 1 when a contradiction is detected.
    #[arg(long)]
    pub fail_on_contradiction: bool,
    /// Include wall-clock time in the report (breaks byte-stability).
    #[arg(long)]
    pub emit_timing: bool,
}

fn parse_direction(s: &str) -> Result<[f64; 2], String> {
    let parts: Vec<&str> = s.split(',').map(str::trim).collect();
    let [p, a] = parts.as_slice() else {
        return Err(format!("expected `polar,azimuth`, got `{s}`"));
    };
    let polar: f64 = p.parse().map_err(|e| format!("polar angle: {e}"))?;
    let azimuth: f64 = a.parse().map_err(|e| format!("azimuth: {e}"))?;
    Direction::new(polar, azimuth).map_err(|e| e.to_string())?;
    Ok([polar, azimuth])
}

/// LP tolerance overrides.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ToleranceOverrides {
    pub lp_pivot: Option<f64>,
    pub lp_optimality: Option<f64>,
    pub lp_feasibility: Option<f64>,
    pub lp_max_iterations: Option<usize>,
}

impl ToleranceOverrides {
    pub fn simplex_options(&self) -> SimplexOptions {
        let d = SimplexOptions::default();
        SimplexOptions {
            pivot_tol: self.lp_pivot.unwrap_or(d.pivot_tol),
            optimality_tol: self.lp_optimality.unwrap_or(d.optimality_tol),
            feasibility_tol: self.lp_feasibility.unwrap_or(d.feasibility_tol),
            max_iterations: self.lp_max_iterations.unwrap_or(d.max_iterations),
        }
    }
}

/// Every setting any scenario accepts. The same shape is read from
/// `--config` files; unset fields fall back to defaults per scenario.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub scenario: Option<ScenarioKind>,
    pub n1: Option<[f64; 2]>,
    pub n2: Option<[f64; 2]>,
    pub trials: Option<usize>,
    pub seed: Option<u64>,
    pub no_superdeterminism: Option<bool>,
    pub t0: Option<f64>,
    pub branch: Option<Branch>,
    pub repeats: Option<usize>,
    pub a: Option<[f64; 2]>,
    pub b: Option<[f64; 2]>,
    pub bases: Option<Vec<[f64; 2]>>,
    pub pbr: Option<bool>,
    pub inner: Option<f64>,
    pub dim: Option<usize>,
    pub lp_cap: Option<usize>,
    pub threads: Option<usize>,
    pub out: Option<PathBuf>,
    pub csv: Option<PathBuf>,
    pub tolerances: Option<ToleranceOverrides>,
}

impl RunConfig {
    pub fn from_file(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Usage(format!("cannot read config {}: {e}", path.display())))?;
        serde_json::from_str(&text).map_err(|e| CliError::Usage(format!("invalid config {}: {e}", path.display())))
    }

    /// Fields set in `over` replace those in `self`.
    pub fn overlay(self, over: RunConfig) -> RunConfig {
        RunConfig {
            scenario: over.scenario.or(self.scenario),
            n1: over.n1.or(self.n1),
            n2: over.n2.or(self.n2),
            trials: over.trials.or(self.trials),
            seed: over.seed.or(self.seed),
            no_superdeterminism: over.no_superdeterminism.or(self.no_superdeterminism),
            t0: over.t0.or(self.t0),
            branch: over.branch.or(self.branch),
            repeats: over.repeats.or(self.repeats),
            a: over.a.or(self.a),
            b: over.b.or(self.b),
            bases: over.bases.or(self.bases),
            pbr: over.pbr.or(self.pbr),
            inner: over.inner.or(self.inner),
            dim: over.dim.or(self.dim),
            lp_cap: over.lp_cap.or(self.lp_cap),
            threads: over.threads.or(self.threads),
            out: over.out.or(self.out),
            csv: over.csv.or(self.csv),
            tolerances: over.tolerances.or(self.tolerances),
        }
    }

    /// Builds the effective configuration: file first, then flags.
    pub fn from_command(cmd: Command) -> Result<(RunConfig, Flags), CliError> {
        let (flags_cfg, common) = match cmd {
            Command::EmBasic { repeats, common } => {
                (RunConfig { scenario: Some(ScenarioKind::EmBasic), repeats, ..Default::default() }, common)
            }
            Command::ArgumentOne { n1, n2, trials, no_superdeterminism, common } => (
                RunConfig {
                    scenario: Some(ScenarioKind::ArgumentOne),
                    n1,
                    n2,
                    trials,
                    no_superdeterminism: no_superdeterminism.then_some(true),
                    ..Default::default()
                },
                common,
            ),
            Command::ArgumentTwo { t0, branch, common } => {
                (RunConfig { scenario: Some(ScenarioKind::ArgumentTwo), t0, branch, ..Default::default() }, common)
            }
            Command::OverlapLp { a, b, bases, pbr, lp_cap, common } => (
                RunConfig {
                    scenario: Some(ScenarioKind::OverlapLp),
                    a,
                    b,
                    bases: (!bases.is_empty()).then_some(bases),
                    pbr: pbr.then_some(true),
                    lp_cap,
                    ..Default::default()
                },
                common,
            ),
            Command::Bclm { inner, dim, common } => {
                (RunConfig { scenario: Some(ScenarioKind::Bclm), inner, dim, ..Default::default() }, common)
            }
        };
        let scenario = flags_cfg.scenario;
        let base = match &common.config {
            Some(path) => RunConfig::from_file(path)?,
            None => RunConfig::default(),
        };
        if let (Some(file), Some(cmd)) = (base.scenario, scenario) {
            if file != cmd {
                return Err(CliError::Usage(format!(
                    "config file is for {file:?} but the subcommand is {cmd:?}"
                )));
            }
        }
        let flags_cfg = RunConfig {
            seed: common.seed,
            out: common.out.clone(),
            csv: common.csv.clone(),
            threads: common.threads,
            ..flags_cfg
        };
        let cfg = base.overlay(flags_cfg);
        cfg.validate()?;
        Ok((cfg, Flags { fail_on_contradiction: common.fail_on_contradiction, emit_timing: common.emit_timing }))
    }

    pub fn validate(&self) -> Result<(), CliError> {
        if self.trials == Some(0) {
            return Err(CliError::Usage("--trials must be at least 1".into()));
        }
        if self.lp_cap == Some(0) {
            return Err(CliError::Usage("--lp-cap must be at least 1".into()));
        }
        for d in [self.n1, self.n2, self.a, self.b].into_iter().flatten().chain(self.bases.iter().flatten().copied()) {
            direction(d)?;
        }
        Ok(())
    }

    pub fn lp_cap(&self) -> usize {
        self.lp_cap.unwrap_or(DEFAULT_ENUMERATION_CAP)
    }

    pub fn threads(&self) -> usize {
        self.threads.unwrap_or(0)
    }

    pub fn simplex_options(&self) -> SimplexOptions {
        self.tolerances.unwrap_or_default().simplex_options()
    }
}

pub fn direction(d: [f64; 2]) -> Result<Direction, CliError> {
    Direction::new(d[0], d[1]).map_err(|e| CliError::Usage(format!("direction {d:?}: {e}")))
}

pub fn require<T>(value: Option<T>, flag: &str) -> Result<T, CliError> {
    value.ok_or_else(|| CliError::Usage(format!("missing required flag --{flag} (or `{}` in --config)", flag.replace('-', "_"))))
}

/// Output behaviour that does not change the report's content.
#[derive(Clone, Copy, Debug, Default)]
pub struct Flags {
    pub fail_on_contradiction: bool,
    pub emit_timing: bool,
}
