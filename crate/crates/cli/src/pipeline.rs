//! One function per subcommand, each turning a resolved [`RunConfig`] into a
//! report.

use std::collections::BTreeMap;
use std::f64::consts::FRAC_PI_2;

use ontic_nogo::hilbert::{spin_state, Povm, ProjectiveMeasurement, StateVector};
use ontic_nogo::ontic::MeasurementSet;
use ontic_nogo::optimize::{
    bclm_bound, bclm_from_inner, max_common_overlap_with, pbr_zero_plus_fixture, pbr_zero_plus_setup,
    verify_antidistinguishing, OverlapSolution,
};
use ontic_nogo::report::{emit_trials_csv, RunReport, ScenarioKind};
use ontic_nogo::scenario::{
    argument_one::argument_one_layout, run_argument_one, run_argument_two, run_em_basic, ArgumentOneConfig,
    BasisId, Outcome, StateLabel,
};
use serde_json::{json, Value};

use crate::config::{direction, require, Branch, RunConfig};
use crate::CliError;

pub const DEFAULT_TRIALS: usize = 1000;
pub const DEFAULT_REPEATS: usize = 10;

pub struct Execution {
    pub report: RunReport,
    pub csv: Vec<u8>,
    /// A certificate was issued or the LP certified a forced overlap to be zero.
    pub contradiction: bool,
}

/// Runs the scenario named in `cfg`; `seed` must already be resolved.
pub fn execute(cfg: &RunConfig, seed: u64) -> Result<Execution, CliError> {
    let scenario = cfg.scenario.ok_or_else(|| CliError::Usage("no scenario selected".into()))?;
    let mut exec = match scenario {
        ScenarioKind::EmBasic => em_basic(cfg, seed)?,
        ScenarioKind::ArgumentOne => argument_one(cfg, seed)?,
        ScenarioKind::ArgumentTwo => argument_two(cfg, seed)?,
        ScenarioKind::OverlapLp => overlap_lp(cfg, seed)?,
        ScenarioKind::Bclm => bclm(cfg, seed)?,
    };
    if exec.csv.is_empty() {
        exec.csv = emit_trials_csv(&exec.report.trials);
    }
    Ok(exec)
}

fn em_basic(cfg: &RunConfig, seed: u64) -> Result<Execution, CliError> {
    let repeats = cfg.repeats.unwrap_or(DEFAULT_REPEATS);
    let run = run_em_basic(seed, repeats)?;
    let mut report = RunReport::new(ScenarioKind::EmBasic, json!({ "repeats": repeats }), seed);
    report.details = serde_json::to_value(&run)?;
    Ok(Execution { report, csv: Vec::new(), contradiction: false })
}

fn argument_one(cfg: &RunConfig, seed: u64) -> Result<Execution, CliError> {
    let n1 = require(cfg.n1, "n1")?;
    let n2 = require(cfg.n2, "n2")?;
    let core_cfg = ArgumentOneConfig {
        n1: direction(n1)?,
        n2: direction(n2)?,
        trials: cfg.trials.unwrap_or(DEFAULT_TRIALS),
        seed,
        no_superdeterminism: cfg.no_superdeterminism.unwrap_or(false),
        threads: cfg.threads(),
    };
    let run = run_argument_one(&core_cfg)?;
    let echo = json!({
        "n1": n1,
        "n2": n2,
        "trials": core_cfg.trials,
        "no_superdeterminism": core_cfg.no_superdeterminism,
    });

    let count = |f: &dyn Fn(&&ontic_nogo::scenario::TrialRecord) -> bool| run.records.iter().filter(f).count();
    let details = json!({
        "fprime_up": count(&|r| r.fprime_outcome == Outcome::Up),
        "zz_trials": count(&|r| r.is_zz()),
        "n1_trials": count(&|r| r.f_basis == BasisId::N1),
        "n2_trials": count(&|r| r.f_basis == BasisId::N2),
    });
    let mut overlap = bclm_bound(
        run.registry.get(StateLabel::PsiN1)?,
        run.registry.get(StateLabel::PsiN2)?,
        argument_one_layout().total_dim(),
    )?;
    overlap.pbr_disjoint_required = !run.certificates.is_empty();

    let contradiction = !run.certificates.is_empty();
    let mut report = RunReport::new(ScenarioKind::ArgumentOne, echo, seed).with_ledger(run.ledger, run.fidelities);
    report.trials = run.records;
    report.certificates = run.certificates;
    report.overlap = Some(overlap);
    report.details = details;
    Ok(Execution { report, csv: Vec::new(), contradiction })
}

fn argument_two(cfg: &RunConfig, seed: u64) -> Result<Execution, CliError> {
    let t0 = require(cfg.t0, "t0")?;
    let branch = cfg.branch.unwrap_or(Branch::Random);
    let force = match branch {
        Branch::Up => Some(Outcome::Up),
        Branch::Down => Some(Outcome::Down),
        Branch::Random => None,
    };
    let run = run_argument_two(t0, seed, force)?;
    let echo = json!({ "t0": t0, "branch": branch });
    let mut report =
        RunReport::new(ScenarioKind::ArgumentTwo, echo, seed).with_ledger(run.ledger.clone(), run.fidelities.clone());
    report.details = serde_json::to_value(run.summary())?;
    report.certificates = run.certificate.clone().into_iter().collect();
    report.overlap = Some(run.overlap.clone());
    let contradiction = !report.certificates.is_empty();
    Ok(Execution { report, csv: Vec::new(), contradiction })
}

fn spin_povm(d: [f64; 2]) -> Result<Povm, CliError> {
    let d = direction(d)?;
    Ok(ProjectiveMeasurement::from_basis(&[spin_state(d, true), spin_state(d, false)])?.into())
}

fn witness_weights(sol: &OverlapSolution) -> BTreeMap<String, Vec<f64>> {
    sol.witness.epistemics().iter().map(|e| (e.label().to_string(), e.weights().to_vec())).collect()
}

fn lp_details(sol: &OverlapSolution, ms: &MeasurementSet) -> Value {
    json!({
        "measurements": ms.ids().collect::<Vec<_>>(),
        "ontic_states": sol.witness.space().len(),
        "iterations": sol.lp.iterations,
        "dual_objective": sol.lp.dual.as_ref().map(|d| d.objective),
        "witness": witness_weights(sol),
    })
}

fn overlap_lp(cfg: &RunConfig, seed: u64) -> Result<Execution, CliError> {
    let opts = cfg.simplex_options();
    let cap = cfg.lp_cap();
    if cfg.pbr.unwrap_or(false) {
        let (fixture, _) = pbr_zero_plus_fixture()?;
        let (ms, states) = pbr_zero_plus_setup(true)?;
        let (base_ms, _) = pbr_zero_plus_setup(false)?;
        let labels = ["00", "0+", "+0", "++"];
        let pairs: Vec<(&str, &StateVector)> = labels.iter().copied().zip(states.iter()).collect();
        let check = verify_antidistinguishing(&fixture, &states)?;
        let without = max_common_overlap_with(&pairs, &base_ms, cap, &opts)?;
        let with = max_common_overlap_with(&pairs, &ms, cap, &opts)?;

        let zero = spin_state(direction([0.0, 0.0])?, true);
        let plus = spin_state(direction([FRAC_PI_2, 0.0])?, true);
        let overlap = bclm_bound(&zero, &plus, 2)?.with_classical(with.omega_c_max);
        let echo = json!({ "pbr": true, "lp_cap": cap, "tolerances": cfg.tolerances });
        let mut report = RunReport::new(ScenarioKind::OverlapLp, echo, seed);
        report.overlap = Some(overlap);
        report.details = json!({
            "antidistinguishing": check,
            "without_fixture": { "omega_c_max": without.omega_c_max, "lp": lp_details(&without, &base_ms) },
            "with_fixture": { "omega_c_max": with.omega_c_max, "lp": lp_details(&with, &ms) },
        });
        let contradiction = report.overlap.as_ref().is_some_and(|o| o.contradiction);
        return Ok(Execution { report, csv: Vec::new(), contradiction });
    }

    let a = require(cfg.a, "a")?;
    let b = require(cfg.b, "b")?;
    let bases = cfg.bases.clone().unwrap_or_else(|| vec![[0.0, 0.0], [FRAC_PI_2, 0.0]]);
    let ms = MeasurementSet::new(
        bases
            .iter()
            .enumerate()
            .map(|(i, &d)| Ok((format!("m{i}"), spin_povm(d)?)))
            .collect::<Result<Vec<_>, CliError>>()?,
    )?;
    let sa = spin_state(direction(a)?, true);
    let sb = spin_state(direction(b)?, true);
    let sol = max_common_overlap_with(&[("a", &sa), ("b", &sb)], &ms, cap, &opts)?;
    let overlap = bclm_bound(&sa, &sb, 2)?.with_classical(sol.omega_c_max);
    let echo = json!({ "a": a, "b": b, "bases": bases, "lp_cap": cap, "tolerances": cfg.tolerances });
    let mut report = RunReport::new(ScenarioKind::OverlapLp, echo, seed);
    report.details = lp_details(&sol, &ms);
    report.overlap = Some(overlap);
    Ok(Execution { report, csv: Vec::new(), contradiction: false })
}

fn bclm(cfg: &RunConfig, seed: u64) -> Result<Execution, CliError> {
    let inner = require(cfg.inner, "inner")?;
    let dim = require(cfg.dim, "dim")?;
    let overlap = bclm_from_inner(inner, dim)?;
    let mut report = RunReport::new(ScenarioKind::Bclm, json!({ "inner": inner, "dim": dim }), seed);
    report.overlap = Some(overlap);
    Ok(Execution { report, csv: Vec::new(), contradiction: false })
}
