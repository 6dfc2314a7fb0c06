//! Acceptance gate. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any criterion fails.

use std::f64::consts::{FRAC_1_SQRT_2, FRAC_PI_2};
use std::process::Command;
use std::time::{Duration, Instant};

use num_complex::Complex64 as C;
use ontic_nogo::hilbert::{spin_state, Direction, Povm, ProjectiveMeasurement, StateVector, SubsystemLayout, UnitaryOp};
use ontic_nogo::ontic::{check_reproduction, MeasurementSet, DEFAULT_ENUMERATION_CAP};
use ontic_nogo::optimize::{
    bclm_bound, bclm_from_inner, max_classical_overlap, max_common_overlap, pbr_zero_plus_fixture, pbr_zero_plus_setup,
    verify_antidistinguishing,
};
use ontic_nogo::report::ScenarioKind;
use ontic_nogo::scenario::{run_argument_two, run_em_basic, Outcome, StateLabel};
use ontic_nogo_cli::config::RunConfig;
use ontic_nogo_cli::pipeline::execute;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

type Check = Result<String, String>;
type Criterion = (&'static str, fn() -> Check);

fn ensure(ok: bool, what: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(what())
    }
}

fn timed(limit: Duration, f: impl FnOnce() -> Check) -> Check {
    let start = Instant::now();
    let detail = f()?;
    let elapsed = start.elapsed();
    ensure(elapsed < limit, || format!("took {elapsed:?}, limit {limit:?}"))?;
    Ok(format!("{detail} [{:.0} ms]", elapsed.as_secs_f64() * 1e3))
}

fn em_basic() -> Check {
    timed(Duration::from_secs(1), || {
        let run = run_em_basic(1, 10).map_err(|e| e.to_string())?;
        let [p_up, p_down] = run.branch_probabilities;
        ensure((p_up - 0.5).abs() <= 1e-10 && (p_down - 0.5).abs() <= 1e-10, || {
            format!("branch probabilities {p_up}, {p_down}")
        })?;
        ensure((run.verification_probability - 1.0).abs() <= 1e-10, || {
            format!("verification probability {}", run.verification_probability)
        })?;
        ensure(run.repeated_outcomes.iter().all(|&k| k == 0), || "verification returned outcome 1".into())?;
        ensure(run.min_post_fidelity >= 1.0 - 1e-10, || format!("post fidelity {}", run.min_post_fidelity))?;
        Ok(format!(
            "branches ({p_up:.12}, {p_down:.12}), P(0) = {:.12}, post fidelity {:.12}",
            run.verification_probability, run.min_post_fidelity
        ))
    })
}

/// `|Ψ⟩` by explicit branch sums over `S(2) F(f) S′(2) F′(3)`. With
/// `shared_records` the down-branch friend reuses the z record levels, which
/// gives the 36-dimensional variant; otherwise `F` has five levels.
fn contraction_psi(polar: f64, azimuth: f64, shared_records: bool) -> (Vec<C>, usize) {
    let f_dim = if shared_records { 3 } else { 5 };
    let dim = 2 * f_dim * 2 * 3;
    let idx = |s: usize, f: usize, sp: usize, fp: usize| ((s * f_dim + f) * 2 + sp) * 3 + fp;
    let vecs = |t: f64, p: f64| {
        let (c, s) = ((t / 2.0).cos(), (t / 2.0).sin());
        let e = C::from_polar(1.0, p);
        [[C::new(c, 0.0), e * s], [C::new(s, 0.0), -e * c]]
    };
    let plus = [C::new(FRAC_1_SQRT_2, 0.0); 2];
    let mut psi = vec![C::new(0.0, 0.0); dim];
    for sp in 0..2 {
        let (basis, base) = if sp == 0 { (vecs(0.0, 0.0), 1) } else { (vecs(polar, azimuth), if shared_records { 1 } else { 3 }) };
        for k in 0..2 {
            let amp: C = (0..2).map(|i| basis[k][i].conj() * plus[i]).sum();
            for s in 0..2 {
                psi[idx(s, base + k, sp, sp + 1)] += FRAC_1_SQRT_2 * basis[k][s] * amp;
            }
        }
    }
    (psi, dim)
}

fn contraction_fidelity(shared_records: bool) -> (f64, usize) {
    let (a, dim) = contraction_psi(0.0, 0.0, shared_records);
    let (b, _) = contraction_psi(FRAC_PI_2, 0.0, shared_records);
    let mut acc = C::new(0.0, 0.0);
    for i in 0..dim {
        acc += a[i].conj() * b[i];
    }
    (acc.norm_sqr(), dim)
}

fn argument_one() -> Check {
    timed(Duration::from_secs(10), || {
        let n = 10_000;
        let mut cfg = RunConfig {
            scenario: Some(ScenarioKind::ArgumentOne),
            n1: Some([0.0, 0.0]),
            n2: Some([FRAC_PI_2, 0.0]),
            trials: Some(n),
            no_superdeterminism: Some(true),
            ..Default::default()
        };
        let exec = execute(&cfg, 2024).map_err(|e| e.to_string())?;
        let r = &exec.report;
        let up = r.trials.iter().filter(|t| t.fprime_outcome == Outcome::Up).count();
        let sigma = (0.25 / n as f64).sqrt();
        let frac = up as f64 / n as f64;
        ensure((frac - 0.5).abs() <= 3.0 * sigma, || format!("F' up fraction {frac}"))?;

        let ledger = r.ledger.as_ref().ok_or("no ledger")?;
        for t in r.trials.iter().filter(|t| t.is_zz()) {
            let entry = ledger.entries.iter().find(|e| e.trial == t.trial_index).ok_or("missing ledger entry")?;
            ensure(entry.states().len() == 2, || format!("z-z trial {} has {:?}", t.trial_index, entry.states()))?;
        }
        ensure(!r.certificates.is_empty(), || "no certificates".into())?;
        let (f60, d60) = contraction_fidelity(false);
        let (f36, d36) = contraction_fidelity(true);
        for c in &r.certificates {
            ensure((c.fidelity - f60).abs() <= 1e-9 && (c.fidelity - f36).abs() <= 1e-9, || {
                format!("certificate fidelity {} vs oracles {f60} ({d60}-dim), {f36} ({d36}-dim)", c.fidelity)
            })?;
        }
        let f_table = r.fidelities.as_ref().and_then(|t| t.get(StateLabel::PsiN1, StateLabel::PsiN2)).ok_or("no fidelity")?;

        cfg.no_superdeterminism = Some(false);
        let off = execute(&cfg, 2024).map_err(|e| e.to_string())?;
        ensure(off.report.certificates.is_empty(), || format!("{} certificates with flag off", off.report.certificates.len()))?;
        Ok(format!(
            "F' up {frac:.4} (3σ = {:.4}), {} certificates, fidelity {f_table:.12} vs oracle {f60:.12}; flag off: 0 certificates",
            3.0 * sigma,
            r.certificates.len()
        ))
    })
}

fn argument_two() -> Check {
    timed(Duration::from_secs(1), || {
        let up = run_argument_two(1.0, 1, Some(Outcome::Up)).map_err(|e| e.to_string())?;
        ensure(up.lambda_at_zero == up.lambda_at_t0, || "token changed on the up branch".into())?;
        let cert = up.certificate.as_ref().ok_or("no certificate on the up branch")?;
        ensure((cert.fidelity - 0.5).abs() <= 1e-10, || format!("fidelity {}", cert.fidelity))?;
        let down = run_argument_two(1.0, 1, Some(Outcome::Down)).map_err(|e| e.to_string())?;
        ensure(down.certificate.is_none(), || "certificate on the down branch".into())?;
        Ok(format!("up: same token {}, fidelity {:.12}; down: no certificate", up.lambda_at_t0, cert.fidelity))
    })
}

fn spin_povm(d: Direction) -> Povm {
    ProjectiveMeasurement::from_basis(&[spin_state(d, true), spin_state(d, false)]).unwrap().into()
}

/// Vertices of `{μ ≥ 0 : μ reproduces (pz, px)}` over the four assignments
/// `(z, x)`. The reproduction rows have rank 3, leaving the one-parameter
/// family `μ = (t, pz₀ − t, px₀ − t, 1 − pz₀ − px₀ + t)`; its vertices are the
/// ends of the feasible interval in `t`.
fn vertices(pz: [f64; 2], px: [f64; 2]) -> Vec<[f64; 4]> {
    const L: [(usize, usize); 4] = [(0, 0), (0, 1), (1, 0), (1, 1)];
    let reproduces = |w: &[f64; 4]| {
        w.iter().all(|&x| x >= -1e-12)
            && (0..2).all(|k| {
                let mz: f64 = (0..4).filter(|&l| L[l].0 == k).map(|l| w[l]).sum();
                let mx: f64 = (0..4).filter(|&l| L[l].1 == k).map(|l| w[l]).sum();
                (mz - pz[k]).abs() < 1e-12 && (mx - px[k]).abs() < 1e-12
            })
    };
    let mut out: Vec<[f64; 4]> = Vec::new();
    let lo = [0.0, pz[0] - 1.0, px[0] - 1.0, pz[0] + px[0] - 1.0].into_iter().fold(f64::MIN, f64::max);
    let hi = [pz[0], px[0]].into_iter().fold(f64::MAX, f64::min);
    for t in [lo, hi] {
        let w = [t, pz[0] - t, px[0] - t, 1.0 - pz[0] - px[0] + t];
        if reproduces(&w) && !out.iter().any(|o| o.iter().zip(&w).all(|(a, b)| (a - b).abs() < 1e-12)) {
            out.push(w);
        }
    }
    out
}

fn overlap_lp() -> Check {
    timed(Duration::from_secs(1), || {
        let v0 = vertices([1.0, 0.0], [0.5, 0.5]);
        let vp = vertices([0.5, 0.5], [1.0, 0.0]);
        // Concave objective over a product of polytopes: with single-point
        // polytopes the optimum is their overlap.
        ensure(v0.len() == 1 && vp.len() == 1, || format!("vertices {v0:?} / {vp:?}"))?;
        let oracle: f64 = (0..4).map(|l| v0[0][l].min(vp[0][l])).sum();

        let ms = MeasurementSet::new([("z", spin_povm(Direction::Z)), ("x", spin_povm(Direction::X))]).unwrap();
        let zero = spin_state(Direction::Z, true);
        let plus = spin_state(Direction::X, true);
        let sol = max_classical_overlap(("0", &zero), ("+", &plus), &ms, DEFAULT_ENUMERATION_CAP).map_err(|e| e.to_string())?;
        ensure((sol.omega_c_max - 0.5).abs() <= 1e-9 && (sol.omega_c_max - oracle).abs() <= 1e-9, || {
            format!("LP {} vs enumeration {oracle}", sol.omega_c_max)
        })?;

        let (fixture, products) = pbr_zero_plus_fixture().map_err(|e| e.to_string())?;
        let check = verify_antidistinguishing(&fixture, &products).map_err(|e| e.to_string())?;
        ensure(check.antidistinguishing, || format!("fixture deviation {}", check.max_deviation))?;
        let (ms2, states) = pbr_zero_plus_setup(true).map_err(|e| e.to_string())?;
        let labels = ["00", "0+", "+0", "++"];
        let pairs: Vec<(&str, &StateVector)> = labels.iter().copied().zip(states.iter()).collect();
        let with = max_common_overlap(&pairs, &ms2, DEFAULT_ENUMERATION_CAP).map_err(|e| e.to_string())?;
        ensure(with.omega_c_max <= 1e-9, || format!("overlap with fixture {}", with.omega_c_max))?;
        Ok(format!(
            "LP {:.12} = enumeration {oracle}; with antidistinguishing POVM {:.3e}",
            sol.omega_c_max, with.omega_c_max
        ))
    })
}

fn random_povm(dim: usize, rng: &mut ChaCha8Rng) -> Povm {
    let layout = SubsystemLayout::single("q", dim).unwrap();
    let u = UnitaryOp::random(layout.clone(), rng);
    let basis: Vec<StateVector> =
        (0..dim).map(|k| StateVector::new(layout.clone(), u.matrix().column(k).into_owned()).unwrap()).collect();
    ProjectiveMeasurement::from_basis(&basis).unwrap().into()
}

fn lp_properties() -> Check {
    timed(Duration::from_secs(30), || {
        let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
        let mut worst_residual: f64 = 0.0;
        for i in 0..100 {
            let dim = 2 + i % 2;
            let n_meas = 1 + i % 2;
            let layout = SubsystemLayout::single("q", dim).unwrap();
            let ms = MeasurementSet::new((0..n_meas).map(|m| (format!("m{m}"), random_povm(dim, &mut rng)))).unwrap();
            let a = StateVector::random(layout.clone(), &mut rng);
            let b = StateVector::random(layout, &mut rng);
            let states = [("a", &a), ("b", &b)];
            let solve = |ms: &MeasurementSet| max_classical_overlap(states[0], states[1], ms, DEFAULT_ENUMERATION_CAP);
            let base = solve(&ms).map_err(|e| format!("instance {i}: {e}"))?;

            let order: Vec<usize> = (0..n_meas).rev().collect();
            let permuted = solve(&ms.permuted(&order).unwrap()).map_err(|e| e.to_string())?;
            ensure((permuted.omega_c_max - base.omega_c_max).abs() <= 1e-9, || {
                format!("instance {i}: permutation {} vs {}", permuted.omega_c_max, base.omega_c_max)
            })?;
            let bigger = ms.with("extra", random_povm(dim, &mut rng)).unwrap();
            let more = solve(&bigger).map_err(|e| e.to_string())?;
            ensure(more.omega_c_max <= base.omega_c_max + 1e-9, || {
                format!("instance {i}: adding a measurement raised {} to {}", base.omega_c_max, more.omega_c_max)
            })?;
            for (sol, ms) in [(&base, &ms), (&more, &bigger)] {
                let rep = check_reproduction(&sol.witness, &states, ms).map_err(|e| e.to_string())?;
                worst_residual = worst_residual.max(rep.max_residual);
                ensure(rep.max_residual <= 1e-9, || format!("instance {i}: residual {}", rep.max_residual))?;
            }
        }
        Ok(format!("100 instances, worst reproduction residual {worst_residual:.2e}"))
    })
}

fn bclm() -> Check {
    let a = spin_state(Direction::Z, true);
    let same = bclm_bound(&a, &a, 2).map_err(|e| e.to_string())?.omega_q;
    let orth = bclm_bound(&a, &spin_state(Direction::Z, false), 2).map_err(|e| e.to_string())?.omega_q;
    let half = bclm_from_inner(FRAC_1_SQRT_2, 4).map_err(|e| e.to_string())?.omega_q;
    let want = 1.0 - FRAC_1_SQRT_2;
    ensure((same - 1.0).abs() <= 1e-12, || format!("ω_Q(a,a) = {same}"))?;
    ensure(orth.abs() <= 1e-12, || format!("ω_Q(orthogonal) = {orth}"))?;
    ensure((half - want).abs() <= 1e-12, || format!("ω_Q at 1/√2 = {half}, want {want}"))?;
    Ok(format!("ω_Q = {same}, {orth}, {half:.15}"))
}

fn determinism() -> Check {
    let bin = env!("CARGO_BIN_EXE_ontic-nogo");
    let runs: [&[&str]; 6] = [
        &["em-basic", "--seed", "4"],
        &["argument-one", "--n1", "0,0", "--n2", "1.5708,0", "--trials", "500", "--seed", "7", "--no-superdeterminism"],
        &["argument-two", "--t0", "1.5", "--branch", "random", "--seed", "11"],
        &["overlap-lp", "--a", "0,0", "--b", "1.5707963267948966,0", "--seed", "3"],
        &["overlap-lp", "--pbr", "--seed", "3"],
        &["bclm", "--inner", "0.7071", "--dim", "4", "--seed", "5"],
    ];
    let mut total = 0;
    for args in runs {
        let run = |threads: &str| {
            Command::new(bin).args(args).env("ONTIC_NOGO_THREADS", threads).output().map_err(|e| e.to_string())
        };
        let first = run("1")?;
        let second = run("4")?;
        ensure(first.status.success(), || format!("{args:?} exited with {}", first.status))?;
        ensure(first.stdout == second.stdout && !first.stdout.is_empty(), || format!("{args:?} output differs"))?;
        total += first.stdout.len();
    }
    Ok(format!("6 runs byte-identical across reruns and thread counts ({total} bytes)"))
}

fn main() {
    let criteria: [Criterion; 7] = [
        ("em-basic reconstruction", em_basic),
        ("argument one end-to-end", argument_one),
        ("argument two", argument_two),
        ("overlap LP oracle equivalence", overlap_lp),
        ("LP properties", lp_properties),
        ("BCLM arithmetic", bclm),
        ("determinism", determinism),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        match check() {
            Ok(detail) => println!("criterion {}: PASS {name}: {detail}", i + 1),
            Err(why) => {
                failed += 1;
                println!("criterion {}: FAIL {name}: {why}", i + 1);
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
