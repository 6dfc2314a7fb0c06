//! Randomized properties of the simplex engine and the overlap LP.

use ontic_nogo::hilbert::{Povm, ProjectiveMeasurement, StateVector, SubsystemLayout, UnitaryOp};
use ontic_nogo::ontic::{check_reproduction, classical_overlap, MeasurementSet, DEFAULT_ENUMERATION_CAP};
use ontic_nogo::optimize::{max_classical_overlap, solve_lp, LpProblem, LpStatus, Relation};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn random_povm(dim: usize, rng: &mut ChaCha8Rng) -> Povm {
    let u = UnitaryOp::random(SubsystemLayout::single("q", dim).unwrap(), rng);
    let basis: Vec<StateVector> = (0..dim)
        .map(|k| StateVector::new(SubsystemLayout::single("q", dim).unwrap(), u.matrix().column(k).into_owned()).unwrap())
        .collect();
    ProjectiveMeasurement::from_basis(&basis).unwrap().into()
}

struct Instance {
    ms: MeasurementSet,
    extra: Povm,
    a: StateVector,
    b: StateVector,
}

fn instance(seed: u64, dim: usize, n_meas: usize) -> Instance {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let layout = SubsystemLayout::single("q", dim).unwrap();
    let ms = MeasurementSet::new((0..n_meas).map(|m| (format!("m{m}"), random_povm(dim, &mut rng)))).unwrap();
    let extra = random_povm(dim, &mut rng);
    let a = StateVector::random(layout.clone(), &mut rng);
    let b = StateVector::random(layout, &mut rng);
    Instance { ms, extra, a, b }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(40))]

    #[test]
    fn overlap_invariants(seed in any::<u64>(), dim in 2usize..=3, n_meas in 1usize..=2) {
        let inst = instance(seed, dim, n_meas);
        let base = max_classical_overlap(("a", &inst.a), ("b", &inst.b), &inst.ms, DEFAULT_ENUMERATION_CAP).unwrap();
        prop_assert!((-1e-9..=1.0 + 1e-9).contains(&base.omega_c_max));

        let swapped = max_classical_overlap(("b", &inst.b), ("a", &inst.a), &inst.ms, DEFAULT_ENUMERATION_CAP).unwrap();
        prop_assert!((base.omega_c_max - swapped.omega_c_max).abs() <= 1e-9);

        let order: Vec<usize> = (0..n_meas).rev().collect();
        let permuted = inst.ms.permuted(&order).unwrap();
        let p = max_classical_overlap(("a", &inst.a), ("b", &inst.b), &permuted, DEFAULT_ENUMERATION_CAP).unwrap();
        prop_assert!((base.omega_c_max - p.omega_c_max).abs() <= 1e-9);

        let bigger = inst.ms.with("extra", inst.extra.clone()).unwrap();
        let more = max_classical_overlap(("a", &inst.a), ("b", &inst.b), &bigger, DEFAULT_ENUMERATION_CAP).unwrap();
        prop_assert!(more.omega_c_max <= base.omega_c_max + 1e-9);

        for sol in [&base, &more] {
            let ms = if std::ptr::eq(sol, &base) { &inst.ms } else { &bigger };
            let rep = check_reproduction(&sol.witness, &[("a", &inst.a), ("b", &inst.b)], ms).unwrap();
            prop_assert!(rep.max_residual <= 1e-9, "residual {}", rep.max_residual);
            let achieved = classical_overlap(sol.witness.epistemic("a").unwrap(), sol.witness.epistemic("b").unwrap()).unwrap();
            prop_assert!((achieved - sol.omega_c_max).abs() <= 1e-9);
            let dual = sol.lp.dual.as_ref().unwrap();
            prop_assert!((dual.objective - sol.lp.objective).abs() <= 1e-9);
            prop_assert!(dual.max_violation <= 1e-9);
        }
    }

    #[test]
    fn identical_states_overlap_fully(seed in any::<u64>(), dim in 2usize..=3) {
        let inst = instance(seed, dim, 2);
        let sol = max_classical_overlap(("a", &inst.a), ("a'", &inst.a), &inst.ms, DEFAULT_ENUMERATION_CAP).unwrap();
        prop_assert!((sol.omega_c_max - 1.0).abs() <= 1e-9);
    }
}

/// Maximum of a two-variable LP by checking every intersection of two
/// boundary lines (including the axes).
fn brute_force_2d(c: [f64; 2], rows: &[([f64; 2], f64)]) -> f64 {
    let mut lines: Vec<([f64; 2], f64)> = rows.to_vec();
    lines.push(([1.0, 0.0], 0.0));
    lines.push(([0.0, 1.0], 0.0));
    let feasible = |x: [f64; 2]| {
        x[0] >= -1e-9 && x[1] >= -1e-9 && rows.iter().all(|(a, b)| a[0] * x[0] + a[1] * x[1] <= b + 1e-9)
    };
    let mut best = f64::NEG_INFINITY;
    for i in 0..lines.len() {
        for j in i + 1..lines.len() {
            let ([a1, b1], r1) = lines[i];
            let ([a2, b2], r2) = lines[j];
            let det = a1 * b2 - a2 * b1;
            if det.abs() < 1e-12 {
                continue;
            }
            let x = [(r1 * b2 - r2 * b1) / det, (a1 * r2 - a2 * r1) / det];
            if feasible(x) {
                best = best.max(c[0] * x[0] + c[1] * x[1]);
            }
        }
    }
    best
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn two_variable_lps_match_vertex_search(
        c in prop::array::uniform2(-2.0f64..2.0),
        rows in prop::collection::vec((prop::array::uniform2(0.05f64..2.0), 0.1f64..3.0), 1..5),
    ) {
        let mut lp = LpProblem::maximize(c.to_vec());
        for (a, b) in &rows {
            lp.add_constraint(a.to_vec(), Relation::Le, *b).unwrap();
        }
        let sol = solve_lp(&lp).unwrap();
        prop_assert_eq!(sol.status, LpStatus::Optimal);
        let oracle = brute_force_2d(c, &rows);
        prop_assert!((sol.objective - oracle).abs() <= 1e-9, "{} vs {}", sol.objective, oracle);
        let dual = sol.dual.unwrap();
        prop_assert!((dual.objective - sol.objective).abs() <= 1e-9);
    }

    #[test]
    fn equality_rows_keep_strong_duality(
        n in 2usize..6,
        seed in any::<u64>(),
    ) {
        // Random transportation-like problem: distribute unit mass with
        // caps, always feasible because the caps exceed the mass.
        use rand::Rng;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let c: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
        let mut lp = LpProblem::maximize(c.clone());
        lp.add_constraint(vec![1.0; n], Relation::Eq, 1.0).unwrap();
        for i in 0..n {
            let mut row = vec![0.0; n];
            row[i] = 1.0;
            lp.add_constraint(row, Relation::Le, 0.6).unwrap();
        }
        let sol = solve_lp(&lp).unwrap();
        prop_assert_eq!(sol.status, LpStatus::Optimal);
        // Greedy is optimal here: fill the best coefficients first.
        let mut sorted = c.clone();
        sorted.sort_by(|a, b| b.partial_cmp(a).unwrap());
        let greedy = sorted[0] * 0.6 + sorted[1] * 0.4;
        prop_assert!((sol.objective - greedy).abs() <= 1e-9);
        prop_assert!((sol.dual.unwrap().objective - greedy).abs() <= 1e-9);
        prop_assert!((sol.x.iter().sum::<f64>() - 1.0).abs() <= 1e-9);
    }
}
