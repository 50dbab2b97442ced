//! Acceptance gate: one PASS/FAIL line per criterion, nonzero exit if any fails.
//!
//! Run alone with `cargo test -p rfim-anneal --test acceptance`.

use std::time::Instant;

use proptest::prelude::*;
use proptest::test_runner::{Config, TestRunner};
use rayon::prelude::*;
use rfim_anneal::bethe_qa::{anneal, build_cluster, solve_cluster, ClusterSolver, MagnetizationField, SweepOptions};
use rfim_anneal::exact_gs::{brute_force_ground_state, min_cut_ground_state, scaled_energy};
use rfim_anneal::harness::{
    residual_stats, run_ensemble, run_instance, spectral_study, ExperimentConfig, Quartiles, RunRecord, SampleStats,
};
use rfim_anneal::spectral::{
    build_hamiltonian, characteristic_time, eigen_residual, lowest_eigenpairs, spectral_trace, uniform_grid,
    EigenOptions, TraceOptions,
};
use rfim_anneal::{generate_instance, Instance, KineticKind, Schedule, Scheme};

const TF: KineticKind = KineticKind::TransverseField;
const FI: KineticKind = KineticKind::FerroInteraction;
const COUPLINGS: [f64; 4] = [2.0, 1.5, 1.0, 0.6];

struct Outcome {
    pass: bool,
    detail: String,
}

impl Outcome {
    fn new(pass: bool, detail: impl Into<String>) -> Self {
        Self { pass, detail: detail.into() }
    }
}

fn report(number: usize, name: &str, started: Instant, outcome: &Outcome) {
    println!(
        "criterion {number} {}: {name} ({:.1} s) {}",
        if outcome.pass { "PASS" } else { "FAIL" },
        started.elapsed().as_secs_f64(),
        outcome.detail
    );
}

fn oracle_equivalence() -> Outcome {
    let lattices = [(3, 3), (3, 4), (4, 3), (4, 4), (4, 5), (5, 4)];
    let cases: Vec<(f64, (usize, usize), u64)> = COUPLINGS
        .iter()
        .flat_map(|&j| lattices.iter().flat_map(move |&l| (0..200u64).map(move |seed| (j, l, seed))))
        .collect();
    let mismatches: Vec<String> = cases
        .par_iter()
        .filter_map(|&(j, (w, h), seed)| {
            let inst = generate_instance::<f64>(w, h, j, seed).unwrap();
            let bf = brute_force_ground_state(&inst).unwrap();
            let mc = min_cut_ground_state(&inst).unwrap();
            // Compared as exact integers 2 * 10 * E; float energies of distinct
            // degenerate ground states may differ in the last bit.
            let (a, b) = (scaled_energy(&inst, &bf.config, 10).unwrap(), scaled_energy(&inst, &mc.config, 10).unwrap());
            (a != b).then(|| format!("J={j} {w}x{h} seed {seed}: {} vs {}", bf.energy, mc.energy))
        })
        .collect();
    Outcome::new(
        mismatches.is_empty(),
        format!(
            "{} instances ({} per J over 3x3..5x4), {} mismatches {:?}",
            cases.len(),
            cases.len() / COUPLINGS.len(),
            mismatches.len(),
            mismatches.iter().take(3).collect::<Vec<_>>()
        ),
    )
}

fn two_level() -> Outcome {
    let grid = uniform_grid::<f64>(201);
    let mut worst_gap = 0.0f64;
    let mut worst_tau = 0.0f64;
    for h in [1.0, -1.0] {
        let inst = Instance::new(1, 1, 1.0, vec![h]).unwrap();
        for kind in [TF, FI] {
            let trace = spectral_trace(&inst, kind, &grid, &TraceOptions::default()).unwrap();
            for (s, g) in trace.s_values.iter().zip(&trace.gap01) {
                let exact = 2.0 * ((1.0 - s) * (1.0 - s) + s * s * h * h).sqrt();
                worst_gap = worst_gap.max((g - exact).abs());
            }
            let report = characteristic_time(&trace).unwrap();
            worst_tau = worst_tau.max((report.tau_c_paper - std::f64::consts::FRAC_1_SQRT_2).abs());
        }
    }
    Outcome::new(
        worst_gap <= 1e-10 && worst_tau <= 1e-10,
        format!("max gap error {worst_gap:.2e}, max tau_c error {worst_tau:.2e} (tolerance 1e-10)"),
    )
}

fn endpoints() -> Outcome {
    let opts = EigenOptions::default();
    let lattices = [(2, 2), (3, 2), (3, 3), (4, 3), (4, 4)];
    let mut worst0 = 0.0f64;
    let mut worst1 = 0.0f64;
    for (k, seed) in (0..20u64).enumerate() {
        let (w, h) = lattices[k % lattices.len()];
        let j = COUPLINGS[k % COUPLINGS.len()];
        let inst = generate_instance::<f64>(w, h, j, seed).unwrap();
        let n = inst.site_count() as f64;
        for (kind, expect) in [(TF, -n), (FI, -n - inst.bond_count() as f64)] {
            let e0 = lowest_eigenpairs(&build_hamiltonian(&inst, kind, 0.0).unwrap(), 1, &opts).unwrap()[0].energy;
            worst0 = worst0.max((e0 - expect).abs());
        }
        let exact = brute_force_ground_state(&inst).unwrap().energy;
        let e1 = lowest_eigenpairs(&build_hamiltonian(&inst, FI, 1.0).unwrap(), 1, &opts).unwrap()[0].energy;
        worst1 = worst1.max((e1 - exact).abs());
    }
    Outcome::new(
        worst0 <= 1e-9 && worst1 <= 1e-9,
        format!("20 instances up to 4x4: max |E(s=0) - closed form| {worst0:.2e}, max |E(s=1) - exact| {worst1:.2e}"),
    )
}

fn spectral_direction() -> Outcome {
    let grid = uniform_grid::<f64>(201);
    let study = |j: f64| {
        let instances: Vec<Instance<f64>> = (0..50).map(|seed| generate_instance(3, 3, j, seed).unwrap()).collect();
        spectral_study(&instances, &grid, &TraceOptions::default()).unwrap()
    };
    let strong = study(2.0);
    let weak = study(0.6);
    let qs = strong.summary().unwrap();
    let qw = weak.summary().unwrap();
    let frac = strong.fraction_fi_faster();
    let pass = qs.median < 1.0 && frac >= 0.6 && (0.5..=2.0).contains(&qw.median);
    let fmt = |q: Quartiles| format!("median {:.3} [q1 {:.3}, q3 {:.3}]", q.median, q.q1, q.q3);
    Outcome::new(
        pass,
        format!(
            "J=2: {}, FI faster on {:.0}%; J=0.6: {} (reference single-instance values 0.24 and 1.21)",
            fmt(qs),
            100.0 * frac,
            fmt(qw)
        ),
    )
}

fn stats(records: &[RunRecord], scheme: Scheme, j: f64, tau: f64) -> SampleStats {
    residual_stats(records, scheme, j, tau)
}

fn fmt_stats(s: &SampleStats) -> String {
    format!("{:.4}±{:.4}", s.mean, s.std_err)
}

fn ordering(records: &[RunRecord], j: f64) -> (bool, String) {
    let tf = stats(records, Scheme::QaTf, j, 100.0);
    let fi = stats(records, Scheme::QaFi, j, 100.0);
    let sa = stats(records, Scheme::Sa, j, 100.0);
    let (d_tf, d_sa, d_pair) = (tf.separation(&fi), sa.separation(&fi), tf.separation(&sa).abs());
    let pass = fi.mean < tf.mean && fi.mean < sa.mean && d_tf >= 2.0 && d_sa >= 2.0 && d_pair <= 3.0;
    (
        pass,
        format!(
            "J={j}, tau=100: TF {} FI {} SA {}; (TF-FI)/se {d_tf:.2}, (SA-FI)/se {d_sa:.2}, |TF-SA|/se {d_pair:.2}",
            fmt_stats(&tf),
            fmt_stats(&fi),
            fmt_stats(&sa)
        ),
    )
}

fn fi_advantage_trend(records: &[RunRecord]) -> Outcome {
    let adv: Vec<f64> = COUPLINGS
        .iter()
        .map(|&j| stats(records, Scheme::QaTf, j, 100.0).mean - stats(records, Scheme::QaFi, j, 100.0).mean)
        .collect();
    let pass = adv.windows(2).all(|w| w[1] <= w[0]);
    let cells: Vec<String> = COUPLINGS.iter().zip(&adv).map(|(j, a)| format!("J={j}: {a:.4}")).collect();
    let sep: Vec<String> = COUPLINGS[1..].iter().map(|&j| ordering(records, j).1).collect();
    Outcome::new(pass, format!("TF-FI advantage {} | {}", cells.join(", "), sep.join(" | ")))
}

fn tau_monotone(records: &[RunRecord]) -> Outcome {
    let mut all_leq = true;
    let mut any_strict = false;
    let mut cells = Vec::new();
    for scheme in Scheme::ALL {
        let slow = stats(records, scheme, 2.0, 100.0);
        let fast = stats(records, scheme, 2.0, 1.0);
        all_leq &= slow.mean <= fast.mean;
        let d = fast.separation(&slow);
        any_strict |= d >= 2.0;
        cells.push(format!("{scheme}: tau=1 {} tau=100 {} ({d:.2} se)", fmt_stats(&fast), fmt_stats(&slow)));
    }
    Outcome::new(all_leq && any_strict, cells.join("; "))
}

fn suite(name: &str, runner: &mut TestRunner, failures: &mut Vec<String>, result: Result<(), String>) {
    match result {
        Ok(()) => println!("  suite {name}: {} cases ok", runner.config().cases),
        Err(e) => {
            println!("  suite {name}: failed: {e}");
            failures.push(name.to_string());
        }
    }
}

fn small_instance(max_sites: usize) -> impl Strategy<Value = Instance<f64>> {
    (1usize..=4, 1usize..=4, prop::sample::select(COUPLINGS.to_vec()), any::<u64>())
        .prop_filter("size", move |(w, h, _, _)| w * h <= max_sites)
        .prop_map(|(w, h, j, seed)| generate_instance(w, h, j, seed).unwrap())
}

fn kind() -> impl Strategy<Value = KineticKind> {
    prop_oneof![Just(TF), Just(FI)]
}

fn invariant_suites() -> Outcome {
    let mut runner = TestRunner::new(Config { cases: 100, failure_persistence: None, ..Config::default() });
    let mut failures = Vec::new();

    let r = runner.run(&(small_instance(10), kind(), 0.0f64..=1.0, any::<u64>()), |(inst, kind, s, seed)| {
        let h = build_hamiltonian(&inst, kind, s).unwrap();
        let dim = h.dimension();
        let mut rng = rand_vec(seed);
        let (x, y): (Vec<f64>, Vec<f64>) = ((0..dim).map(|_| rng()).collect(), (0..dim).map(|_| rng()).collect());
        let (mut hx, mut hy) = (vec![0.0; dim], vec![0.0; dim]);
        h.apply(&x, &mut hx);
        h.apply(&y, &mut hy);
        let (a, b) = (dot(&y, &hx), dot(&x, &hy));
        let scale = h.norm_estimate() * dot(&x, &x).sqrt() * dot(&y, &y).sqrt();
        prop_assert!((a - b).abs() <= 1e-12 * scale.max(1.0));
        Ok(())
    });
    suite("hermiticity", &mut runner, &mut failures, flatten(r));

    let r = runner.run(&(small_instance(10), kind(), 0.0f64..=1.0), |(inst, kind, s)| {
        let h = build_hamiltonian(&inst, kind, s).unwrap();
        let pairs = lowest_eigenpairs(&h, 2.min(h.dimension()), &EigenOptions::default()).unwrap();
        for p in &pairs {
            prop_assert!(eigen_residual(&h, p) <= 1e-9 * (p.energy.abs() + h.norm_estimate()));
        }
        Ok(())
    });
    suite("eigen-residuals", &mut runner, &mut failures, flatten(r));

    let mags = (prop::collection::vec(-1.0f64..=1.0, 16), prop::collection::vec(-1.0f64..=1.0, 16));
    let r = runner.run(&(small_instance(16), kind(), 0.0f64..=1.0, mags), |(inst, kind, s, (mz, mx))| {
        let n = inst.site_count();
        let field = MagnetizationField::from_parts(mz[..n].to_vec(), mx[..n].to_vec()).unwrap();
        for center in 0..n {
            let c = build_cluster(&inst, &field, center, s, kind).unwrap();
            for solver in [ClusterSolver::Dense, ClusterSolver::Krylov] {
                let e = solve_cluster(&c, solver);
                prop_assert!(e.mz.iter().chain(&e.mx).all(|m| m.abs() <= 1.0 + 1e-12));
            }
        }
        Ok(())
    });
    suite("pauli-bounds", &mut runner, &mut failures, flatten(r));

    let schemes = prop::sample::select(Scheme::ALL.to_vec());
    let r = runner.run(&(small_instance(16), schemes, 1.0f64..10.0), |(inst, scheme, tau)| {
        let exact = min_cut_ground_state(&inst).unwrap().energy;
        let rec = run_instance(&inst, exact, scheme, tau, None, &SweepOptions::default()).unwrap();
        prop_assert!(rec.residual_total >= -1e-9);
        Ok(())
    });
    suite("residual-nonnegativity", &mut runner, &mut failures, flatten(r));

    let r = runner.run(&(small_instance(16), kind(), 1.0f64..10.0), |(inst, kind, tau)| {
        let schedule = Schedule::from_tau(tau).unwrap();
        let a = anneal(&inst, kind, &schedule, &SweepOptions::default());
        let b = anneal(&inst, kind, &schedule, &SweepOptions::default());
        prop_assert_eq!(a, b);
        Ok(())
    });
    suite("determinism", &mut runner, &mut failures, flatten(r));

    Outcome::new(failures.is_empty(), format!("5 suites x 100 cases, failed: {failures:?}"))
}

fn flatten<V: std::fmt::Debug>(r: Result<(), proptest::test_runner::TestError<V>>) -> Result<(), String> {
    r.map_err(|e| format!("{e}"))
}

fn rand_vec(seed: u64) -> impl FnMut() -> f64 {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    move || rng.gen_range(-1.0..1.0)
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn main() {
    let mut outcomes = Vec::new();
    let mut record = |n: usize, name: &str, f: &mut dyn FnMut() -> Outcome| {
        let t = Instant::now();
        let o = f();
        report(n, name, t, &o);
        outcomes.push(o.pass);
    };

    record(1, "exact ground-state oracle equivalence", &mut oracle_equivalence);
    record(2, "two-level analytics", &mut two_level);
    record(3, "endpoint spectra", &mut endpoints);
    record(4, "spectral direction on 3x3 ensembles", &mut spectral_direction);

    let t = Instant::now();
    let config = ExperimentConfig {
        lattice: (20, 20),
        j_values: COUPLINGS.to_vec(),
        tau_values: vec![1.0, 100.0],
        samples: 40,
        ..ExperimentConfig::desk_scale()
    };
    let records = run_ensemble(&config).expect("ensemble runs");
    println!("  ensemble 20x20, 40 seeds, J {:?}, tau {{1, 100}}: {:.1} s", COUPLINGS, t.elapsed().as_secs_f64());

    record(5, "residual ordering at J=2", &mut || {
        let (pass, detail) = ordering(&records, 2.0);
        // Same verdict expected with the initial temperature doubled.
        let hot = ExperimentConfig {
            j_values: vec![2.0],
            tau_values: vec![100.0],
            schemes: vec![Scheme::Sa],
            t0: Some(36.0),
            ..config.clone()
        };
        let mut doubled: Vec<RunRecord> = records.iter().filter(|r| r.scheme != Scheme::Sa).cloned().collect();
        doubled.extend(run_ensemble(&hot).expect("ensemble runs"));
        let (pass2, detail2) = ordering(&doubled, 2.0);
        let note = if pass2 == pass { "unchanged" } else { "changed" };
        Outcome::new(pass, format!("{detail} | with T0 doubled ({note}): {detail2}"))
    });
    record(6, "FI advantage shrinks with J", &mut || fi_advantage_trend(&records));
    record(7, "tau=100 no worse than tau=1 at J=2", &mut || tau_monotone(&records));
    record(8, "invariant property suites", &mut invariant_suites);

    let failed = outcomes.iter().filter(|p| !**p).count();
    println!("acceptance: {} passed, {failed} failed", outcomes.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
