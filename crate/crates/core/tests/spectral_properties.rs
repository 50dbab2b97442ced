use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rfim_anneal::exact_gs::brute_force_ground_state;
use rfim_anneal::spectral::{
    build_hamiltonian, eigen_residual, lowest_eigenpairs, spectral_trace, uniform_grid, EigenOptions, TraceOptions,
};
use rfim_anneal::{Instance, KineticKind};

fn lattice(max_sites: usize) -> impl Strategy<Value = (usize, usize)> {
    (1usize..=4, 1usize..=4).prop_filter("size", move |(w, h)| w * h <= max_sites)
}

fn instance(max_sites: usize) -> impl Strategy<Value = Instance<f64>> {
    (lattice(max_sites), prop::sample::select(vec![0.6, 1.0, 1.5, 2.0]), any::<u64>()).prop_map(|((w, h), j, seed)| {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let fields = (0..w * h).map(|_| if rng.gen::<bool>() { 1.0 } else { -1.0 }).collect();
        Instance::new(w, h, j, fields).unwrap()
    })
}

fn kind() -> impl Strategy<Value = KineticKind> {
    prop_oneof![Just(KineticKind::TransverseField), Just(KineticKind::FerroInteraction)]
}

fn random_vector(dim: usize, seed: u64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..dim).map(|_| rng.gen_range(-1.0..1.0)).collect()
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn hamiltonian_is_symmetric(
        inst in instance(10),
        kind in kind(),
        s in prop::sample::select(vec![0.0, 0.3, 0.7, 1.0]),
        seed in any::<u64>(),
    ) {
        let h = build_hamiltonian(&inst, kind, s).unwrap();
        prop_assert!(h.is_hermitian());
        let dim = h.dimension();
        let (x, y) = (random_vector(dim, seed), random_vector(dim, seed ^ 1));
        let mut hx = vec![0.0; dim];
        let mut hy = vec![0.0; dim];
        h.apply(&x, &mut hx);
        h.apply(&y, &mut hy);
        let (a, b) = (dot(&y, &hx), dot(&x, &hy));
        let scale = h.norm_estimate() * dot(&x, &x).sqrt() * dot(&y, &y).sqrt();
        prop_assert!((a - b).abs() <= 1e-12 * scale.max(1.0), "{a} vs {b}");
    }

    #[test]
    fn eigenpairs_satisfy_eigen_identity(inst in instance(10), kind in kind(), s in 0.0f64..=1.0) {
        let h = build_hamiltonian(&inst, kind, s).unwrap();
        let k = 3.min(h.dimension());
        let pairs = lowest_eigenpairs(&h, k, &EigenOptions::default()).unwrap();
        let bound = h.norm_estimate();
        for (i, p) in pairs.iter().enumerate() {
            let r = eigen_residual(&h, p);
            prop_assert!(r <= 1e-9 * (p.energy.abs() + bound), "pair {i}: residual {r:e}");
            prop_assert!((dot(&p.vector, &p.vector) - 1.0).abs() < 1e-9);
            for q in &pairs[..i] {
                prop_assert!(dot(&p.vector, &q.vector).abs() < 1e-7);
                prop_assert!(q.energy <= p.energy);
            }
        }
    }

    #[test]
    fn endpoint_spectra(inst in instance(12), kind in kind()) {
        let n = inst.site_count() as f64;
        let h0 = build_hamiltonian(&inst, kind, 0.0).unwrap();
        let e0 = lowest_eigenpairs(&h0, 1, &EigenOptions::default()).unwrap()[0].energy;
        let expect = match kind {
            KineticKind::TransverseField => -n,
            KineticKind::FerroInteraction => -n - inst.bond_count() as f64,
        };
        prop_assert!((e0 - expect).abs() <= 1e-9 * expect.abs().max(1.0));

        let h1 = build_hamiltonian(&inst, kind, 1.0).unwrap();
        let e1 = lowest_eigenpairs(&h1, 1, &EigenOptions::default()).unwrap()[0].energy;
        let gs = brute_force_ground_state(&inst).unwrap().energy;
        prop_assert!((e1 - gs).abs() <= 1e-9 * gs.abs().max(1.0));
    }

    #[test]
    fn gaps_are_ordered(inst in instance(8), kind in kind()) {
        let trace = spectral_trace(&inst, kind, &uniform_grid::<f64>(11), &TraceOptions::default()).unwrap();
        prop_assert_eq!(trace.gap02.is_some(), inst.site_count() > 1);
        for i in 0..trace.len() {
            prop_assert!(trace.gap01[i] >= 0.0);
            if let Some(g2) = &trace.gap02 {
                prop_assert!(g2[i] >= trace.gap01[i]);
            }
        }
        if kind == KineticKind::FerroInteraction {
            prop_assert!(trace.gap01[0] > 0.0);
        }
    }
}

#[test]
fn single_spin_trace_matches_closed_form() {
    for h in [1.0, -1.0] {
        let inst = Instance::new(1, 1, 1.0, vec![h]).unwrap();
        let grid = uniform_grid::<f64>(101);
        for kind in [KineticKind::TransverseField, KineticKind::FerroInteraction] {
            let trace = spectral_trace(&inst, kind, &grid, &TraceOptions::default()).unwrap();
            for (s, g) in trace.s_values.iter().zip(&trace.gap01) {
                let exact = 2.0 * ((1.0 - s) * (1.0 - s) + s * s * h * h).sqrt();
                assert!((g - exact).abs() < 1e-10, "s = {s}: {g} vs {exact}");
            }
        }
    }
}
