//! Structural invariants checked on random inputs.

use cns_core::besov::{block_norms, BesovIndex, Cutoff, TimeNormSpec};
use cns_core::envelope::{build_weight, tail_cutoff, AcceptableWeight, BlockMass};
use cns_core::lp::{helmholtz_project, high_pass, low_pass, lp_block, CutoffProfile};
use cns_core::paraproduct::{para, remainder};
use cns_core::random::Ensemble;
use cns_core::solvers::Trajectory;
use cns_core::{Field, Grid};
use proptest::prelude::*;

fn grid2(n: usize) -> Grid {
    Grid::new(2, n).unwrap()
}

fn sample(g: &Grid, comps: usize, radius: i32, seed: u64) -> Field {
    Ensemble::new(0.5, radius).sample(g, comps, seed).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn blocks_sum_to_one_on_the_resolved_range(r in 1.0f64..32.0) {
        let prof = CutoffProfile::of(&grid2(64));
        prop_assert!((prof.partition_sum(r) - 1.0).abs() <= 1e-12);
    }

    #[test]
    fn distant_blocks_annihilate(seed in 0u64..1000, j in 0i32..3) {
        let g = grid2(32);
        let f = sample(&g, 1, 10, seed);
        let k = j + 2;
        let twice = lp_block(&lp_block(&f, j).unwrap(), k).unwrap();
        prop_assert!(twice.max_abs() <= 1e-12 * f.max_abs());
    }

    #[test]
    fn plancherel(seed in 0u64..1000) {
        let g = grid2(16);
        let f = sample(&g, 2, 5, seed);
        let phys = f.lp_norm(2.0).unwrap();
        prop_assert!((phys - f.l2_spectral()).abs() <= 1e-12 * phys);
    }

    #[test]
    fn low_and_high_pass_split(seed in 0u64..1000, m in 0i32..6) {
        let g = grid2(32);
        let f = sample(&g, 1, 10, seed);
        let sum = low_pass(&f, m).unwrap().add(&high_pass(&f, m).unwrap()).unwrap();
        prop_assert!(sum.sub(&f).unwrap().max_abs() <= 1e-13 * f.max_abs());
    }

    #[test]
    fn helmholtz_projectors(seed in 0u64..1000) {
        let g = grid2(16);
        let u = sample(&g, 2, 5, seed);
        let (p, q) = helmholtz_project(&u).unwrap();
        let scale = u.max_abs();
        prop_assert!(p.add(&q).unwrap().sub(&u).unwrap().max_abs() <= 1e-13 * scale);
        prop_assert!(p.divergence().unwrap().max_abs() <= 1e-12 * scale);
        let (pp, pq) = helmholtz_project(&p).unwrap();
        prop_assert!(pp.sub(&p).unwrap().max_abs() <= 1e-13 * scale);
        prop_assert!(pq.max_abs() <= 1e-13 * scale);
    }

    #[test]
    fn bony_decomposition_is_exact(seed in 0u64..1000) {
        let g = grid2(32);
        let f = sample(&g, 1, 5, seed).remove_mean();
        let h = sample(&g, 1, 5, seed + 7).remove_mean();
        let whole = f.product(&h).unwrap();
        let parts = para(&f, &h).unwrap().add(&para(&h, &f).unwrap()).unwrap().add(&remainder(&f, &h).unwrap()).unwrap();
        prop_assert!(parts.sub(&whole).unwrap().max_abs() <= 1e-10 * whole.max_abs().max(1e-300));
    }

    #[test]
    fn tilde_norms_dominate_for_summable_blocks(seed in 0u64..1000) {
        let g = grid2(16);
        let mut traj = Trajectory::new(&g, &["u"]);
        for i in 0..6 {
            traj.push(0.1 * i as f64, vec![sample(&g, 1, 5, seed + i)]).unwrap();
        }
        let idx = BesovIndex::new(0.5, 2.0, 1.0).unwrap();
        let sup_t = TimeNormSpec::new(f64::INFINITY, 0.5, true).unwrap();
        let sup = TimeNormSpec::new(f64::INFINITY, 0.5, false).unwrap();
        let l1_t = TimeNormSpec::new(1.0, 0.5, true).unwrap();
        let l1 = TimeNormSpec::new(1.0, 0.5, false).unwrap();
        let a = traj.spacetime_norm("u", idx, sup, None, Cutoff::None).unwrap();
        let b = traj.spacetime_norm("u", idx, sup_t, None, Cutoff::None).unwrap();
        prop_assert!(a <= b * (1.0 + 1e-14));
        let c = traj.spacetime_norm("u", idx, l1, None, Cutoff::None).unwrap();
        let d = traj.spacetime_norm("u", idx, l1_t, None, Cutoff::None).unwrap();
        prop_assert!((c - d).abs() <= 1e-13 * d);
    }

    #[test]
    fn block_norms_are_monotone_in_p(seed in 0u64..1000) {
        // Hölder on the torus: ‖f‖_2 ≤ vol^{1/4} ‖f‖_4.
        let g = grid2(16);
        let f = sample(&g, 1, 5, seed);
        let lo = block_norms(&f, 2.0).unwrap();
        let hi = block_norms(&f, 4.0).unwrap();
        let vol = g.volume();
        for j in lo.indices() {
            let scaled = lo.get(j) * vol.powf(1.0 / 4.0 - 1.0 / 2.0);
            prop_assert!(scaled <= hi.get(j) * (1.0 + 1e-12));
        }
    }

    #[test]
    fn built_weights_are_acceptable(
        ratio in 0.05f64..0.9,
        delta0 in 0.1f64..1.0,
        members in 1usize..8,
        len in 4usize..20,
    ) {
        let limit = BlockMass::geometric(ratio, len);
        let family: Vec<BlockMass> = (1..=members)
            .map(|n| {
                let mut m = limit.clone();
                let last = m.values.len() - 1;
                m.values[last] += 2f64.powi(-(n as i32));
                m
            })
            .collect();
        let env = build_weight(&family, &limit, delta0, len + 6).unwrap();
        prop_assert!(env.weight.validate());
        for a in family.iter().chain(std::iter::once(&limit)) {
            prop_assert!(a.weighted(&env.weight) <= env.uniform_bound(a) * (1.0 + 1e-12));
        }
    }

    #[test]
    fn tail_cutoff_grows_as_tolerance_shrinks(delta0 in 0.2f64..1.0, e1 in 0.01f64..1.0, e2 in 0.01f64..1.0) {
        let w = AcceptableWeight::geometric(delta0, delta0, 40);
        let (small, large) = if e1 < e2 { (e1, e2) } else { (e2, e1) };
        let a = tail_cutoff(&w, 1.0, small).unwrap();
        let b = tail_cutoff(&w, 1.0, large).unwrap();
        prop_assert!(a >= b);
        prop_assert!(w.at(a) >= 1.0 / small);
    }
}
