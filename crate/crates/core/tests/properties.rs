use bbdet_core::accumulator::{tree_merge, PairAccumulator};
use bbdet_core::determinant::NuMap;
use bbdet_core::linalg::{det, permutation_det};
use bbdet_core::perm::{parity, Permutations};
use bbdet_core::statistics::g_epsilon;
use bbdet_core::{build_w, det_and_adjugate, sample_bridge, sample_pair, ImportanceDensity, Mat, PotentialSpec, TimeGrid};
use proptest::prelude::*;

fn matrix(n: usize) -> impl Strategy<Value = Mat> {
    prop::collection::vec(-2.0f64..2.0, n * n).prop_map(move |data| Mat { n, data })
}

fn sized_matrix() -> impl Strategy<Value = Mat> {
    (1usize..=5).prop_flat_map(matrix)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn lu_det_equals_permutation_sum(a in sized_matrix()) {
        let lu = det(&a);
        let brute = permutation_det(&a);
        let scale = a.max_abs().max(1e-300).powi(a.n as i32);
        prop_assert!((lu - brute).abs() <= 1e-12 * scale.max(brute.abs()), "lu {lu} brute {brute}");
    }

    #[test]
    fn adjugate_identity(a in sized_matrix()) {
        let (d, adj) = det_and_adjugate(&a).unwrap();
        let prod = adj.mul(&a);
        let scale = a.max_abs().powi(a.n as i32).max(1e-300);
        for i in 0..a.n {
            for j in 0..a.n {
                let want = if i == j { d } else { 0.0 };
                prop_assert!((prod.get(i, j) - want).abs() <= 1e-9 * scale);
            }
        }
    }

    #[test]
    fn rank_deficient_adjugate_identity(a in (2usize..=5).prop_flat_map(matrix)) {
        // Copying a row makes the matrix singular; the cofactor path must still hold.
        let mut b = a.clone();
        for j in 0..b.n {
            b.set(1, j, b.get(0, j));
        }
        let (d, adj) = det_and_adjugate(&b).unwrap();
        let scale = b.max_abs().powi(b.n as i32).max(1e-300);
        prop_assert!(d.abs() <= 1e-12 * scale);
        let prod = adj.mul(&b);
        prop_assert!(prod.data.iter().all(|v| v.abs() <= 1e-9 * scale));
    }

    #[test]
    fn nu_map_is_a_bijection_onto_all_but_ell(n in 1usize..9, k in 0usize..9, l in 0usize..9) {
        let (k, l) = (k % n, l % n);
        let map = NuMap { k, ell: l };
        let mut image: Vec<usize> = (0..n).filter(|&j| j != k).map(|j| map.nu(j)).collect();
        image.sort_unstable();
        let want: Vec<usize> = (0..n).filter(|&j| j != l).collect();
        prop_assert_eq!(image, want);
    }

    #[test]
    fn g_epsilon_is_smooth_and_bounded(eps in 1e-3f64..10.0, t in -3.0f64..3.0) {
        let z = t * eps;
        let g = g_epsilon(z, eps);
        prop_assert!(g >= eps / 6.0 - 1e-15);
        if z >= 2.0 * eps {
            prop_assert_eq!(g, z);
        }
        // nondecreasing
        prop_assert!(g_epsilon(z + 1e-3 * eps, eps) >= g - 1e-15);
    }

    #[test]
    fn density_is_radial(beta in 0.2f64..3.0, xs in prop::collection::vec(-3.0f64..3.0, 9)) {
        let dens = ImportanceDensity::new(beta, 9);
        let pts: Vec<[f64; 3]> = xs.chunks(3).map(|c| [c[0], c[1], c[2]]).collect();
        let flipped: Vec<[f64; 3]> = pts.iter().rev().map(|p| [-p[2], p[0], -p[1]]).collect();
        let a = dens.log_value(&pts).unwrap();
        let b = dens.log_value(&flipped).unwrap();
        prop_assert!((a - b).abs() <= 1e-12 * a.abs().max(1.0));
    }

    #[test]
    fn tree_merge_matches_sequential(values in prop::collection::vec((-5.0f64..5.0, -5.0f64..5.0), 2..200), cut in 1usize..20) {
        let mut seq = PairAccumulator::default();
        for &(a, b) in &values {
            seq.push(a, b);
        }
        let parts: Vec<PairAccumulator> = values
            .chunks(cut)
            .map(|c| {
                let mut acc = PairAccumulator::default();
                for &(a, b) in c {
                    acc.push(a, b);
                }
                acc
            })
            .collect();
        let merged = tree_merge(&parts);
        prop_assert_eq!(merged.count(), seq.count());
        prop_assert!((merged.mean_a() - seq.mean_a()).abs() < 1e-12);
        prop_assert!((merged.cov_ab() - seq.cov_ab()).abs() < 1e-10 * seq.var_a().max(1.0));
    }

    #[test]
    fn grid_weights_integrate_constants(m in 1usize..500) {
        let g = TimeGrid::new(m).unwrap();
        let total: f64 = g.weights().iter().sum();
        prop_assert!((total - 1.0).abs() < 1e-12);
        prop_assert_eq!(g.node(m), 1.0);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(40))]

    #[test]
    fn relabeling_particles_keeps_the_weight(seed in any::<u64>(), n in 2usize..6, shift in 1usize..5) {
        let beta = 1.0;
        let grid = TimeGrid::new(20).unwrap();
        let dens = ImportanceDensity::new(beta, 3 * n);
        let s = sample_bridge(seed, 0, n, 3, &grid, &dens).unwrap();
        let perm: Vec<usize> = (0..n).map(|i| (i + shift) % n).collect();
        let t = s.permuted(&perm);
        for spec in [PotentialSpec::harmonic(), PotentialSpec::harmonic_coulomb(0.5)] {
            let a = sample_pair(&s, &spec, &grid, beta, &dens);
            let b = sample_pair(&t, &spec, &grid, beta, &dens);
            let scale = a.b_value.abs().max(1e-300);
            prop_assert!((a.b_value - b.b_value).abs() <= 1e-9 * scale.max(b.b_value.abs()));
        }
    }

    #[test]
    fn coincident_starts_cancel_for_fermions(seed in any::<u64>(), n in 2usize..6) {
        let beta = 0.7;
        let grid = TimeGrid::new(16).unwrap();
        let dens = ImportanceDensity::new(beta, 3 * n);
        let mut s = sample_bridge(seed, 0, n, 3, &grid, &dens).unwrap();
        s.x0[1] = s.x0[0];
        let ev = build_w(&s, &PotentialSpec::harmonic(), &grid, beta, false).unwrap();
        // Columns 0 and 1 coincide, so the determinant vanishes up to rounding.
        let bound: f64 = (0..n).map(|i| (0..n).map(|j| ev.w.get(i, j).powi(2)).sum::<f64>().sqrt()).product();
        prop_assert!(det(&ev.w).abs() <= 1e-12 * bound.max(1e-300));
    }

    #[test]
    fn parity_matches_running_sign(n in 1usize..7) {
        for (p, sign) in Permutations::new(n) {
            prop_assert_eq!(parity(&p), sign);
        }
    }
}
