use std::f64::consts::PI;

use proptest::prelude::*;
use qae_core::caps::{cap_fraction_bound, cap_fraction_exact, DEFAULT_CAP_CONSTANT};
use qae_core::cloning::{takagi_top, unevenness};
use qae_core::density::{build_mu, default_eps_reg, h_lower, h_upper};
use qae_core::elementary::PureState;
use qae_core::entropy::{relative_entropy, von_neumann_entropy, DensityMatrix};
use qae_core::linalg::{jacobi_eigen, log2m, loewner_leq, HermitianOperator, Tolerances};
use qae_core::machine::{decode_with_budget, enumerate, Budget, DEFAULT_MAX_LEN_CAP};
use qae_core::sampling::{haar_state, random_density, random_hermitian, random_psd, random_symmetric, rng_for};
use qae_core::snapshot_io;

fn dm(m: qae_core::linalg::ComplexMatrix) -> DensityMatrix {
    DensityMatrix::new(HermitianOperator::from_hermitian_part(&m), &Tolerances::default()).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn eigendecomposition_reconstructs(seed: u64, n in 1usize..9) {
        let m = random_hermitian(&mut rng_for(seed, 0), n);
        let es = jacobi_eigen(&m).unwrap();
        prop_assert!(es.values.windows(2).all(|w| w[0] >= w[1]));
        prop_assert!(es.reconstruct().max_abs_diff(&m) < 1e-10);
    }

    #[test]
    fn adding_psd_climbs_the_order(seed: u64, n in 1usize..6) {
        let mut rng = rng_for(seed, 1);
        let tol = Tolerances::default();
        let a = HermitianOperator::from_hermitian_part(&random_psd(&mut rng, n, 1e-3));
        let b = a.add(&HermitianOperator::from_hermitian_part(&random_psd(&mut rng, n, 0.0)));
        prop_assert!(loewner_leq(&a, &b, 1e-9).unwrap());
        prop_assert!(loewner_leq(&log2m(&a, &tol).unwrap(), &log2m(&b, &tol).unwrap(), 1e-8).unwrap());
    }

    #[test]
    fn at_most_one_prefix_halts(bits in prop::collection::vec(any::<bool>(), 0..18), dim in 1usize..5) {
        let halting = (0..=bits.len()).filter(|&k| decode_with_budget(&bits[..k], dim, 10_000).is_ok()).count();
        prop_assert!(halting <= 1);
    }

    #[test]
    fn entropy_bounds(seed: u64, n in 1usize..7) {
        let mut rng = rng_for(seed, 2);
        let tol = Tolerances::default();
        let rho = dm(random_density(&mut rng, n));
        let sigma = dm(random_density(&mut rng, n));
        let s = von_neumann_entropy(&rho).unwrap();
        prop_assert!(s >= -1e-9 && s <= (n as f64).log2() + 1e-9);
        prop_assert!(relative_entropy(&rho, &sigma, &tol).unwrap() >= -1e-9);
        prop_assert!(relative_entropy(&rho, &rho, &tol).unwrap().abs() < 1e-8);
    }

    #[test]
    fn takagi_pair_satisfies_its_equation(seed: u64, n in 1usize..6) {
        let tol = Tolerances::default();
        let a = random_symmetric(&mut rng_for(seed, 3), n);
        let (sigma, z) = takagi_top(&a).unwrap();
        let zbar: Vec<_> = z.iter().map(|c| c.conj()).collect();
        let lhs = a.apply(&zbar);
        let err = lhs.iter().zip(&z).map(|(l, r)| (l - r * sigma).norm()).fold(0.0, f64::max);
        prop_assert!(err < 1e-9 * sigma.max(1.0));
        let u = unevenness(&a, &tol).unwrap().u;
        prop_assert!(u >= 1.0 / n as f64 - 1e-12 && u <= 1.0 + 1e-12);
    }

    #[test]
    fn cap_fraction_is_monotone_and_bounded(n in 3usize..200, a in 0.0f64..PI, b in 0.0f64..PI) {
        let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
        let (fl, fh) = (cap_fraction_exact(n, lo).unwrap(), cap_fraction_exact(n, hi).unwrap());
        prop_assert!((0.0..=1.0).contains(&fl) && fl <= fh + 1e-12 && fh <= 1.0);
        if lo < PI / 2.0 {
            prop_assert!(fl <= cap_fraction_bound(n, PI / 2.0 - lo, DEFAULT_CAP_CONSTANT).unwrap());
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn snapshot_text_is_a_fixed_point(dim in 1usize..5, len in 1u32..11) {
        let snap = enumerate(dim, Budget::new(len, 1000), DEFAULT_MAX_LEN_CAP).unwrap();
        let text = snapshot_io::to_text(&snap);
        let back = snapshot_io::from_text(&text).unwrap();
        prop_assert_eq!(snapshot_io::to_text(&back), text);
    }

    #[test]
    fn lower_complexity_never_exceeds_upper(seed: u64, dim in 2usize..5) {
        let tol = Tolerances::default();
        let snap = enumerate(dim, Budget::new(10, 1000), DEFAULT_MAX_LEN_CAP).unwrap();
        let ua = build_mu(&snap, default_eps_reg(), &tol).unwrap();
        let psi = PureState::new(haar_state(&mut rng_for(seed, 4), dim)).unwrap();
        prop_assert!(h_lower(&ua, &psi).unwrap() <= h_upper(&ua, &psi).unwrap() + 1e-9);
        prop_assert!(ua.mu().trace() <= 1.0 + 1e-12);
    }
}
