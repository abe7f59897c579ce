use bethe_scalar::contour::{evaluate_integral, h_offshell, h_offshell_recursive, s1_closed, Variant};
use bethe_scalar::numeric::rel_diff;
use bethe_scalar::oracle::scalar_product_raw;
use bethe_scalar::sampling::{model, spectral, stream};
use bethe_scalar::weights::yang_baxter_residual;
use bethe_scalar::{Anisotropy, ModelParams, C64};
use proptest::prelude::*;

fn complex(half: f64) -> impl Strategy<Value = C64> {
    (-half..half, -half..half).prop_map(|(re, im)| C64::new(re, im))
}

fn separated(z: &[C64], floor: f64) -> bool {
    z.iter().enumerate().all(|(i, a)| z[i + 1..].iter().all(|b| (a - b).sinh().norm() >= floor))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn yang_baxter_everywhere(g in complex(1.0), l1 in complex(2.0), l2 in complex(2.0), l3 in complex(2.0)) {
        prop_assume!(g.sinh().norm() > 0.1);
        let aniso = Anisotropy::new(g).unwrap();
        prop_assert!(yang_baxter_residual(l1, l2, l3, &aniso) <= 1e-12);
    }

    #[test]
    fn closed_n1_matches_oracle(
        g in complex(1.0),
        mu in prop::collection::vec(complex(1.0), 1..=5),
        lc in complex(1.0),
        lb in complex(1.0),
    ) {
        prop_assume!(g.sinh().norm() > 0.2);
        prop_assume!(separated(&mu, 0.05));
        let p = ModelParams::new(g, mu, C64::new(1.0, 0.0), C64::new(0.5, 0.5)).unwrap();
        prop_assume!((lc - lb).sinh().norm() > 0.05);
        let s = s1_closed(lc, lb, &p).unwrap();
        let o = scalar_product_raw(&[lc], &[lb], &p);
        // the numerator of the closed form cancels when |S| is small
        let scale = p.prod_a(lb).norm() * p.prod_b(lc).norm() + p.prod_a(lc).norm() * p.prod_b(lb).norm();
        prop_assert!((s - o).norm() <= 1e-12 * scale * p.c().norm() / (lc - lb).sinh().norm());
    }

    #[test]
    fn offshell_integral_matches_oracle(seed in any::<u64>(), shape in 0usize..6) {
        let (n, l) = [(1, 3), (2, 2), (2, 3), (2, 5), (3, 3), (3, 4)][shape];
        let mut rng = stream(seed, "prop-integral", 0);
        let p = model(&mut rng, l).unwrap();
        let x = spectral(&mut rng, &p, n, &[]);
        let y = spectral(&mut rng, &p, n, &x);
        let i = evaluate_integral(&x, &y, &p, Variant::OffShell).unwrap();
        let o = scalar_product_raw(&x, &y, &p);
        prop_assert!(rel_diff(i.value, o) <= 1e-8 * i.cancellation_ratio.max(1.0), "{:?} {}", i, o);
    }

    #[test]
    fn recursive_h_matches_closed(seed in any::<u64>(), shape in 0usize..4) {
        let (n, l) = [(2, 2), (2, 4), (3, 3), (3, 5)][shape];
        let mut rng = stream(seed, "prop-h", 0);
        let p = model(&mut rng, l).unwrap();
        let w = spectral(&mut rng, &p, n, &[]);
        let v = spectral(&mut rng, &p, n, &w);
        let a = h_offshell(&w, &v, &p).unwrap();
        let b = h_offshell_recursive(&w, &v, &p).unwrap();
        prop_assert!(rel_diff(a, b) <= 1e-10);
    }

    #[test]
    fn scalar_product_is_symmetric(seed in any::<u64>(), n in 2usize..=3) {
        let mut rng = stream(seed, "prop-sym", 0);
        let p = model(&mut rng, 4).unwrap();
        let x = spectral(&mut rng, &p, n, &[]);
        let y = spectral(&mut rng, &p, n, &x);
        let base = scalar_product_raw(&x, &y, &p);
        let mut xr = x.clone();
        xr.reverse();
        let mut yr = y.clone();
        yr.rotate_left(1);
        prop_assert!(rel_diff(base, scalar_product_raw(&xr, &yr, &p)) <= 1e-13);
    }
}
