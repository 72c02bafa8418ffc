use diffusion_gof::estimate::fit_scale_diffusion;
use diffusion_gof::gof::{calibrate, dcov, er_test_stats, marked_process_stats, np_stat, Covariates, Residuals};
use diffusion_gof::sde::{simulate_euler, simulate_milstein, to_regression, ModelSpec, Path, RegressionSample};
use diffusion_gof::smooth::{kde, nw_diffusion, nw_drift, nw_weights, Bandwidth, KernelConfig};
use diffusion_gof::rng::SeedStream;
use proptest::prelude::*;

fn sample_vec(lo: usize, hi: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-5.0..5.0f64, lo..hi)
}

/// Paired `(x, u)` samples of equal length.
fn pairs() -> impl Strategy<Value = (Vec<f64>, Vec<f64>)> {
    (3usize..40).prop_flat_map(|n| (prop::collection::vec(-5.0..5.0f64, n), prop::collection::vec(-5.0..5.0f64, n)))
}

fn rel_close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * (1.0 + a.abs().max(b.abs()))
}

fn nondegenerate(v: &[f64]) -> bool {
    v.iter().any(|&a| (a - v[0]).abs() > 1e-6)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn dcov_nonnegative((x, u) in pairs()) {
        prop_assume!(nondegenerate(&x) && nondegenerate(&u));
        let (v2, s2) = dcov(&u, &Covariates::scalar(x)).unwrap();
        prop_assert!(v2 >= -1e-12);
        prop_assert!(s2 > 0.0);
    }

    #[test]
    fn dcov_scale_and_translation((x, u) in pairs(), c in 0.1..10.0f64, d in 0.1..10.0f64, shift in -3.0..3.0f64) {
        prop_assume!(nondegenerate(&x) && nondegenerate(&u));
        let (v2, s2) = dcov(&u, &Covariates::scalar(x.clone())).unwrap();
        let cu: Vec<f64> = u.iter().map(|a| c * a + shift).collect();
        let (cv2, _) = dcov(&cu, &Covariates::scalar(x.clone())).unwrap();
        prop_assert!(rel_close(cv2, c * v2, 1e-9));
        let dx: Vec<f64> = x.iter().map(|a| d * a - shift).collect();
        let (sv2, ss2) = dcov(&cu, &Covariates::scalar(dx)).unwrap();
        prop_assert!(rel_close(sv2 / ss2, v2 / s2, 1e-9));
    }

    #[test]
    fn dcov_rotation_invariant(
        rows in prop::collection::vec((-3.0..3.0f64, -3.0..3.0f64), 4..30),
        theta in 0.0..std::f64::consts::TAU,
        seed in any::<u64>(),
    ) {
        let n = rows.len();
        let mut rng = SeedStream::new(seed).rng();
        let u = diffusion_gof::rng::normals(&mut rng, n);
        let w: Vec<Vec<f64>> = rows.iter().map(|&(a, b)| vec![a, b]).collect();
        let (c, s) = (theta.cos(), theta.sin());
        let r: Vec<Vec<f64>> = rows.iter().map(|&(a, b)| vec![c * a - s * b, s * a + c * b]).collect();
        let (v2, s2) = dcov(&u, &Covariates::from_rows(&w).unwrap()).unwrap();
        let (rv2, rs2) = dcov(&u, &Covariates::from_rows(&r).unwrap()).unwrap();
        prop_assert!(rel_close(v2, rv2, 1e-9) && rel_close(s2, rs2, 1e-9));
    }

    #[test]
    fn er_functionals_ordered((x, marks) in pairs()) {
        let (ks, cvm) = marked_process_stats(&Covariates::scalar(x), &marks).unwrap();
        prop_assert!(ks >= 0.0 && cvm >= 0.0);
        prop_assert!(cvm <= ks * ks * (1.0 + 1e-12));
    }

    #[test]
    fn np_relabelling_invariant((x, v) in pairs(), h in 0.05..3.0f64, seed in any::<u64>()) {
        prop_assume!(nondegenerate(&v));
        use rand::seq::SliceRandom;
        let n = x.len();
        let cfg = KernelConfig::new(h).unwrap();
        let res = Residuals::new(vec![0.0; n], v.clone(), Covariates::scalar(x.clone())).unwrap();
        let mut idx: Vec<usize> = (0..n).collect();
        idx.shuffle(&mut SeedStream::new(seed).rng());
        let px: Vec<f64> = idx.iter().map(|&i| x[i]).collect();
        let pv: Vec<f64> = idx.iter().map(|&i| v[i]).collect();
        let pres = Residuals::new(vec![0.0; n], pv, Covariates::scalar(px)).unwrap();
        prop_assert!(rel_close(np_stat(&res, &cfg).unwrap(), np_stat(&pres, &cfg).unwrap(), 1e-10));
    }

    #[test]
    fn er_relabelling_invariant((x, v) in pairs(), seed in any::<u64>()) {
        prop_assume!(nondegenerate(&v));
        use rand::seq::SliceRandom;
        let n = x.len();
        let res = Residuals::new(vec![0.0; n], v.clone(), Covariates::scalar(x.clone())).unwrap();
        let mut idx: Vec<usize> = (0..n).collect();
        idx.shuffle(&mut SeedStream::new(seed).rng());
        let px: Vec<f64> = idx.iter().map(|&i| x[i]).collect();
        let pv: Vec<f64> = idx.iter().map(|&i| v[i]).collect();
        let pres = Residuals::new(vec![0.0; n], pv, Covariates::scalar(px)).unwrap();
        let (a, b) = er_test_stats(&res).unwrap();
        let (c, d) = er_test_stats(&pres).unwrap();
        prop_assert!(rel_close(a, c, 1e-10) && rel_close(b, d, 1e-10));
    }

    #[test]
    fn nw_weights_integrate_to_one((x, y) in pairs(), probe in -5.0..5.0f64, h in 0.3..3.0f64, delta in 0.001..1.0f64) {
        let s = RegressionSample::new(x, y, delta).unwrap();
        let cfg = KernelConfig::new(h).unwrap();
        let w = nw_weights(&s, probe, &cfg).unwrap();
        let total: f64 = w.iter().sum::<f64>() * delta;
        prop_assert!((total - 1.0).abs() < 1e-12);
        prop_assert!(w.iter().all(|&v| v >= 0.0));
    }

    #[test]
    fn smoothers_nonnegative_and_location_equivariant(
        (x, y) in pairs(), probe in -5.0..5.0f64, h in 0.3..3.0f64, shift in -50.0..50.0f64,
    ) {
        let cfg = KernelConfig::new(h).unwrap();
        let s = RegressionSample::new(x.clone(), y.clone(), 0.1).unwrap();
        let sx: Vec<f64> = x.iter().map(|a| a + shift).collect();
        let t = RegressionSample::new(sx.clone(), y, 0.1).unwrap();
        let f = kde(&x, probe, &cfg);
        prop_assert!(f >= 0.0);
        prop_assert!(rel_close(f, kde(&sx, probe + shift, &cfg), 1e-9));
        let d = nw_diffusion(&s, probe, &cfg).unwrap();
        prop_assert!(d >= 0.0);
        prop_assert!(rel_close(d, nw_diffusion(&t, probe + shift, &cfg).unwrap(), 1e-9));
        let m = nw_drift(&s, probe, &cfg).unwrap();
        prop_assert!((m - nw_drift(&t, probe + shift, &cfg).unwrap()).abs() < 1e-9 * (1.0 + m.abs()));
    }

    #[test]
    fn regression_round_trip(steps in prop::collection::vec(-64i32..64, 2..60), x0 in -64i32..64, k in 0u32..6) {
        // Dyadic values and step keep every operation exact.
        let delta = 0.5f64.powi(k as i32);
        let mut v = vec![f64::from(x0) / 8.0];
        for s in steps {
            v.push(f64::from(s) / 8.0);
        }
        let p = Path::new(delta, v).unwrap();
        prop_assert_eq!(to_regression(&p).unwrap().reconstruct(), p);
    }

    #[test]
    fn scale_fit_invariant_to_level(v in prop::collection::vec(0.1..10.0f64, 3..60), c in 0.01..100.0f64) {
        let p = Path::new(0.01, v.clone()).unwrap();
        let q = Path::new(0.01, v.iter().map(|a| a * c).collect()).unwrap();
        let a = fit_scale_diffusion(&to_regression(&p).unwrap()).unwrap().theta_hat[0];
        let b = fit_scale_diffusion(&to_regression(&q).unwrap()).unwrap().theta_hat[0];
        prop_assert!(rel_close(a, b, 1e-12));
    }

    #[test]
    fn p_value_is_monotone(reps in sample_vec(1, 200), t in -6.0..6.0f64, dt in 0.0..3.0f64) {
        let (p1, _) = calibrate(t, &reps, 0.05);
        let (p2, _) = calibrate(t + dt, &reps, 0.05);
        prop_assert!((0.0..=1.0).contains(&p1));
        prop_assert!(p2 <= p1);
    }

    #[test]
    fn bandwidth_display_round_trips(h in 1e-6..1e6f64) {
        let b = Bandwidth::Fixed(h);
        prop_assert_eq!(Bandwidth::parse(&b.to_string()).unwrap(), b);
    }

    #[test]
    fn simulation_is_seed_deterministic(seed in any::<u64>(), sigma in 0.05..1.0f64) {
        let m = ModelSpec::ckls(0.5, 2.0, sigma, 0.5).unwrap();
        let a = simulate_milstein(&m, 2.0, 100, 0.01, &mut SeedStream::new(seed).rng());
        let b = simulate_milstein(&m, 2.0, 100, 0.01, &mut SeedStream::new(seed).rng());
        prop_assert_eq!(a, b);
    }

    #[test]
    fn schemes_agree_for_constant_sigma(seed in any::<u64>(), sigma in 0.05..2.0f64, kappa in 0.1..3.0f64) {
        let m = ModelSpec::ou(0.3, kappa, sigma).unwrap();
        let a = simulate_euler(&m, 0.0, 200, 0.01, &mut SeedStream::new(seed).rng()).unwrap();
        let b = simulate_milstein(&m, 0.0, 200, 0.01, &mut SeedStream::new(seed).rng()).unwrap();
        prop_assert_eq!(a, b);
    }
}
