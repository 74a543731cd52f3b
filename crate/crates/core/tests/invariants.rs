use flocklab::config::parse_config;
use flocklab::diagnostics::{energy, fluctuations};
use flocklab::hydro1d::{classify_1d, Verdict1D};
use flocklab::kernel::KernelSpec;
use flocklab::particles::{rhs, rhs_pairwise, step_rk4, Ensemble};
use flocklab::potential::PotentialSpec;
use flocklab::presets::{preset, NAMES};
use proptest::prelude::*;

fn ensemble_1d() -> impl Strategy<Value = Ensemble<1>> {
    prop::collection::vec((-3.0..3.0f64, -3.0..3.0f64, 0.05..1.0f64), 2..20).prop_map(|rows| {
        let x = rows.iter().map(|r| [r.0]).collect();
        let u = rows.iter().map(|r| [r.1]).collect();
        let m = rows.iter().map(|r| r.2).collect();
        Ensemble::new(x, u, m).unwrap()
    })
}

fn ensemble_2d() -> impl Strategy<Value = Ensemble<2>> {
    prop::collection::vec(prop::array::uniform4(-3.0..3.0f64), 2..16).prop_map(|rows| {
        let x = rows.iter().map(|r| [r[0], r[1]]).collect();
        let u = rows.iter().map(|r| [r[2], r[3]]).collect();
        let m = vec![1.0 / rows.len() as f64; rows.len()];
        Ensemble::new(x, u, m).unwrap()
    })
}

fn kernel() -> impl Strategy<Value = KernelSpec> {
    prop_oneof![
        (0.1..3.0f64, 0.0..2.0f64).prop_map(|(c, b)| KernelSpec::power_law(c, b).unwrap()),
        (0.1..3.0f64).prop_map(|k| KernelSpec::constant(k).unwrap()),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn alignment_conserves_momentum_without_potential(ens in ensemble_2d(), k in kernel()) {
        let r = rhs(&ens, &k, &PotentialSpec::Zero).unwrap();
        for c in 0..2 {
            let p: f64 = (0..ens.len()).map(|i| ens.m[i] * r.du[i][c]).sum();
            prop_assert!(p.abs() < 1e-12);
        }
    }

    #[test]
    fn pairwise_form_matches_on_centred_data(ens in ensemble_2d(), k in kernel(), a in 0.1..4.0f64) {
        let c = ens.recenter();
        let p = PotentialSpec::quadratic(a).unwrap();
        let direct = rhs(&c, &k, &p).unwrap();
        let pair = rhs_pairwise(&c, &k, a).unwrap();
        for i in 0..c.len() {
            for j in 0..2 {
                prop_assert!((direct.du[i][j] - pair.du[i][j]).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn energy_does_not_grow_over_a_step(ens in ensemble_1d(), k in kernel(), a in 0.1..2.0f64) {
        let p = PotentialSpec::quadratic(a).unwrap();
        let next = step_rk4(&ens, &k, &p, 1e-3).unwrap();
        let (e0, _) = energy(&ens, &p);
        let (e1, _) = energy(&next, &p);
        prop_assert!(e1 <= e0 + 1e-12 * e0.max(1.0));
    }

    #[test]
    fn fluctuations_ignore_translation(ens in ensemble_2d(), s in prop::array::uniform4(-5.0..5.0f64), a in 0.0..3.0f64) {
        let mut moved = ens.clone();
        for i in 0..moved.len() {
            moved.x[i] = [moved.x[i][0] + s[0], moved.x[i][1] + s[1]];
            moved.u[i] = [moved.u[i][0] + s[2], moved.u[i][1] + s[3]];
        }
        let (l2, linf) = fluctuations(&ens, a);
        let (l2m, linfm) = fluctuations(&moved, a);
        prop_assert!((l2 - l2m).abs() <= 1e-9 * l2.max(1.0));
        prop_assert!((linf - linfm).abs() <= 1e-9 * linf.max(1.0));
        prop_assert!(l2 <= linf * (1.0 + 1e-12));
    }

    #[test]
    fn kernel_bounds_bracket_values(k in kernel(), d in 0.0..10.0f64, frac in 0.0..1.0f64) {
        let b = k.bounds(d).unwrap();
        let v = k.eval(frac * d);
        prop_assert!(b.phi_minus <= v + 1e-15 && v <= b.phi_plus + 1e-15);
    }

    #[test]
    fn raising_the_initial_minimum_keeps_smoothness(
        a in 0.01..0.24f64, lo in -1.0..2.0f64, gap in 0.0..1.0f64, t in 0.0..1.0f64,
    ) {
        let (e_min, e_max) = (lo, lo + gap);
        if classify_1d(a, a, 1.0, 1.0, 1.0, e_min, e_max).verdict == Verdict1D::SmoothGuaranteed {
            let raised = e_min + t * gap;
            prop_assert_eq!(classify_1d(a, a, 1.0, 1.0, 1.0, raised, e_max).verdict, Verdict1D::SmoothGuaranteed);
        }
    }

    #[test]
    fn config_round_trips_through_toml(idx in 0..NAMES.len(), dt in 1e-4..1e-2f64, t_end in 0.1..50.0f64, seed in any::<u32>()) {
        let mut cfg = preset(NAMES[idx]).unwrap();
        cfg.dt = dt;
        cfg.t_end = t_end;
        cfg.seed = seed as u64;
        prop_assert_eq!(parse_config(&cfg.to_toml()).unwrap(), cfg);
    }
}
