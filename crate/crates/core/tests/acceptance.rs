//! The thirteen acceptance criteria, one PASS/FAIL line each. Runs without the libtest
//! harness so the lines are always printed; exits nonzero if any criterion fails.

use std::process::ExitCode;

use flocklab::constants::{lambda, mu_constants};
use flocklab::diagnostics::{dissipation, energy, energy_rate, fluctuations};
use flocklab::hydro1d::{Condition1D, Verdict1D};
use flocklab::hydro2d::{spectral, Constants2D, Verdict2D};
use flocklab::kernel::KernelSpec;
use flocklab::particles::{rhs, Ensemble};
use flocklab::potential::PotentialSpec;
use flocklab::presets::preset;
use flocklab::run::{check_preset, classify, RunOutput, Threshold};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

struct Outcome {
    pass: bool,
    detail: String,
}

fn from_checks(out: &RunOutput, names: &[&str]) -> Outcome {
    let mut pass = true;
    let mut parts = Vec::new();
    for n in names {
        match out.summary.check(n) {
            Some(c) => {
                pass &= c.pass;
                parts.push(format!("{n} max violation {:e} (tol {:e})", c.max_violation, c.tolerance));
            }
            None => {
                pass = false;
                parts.push(format!("{n} missing"));
            }
        }
    }
    Outcome {
        pass,
        detail: parts.join("; "),
    }
}

fn and(a: Outcome, b: Outcome) -> Outcome {
    Outcome {
        pass: a.pass && b.pass,
        detail: format!("{}; {}", a.detail, b.detail),
    }
}

fn ok(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

fn random_ensemble<const D: usize>(rng: &mut ChaCha8Rng, n: usize) -> Ensemble<D> {
    let x = (0..n).map(|_| std::array::from_fn(|_| rng.gen_range(-2.0..2.0))).collect();
    let u = (0..n).map(|_| std::array::from_fn(|_| rng.gen_range(-2.0..2.0))).collect();
    let m = (0..n).map(|_| rng.gen_range(0.1..1.0)).collect();
    Ensemble::new(x, u, m).unwrap()
}

fn identity_error<const D: usize>(rng: &mut ChaCha8Rng, kernel: &KernelSpec, potential: &PotentialSpec) -> f64 {
    let n = rng.gen_range(2..24);
    let ens = random_ensemble::<D>(rng, n);
    let rate = rhs(&ens, kernel, potential).unwrap();
    let lhs = energy_rate(&ens, &rate, potential);
    let d = dissipation(&ens, kernel);
    (lhs + d).abs() / d.abs()
}

fn criterion_5() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let kernels = [KernelSpec::power_law(1.0, 0.5).unwrap(), KernelSpec::constant(2.0).unwrap()];
    let potentials = [
        PotentialSpec::quadratic(1.0).unwrap(),
        PotentialSpec::perturbed_quadratic(1.25, 0.25, 1.0).unwrap(),
    ];
    let mut worst: f64 = 0.0;
    for s in 0..100 {
        let k = &kernels[s % 2];
        let p = &potentials[(s / 2) % 2];
        let e = if (s / 4) % 2 == 0 {
            identity_error::<1>(&mut rng, k, p)
        } else {
            identity_error::<2>(&mut rng, k, p)
        };
        worst = worst.max(e);
    }
    ok(
        worst <= 1e-12,
        format!("worst relative error {worst:e} over 100 states (tol 1e-12)"),
    )
}

fn criterion_6() -> Outcome {
    let cfg = preset("blowup-1d-unconditional").unwrap();
    let phi_plus = cfg.kernel.phi_plus();
    let a = cfg.potential.a_lo();
    let premise = a > (cfg.m0 * phi_plus).powi(2) / 4.0;
    let verdict = match classify(&cfg) {
        Ok(Threshold::OneD(t)) => t.verdict == Verdict1D::BlowupGuaranteed && t.condition == Some(Condition1D::UnconditionalBlowup),
        _ => false,
    };
    let out = check_preset("blowup-1d-unconditional").unwrap();
    let bracket = out.summary.blowup;
    let found = bracket.is_some_and(|(_, hi)| hi <= 10.0);
    ok(
        premise && verdict && found,
        format!("a > (m0 phi+)^2/4: {premise}; verdict blowup_guaranteed/unconditional_blowup: {verdict}; bracket {bracket:?}"),
    )
}

fn criterion_7() -> Outcome {
    let cfg = preset("smooth-1d").unwrap();
    let (root, upper, e0_ok) = match classify(&cfg) {
        Ok(Threshold::OneD(t)) if t.verdict == Verdict1D::SmoothGuaranteed => (t.e_lower_root, t.e_upper_bound, true),
        _ => (None, f64::NAN, false),
    };
    let root_ok = root.is_some_and(|r| (r - (0.5 - 0.05f64.sqrt())).abs() < 1e-12);
    let upper_ok = (upper - 2.0).abs() < 1e-12;
    let out = check_preset("smooth-1d").unwrap();
    let min_e0 = out.frames[0].min_e;
    let premise = ok(
        e0_ok && root_ok && upper_ok && (min_e0 - 0.3).abs() < 1e-12,
        format!("min e0 = {min_e0}, lower root {root:?}, upper bound {upper}"),
    );
    and(premise, from_checks(&out, &["no_blowup", "e_lower_bound", "e_upper_bound"]))
}

fn criterion_9() -> Outcome {
    let cfg = preset("convex-constant-kernel").unwrap();
    let (a, a_hi) = (cfg.potential.a_lo(), cfg.potential.a_hi());
    let k = cfg.m0 * cfg.kernel.phi_plus();
    let premise = ok(
        (a - 1.0).abs() < 1e-15 && (a_hi - 1.5).abs() < 1e-15 && k > a_hi / a.sqrt() && mu_constants(a, a_hi, k).is_some(),
        format!("(a, A, K) = ({a}, {a_hi}, {k})"),
    );
    and(
        premise,
        from_checks(&check_preset("convex-constant-kernel").unwrap(), &["constant_kernel_flocking"]),
    )
}

fn criterion_10() -> Outcome {
    let cfg = preset("convex-algebraic").unwrap();
    let (a, a_hi) = (cfg.potential.a_lo(), cfg.potential.a_hi());
    let stable = cfg.m0 * cfg.kernel.eval(0.0) > a_hi / a.sqrt();
    let premise = ok(
        stable && !cfg.kernel.is_constant() && cfg.t_end == 100.0,
        format!("m0 phi(0) = {} > A/sqrt(a) = {}", cfg.m0 * cfg.kernel.eval(0.0), a_hi / a.sqrt()),
    );
    and(
        premise,
        from_checks(&check_preset("convex-algebraic").unwrap(), &["algebraic_flocking"]),
    )
}

fn criterion_11() -> Outcome {
    let cfg = preset("subcritical-2d").unwrap();
    let verdict = match classify(&cfg) {
        Ok(Threshold::TwoD(t)) => {
            t.verdict == Verdict2D::SubcriticalQuadratic && matches!(t.constants, Constants2D::Quadratic { c_star, .. } if c_star == 0.0)
        }
        _ => false,
    };
    let premise = ok(
        verdict && cfg.n == 256 && cfg.t_end == 50.0,
        format!("subcritical_quadratic with C* = 0: {verdict}"),
    );
    and(
        premise,
        from_checks(
            &check_preset("subcritical-2d").unwrap(),
            &["no_blowup", "e_nonnegative", "eta_s_bound", "omega_bound"],
        ),
    )
}

fn criterion_12() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    let mut trace_err: f64 = 0.0;
    let mut de_err: f64 = 0.0;
    for s in 0..1000 {
        let m: [[f64; 2]; 2] = std::array::from_fn(|_| std::array::from_fn(|_| rng.gen_range(-3.0..3.0)));
        let q = spectral(&m, 0.0);
        let tr_m2 = m[0][0] * m[0][0] + 2.0 * m[0][1] * m[1][0] + m[1][1] * m[1][1];
        let rhs = 0.5 * (q.d * q.d + q.eta_s * q.eta_s - 4.0 * q.omega * q.omega);
        trace_err = trace_err.max((tr_m2 - rhs).abs() / tr_m2.abs().max(1.0));

        let a = rng.gen_range(0.1..4.0);
        let pot = PotentialSpec::quadratic(a).unwrap();
        let n = rng.gen_range(2..32);
        let (de, e, m0) = if s % 2 == 0 {
            let ens = random_ensemble::<1>(&mut rng, n).recenter();
            (fluctuations(&ens, a).0, energy(&ens, &pot).0, ens.total_mass())
        } else {
            let ens = random_ensemble::<2>(&mut rng, n).recenter();
            (fluctuations(&ens, a).0, energy(&ens, &pot).0, ens.total_mass())
        };
        de_err = de_err.max((de - 4.0 * m0 * e).abs() / de.abs().max(1.0));
    }
    ok(
        trace_err <= 1e-12 && de_err <= 1e-12,
        format!("trace identity {trace_err:e}, deltaE = 4 m0 E {de_err:e} over 1000 states (tol 1e-12)"),
    )
}

fn criterion_13() -> Outcome {
    let pts: Vec<(f64, f64)> = [1e-3, 1e-2, 1e-1]
        .iter()
        .map(|&a| (f64::ln(a), lambda(a, 1.0, 1.0, 1.0).ln()))
        .collect();
    let n = pts.len() as f64;
    let (sx, sy) = pts.iter().fold((0.0, 0.0), |(x, y), p| (x + p.0, y + p.1));
    let (mx, my) = (sx / n, sy / n);
    let cov: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let var: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let slope = cov / var;
    ok((slope - 1.0).abs() <= 0.05, format!("slope of log lambda vs log a = {slope}"))
}

fn main() -> ExitCode {
    let flocking_1d = check_preset("quadratic-flocking-1d").unwrap();
    let flocking_2d = check_preset("quadratic-flocking-2d").unwrap();
    let criteria: Vec<(&str, Box<dyn Fn() -> Outcome>)> = vec![
        ("exponential L2 flocking", Box::new(|| from_checks(&flocking_1d, &["l2_flocking"]))),
        ("uniform Linf flocking", Box::new(|| from_checks(&flocking_1d, &["linf_flocking"]))),
        (
            "uniform support bound (1D and 2D)",
            Box::new(|| {
                and(
                    from_checks(&flocking_1d, &["energy_support", "diameter_energy"]),
                    from_checks(&flocking_2d, &["energy_support", "diameter_energy"]),
                )
            }),
        ),
        (
            "harmonic-oscillator means",
            Box::new(|| from_checks(&check_preset("harmonic-means").unwrap(), &["harmonic_means"])),
        ),
        ("energy-dissipation identity", Box::new(criterion_5)),
        ("1D unconditional blow-up", Box::new(criterion_6)),
        ("1D guaranteed smoothness", Box::new(criterion_7)),
        (
            "Riccati oracle",
            Box::new(|| from_checks(&check_preset("riccati-single").unwrap(), &["riccati_oracle"])),
        ),
        ("constant-kernel convex flocking", Box::new(criterion_9)),
        ("algebraic decay", Box::new(criterion_10)),
        ("2D subcritical persistence", Box::new(criterion_11)),
        ("algebraic identities", Box::new(criterion_12)),
        ("lambda = O(a) scaling", Box::new(criterion_13)),
    ];
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        let o = f();
        if !o.pass {
            failed += 1;
        }
        println!("{} {:>2} {name}: {}", if o.pass { "PASS" } else { "FAIL" }, i + 1, o.detail);
    }
    println!("acceptance: {} of {} criteria pass", criteria.len() - failed, criteria.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
