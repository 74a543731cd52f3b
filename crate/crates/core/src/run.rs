//! Simulation orchestration: initial data, time stepping, per-frame diagnostics
//! and post-hoc bound checks.

use std::io::{self, Write};
use std::time::Instant;

use serde::Serialize;

use crate::config::{ExperimentConfig, Mode};
use crate::constants::{self, constants, ConstantsInput, ConstantsReport};
use crate::diagnostics::{self as diag, DiagnosticsFrame};
use crate::error::{FlockError, Result};
use crate::fit::{fit_rate, trailing_window, FitMode, RateFit};
use crate::hydro1d::{self, classify_1d, detect_blowup, CharState1D, ThresholdReport1D, Verdict1D};
use crate::hydro2d::{self, classify_2d_general, classify_2d_quadratic, CharState2D, Constants2D, ThresholdReport2D, Verdict2D};
use crate::init;
use crate::kernel::KernelSpec;
use crate::particles::{self, harmonic_means, Ensemble};
use crate::potential::PotentialSpec;
use crate::presets;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundCheck {
    pub name: String,
    pub bound: String,
    /// Largest excess of the checked quantity over its bound, clipped at zero.
    pub max_violation: f64,
    pub tolerance: f64,
    pub pass: bool,
}

impl BoundCheck {
    fn new(name: &str, bound: impl Into<String>, excess: f64, tolerance: f64) -> Self {
        let max_violation = if excess.is_nan() { f64::INFINITY } else { excess.max(0.0) };
        BoundCheck {
            name: name.to_string(),
            bound: bound.into(),
            max_violation,
            tolerance,
            pass: max_violation <= tolerance,
        }
    }

    fn flag(name: &str, bound: impl Into<String>, ok: bool) -> Self {
        BoundCheck::new(name, bound, if ok { 0.0 } else { 1.0 }, 0.0)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(untagged)]
pub enum Threshold {
    OneD(ThresholdReport1D),
    TwoD(ThresholdReport2D),
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NamedFit {
    pub series: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub fit: Option<RateFit>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

impl NamedFit {
    fn of(series: &str, r: Result<RateFit>) -> Self {
        match r {
            Ok(f) => NamedFit {
                series: series.into(),
                fit: Some(f),
                error: None,
            },
            Err(e) => NamedFit {
                series: series.into(),
                fit: None,
                error: Some(e.to_string()),
            },
        }
    }
}

/// Extremes measured over the run.
#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct Observed {
    pub diameter_max: f64,
    pub phi_minus_measured: f64,
    pub min_e: Option<f64>,
    pub max_e: Option<f64>,
    pub max_abs_eta_s: Option<f64>,
    pub max_abs_omega: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunSummary {
    pub scenario: String,
    pub mode: &'static str,
    pub config: String,
    pub constants: ConstantsReport,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub threshold: Option<Threshold>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub u_max_source: Option<String>,
    pub bound_checks: Vec<BoundCheck>,
    pub rate_fits: Vec<NamedFit>,
    pub blowup: Option<(f64, f64)>,
    pub final_time: f64,
    pub steps: usize,
    pub observed: Observed,
    pub wall_time: f64,
}

impl RunSummary {
    pub fn all_pass(&self) -> bool {
        self.bound_checks.iter().all(|c| c.pass)
    }

    pub fn check(&self, name: &str) -> Option<&BoundCheck> {
        self.bound_checks.iter().find(|c| c.name == name)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("summary serialises")
    }
}

pub struct RunOutput {
    pub summary: RunSummary,
    pub frames: Vec<DiagnosticsFrame>,
    /// (t, min e) after every step of a 1D hydrodynamic run.
    pub min_e_series: Vec<(f64, f64)>,
    pub dim: usize,
}

impl RunOutput {
    pub fn write_csv<W: Write>(&self, mut w: W) -> io::Result<()> {
        writeln!(
            w,
            "# flocklab frames scenario={} mode={}; energies E and E_k, fluctuations deltaE, max particle energy P, diameter D, Lyapunov V, pointwise F1, pair functional F, means xc/uc, threshold variables; NaN where not applicable",
            self.summary.scenario, self.summary.mode
        )?;
        writeln!(w, "{}", DiagnosticsFrame::csv_header(self.dim))?;
        for f in &self.frames {
            writeln!(w, "{}", f.csv_row())?;
        }
        Ok(())
    }

    pub fn csv_string(&self) -> String {
        let mut buf = Vec::new();
        self.write_csv(&mut buf).expect("writing to memory");
        String::from_utf8(buf).expect("ascii csv")
    }
}

/// Scalars shared by the constants report, the classifiers and the checks.
struct Context {
    a: f64,
    a_hi: f64,
    phi_plus: f64,
    dphi_inf: f64,
    phi_minus: f64,
    input: ConstantsInput,
}

fn is_quadratic(p: &PotentialSpec) -> bool {
    p.quadratic_coefficient().is_some()
}

/// The frame in which energies are measured: centred for quadratic confinement.
fn energy_frame<const D: usize>(ens: &Ensemble<D>, potential: &PotentialSpec) -> Ensemble<D> {
    if is_quadratic(potential) {
        ens.recenter()
    } else {
        ens.clone()
    }
}

fn context<const D: usize>(cfg: &ExperimentConfig, ens0: &Ensemble<D>) -> Result<Context> {
    let p = &cfg.potential;
    let (a, a_hi) = (p.a_lo(), p.a_hi());
    let framed = energy_frame(ens0, p);
    let (e0, _) = diag::energy(&framed, p);
    let (p0, d0) = diag::particle_energy_support(&framed, p);
    let bounds = cfg.kernel.bounds(d0)?;
    let power_law = match &cfg.kernel {
        KernelSpec::PowerLaw { c0, beta } => Some((*c0, *beta)),
        KernelSpec::Constant { k } => Some((*k, 0.0)),
        KernelSpec::FloorClipped { .. } => None,
    };
    let r0 = power_law.and_then(|(c0, beta)| constants::r0_power_law(a, p0, e0, c0, beta, cfg.m0, bounds.phi_plus));
    let (phi_minus, source) = match (&cfg.kernel, r0) {
        (KernelSpec::Constant { k }, _) => (*k, "constant kernel".to_string()),
        (KernelSpec::FloorClipped { alpha, .. }, _) => (*alpha, "floor of the clipped kernel".to_string()),
        (_, Some(r0)) => {
            let d = (8.0 * r0 / a).sqrt();
            (
                cfg.kernel.eval(d),
                format!("phi(sqrt(8 R0 / a)) with R0 = {r0:e}, diameter bound {d:e}"),
            )
        }
        _ => (
            bounds.phi_minus,
            format!("phi(D0) with initial diameter D0 = {d0:e}; not a uniform bound"),
        ),
    };
    let max_u0_plus_x = (0..ens0.len())
        .map(|i| {
            let nu: f64 = ens0.u[i].iter().map(|v| v * v).sum::<f64>().sqrt();
            let nx: f64 = ens0.x[i].iter().map(|v| v * v).sum::<f64>().sqrt();
            nu + nx
        })
        .fold(0.0, f64::max);
    let input = ConstantsInput {
        a,
        a_hi,
        m0: cfg.m0,
        phi_minus,
        phi_plus: bounds.phi_plus,
        dphi_inf: bounds.dphi_inf,
        k: match &cfg.kernel {
            KernelSpec::Constant { k } => Some(cfg.m0 * k),
            _ => None,
        },
        e0,
        p0,
        power_law,
        max_u0_plus_x: Some(max_u0_plus_x),
        phi_minus_source: source,
        ..Default::default()
    };
    Ok(Context {
        a,
        a_hi,
        phi_plus: bounds.phi_plus,
        dphi_inf: bounds.dphi_inf,
        phi_minus,
        input,
    })
}

fn ensemble_frame<const D: usize>(ens: &Ensemble<D>, cfg: &ExperimentConfig, ctx: &Context, report: &ConstantsReport) -> DiagnosticsFrame {
    let p = &cfg.potential;
    let framed = energy_frame(ens, p);
    let mut f = DiagnosticsFrame::empty(ens.t);
    (f.energy, f.kinetic) = diag::energy(ens, p);
    (f.delta_e_l2, f.delta_e_linf) = diag::fluctuations(ens, ctx.a);
    (f.p, f.diameter) = diag::particle_energy_support(&framed, p);
    if let (Some(a), Some(l), Some(l1)) = (p.quadratic_coefficient(), report.lambda.value, report.lambda1.value) {
        f.v = diag::lyapunov_v(&framed, a, l);
        f.f1_max = diag::f1_max(&framed, a, l1);
    }
    if let (Some(k), Some(b)) = (ctx.input.k, report.beta_cross.value) {
        f.f_const_max = diag::pair_functional_f(ens, k, b);
    }
    let m = ens.means();
    f.x_c = m.x_c.to_vec();
    f.u_c = m.u_c.to_vec();
    f
}

fn n_steps(cfg: &ExperimentConfig) -> usize {
    (cfg.t_end / cfg.dt).round().max(1.0) as usize
}

fn is_frame(cfg: &ExperimentConfig, step: usize, last: usize) -> bool {
    step.is_multiple_of(cfg.output_stride) || step == last
}

/// Largest value of `lhs(frame) − rhs(frame)` over frames.
fn max_excess(frames: &[DiagnosticsFrame], f: impl Fn(&DiagnosticsFrame) -> f64) -> f64 {
    frames.iter().map(f).fold(f64::NEG_INFINITY, f64::max)
}

fn particle_checks(
    cfg: &ExperimentConfig,
    ctx: &Context,
    report: &ConstantsReport,
    frames: &[DiagnosticsFrame],
    observed: &Observed,
) -> Vec<BoundCheck> {
    let mut checks = Vec::new();
    let (a, m0) = (ctx.a, cfg.m0);
    let f0 = &frames[0];
    let m0_sq = cfg.m0 * cfg.m0;
    checks.push(BoundCheck::new(
        "fluctuation_ordering",
        "deltaE_L2 <= m0^2 deltaE_Linf",
        max_excess(frames, |f| f.delta_e_l2 - m0_sq * f.delta_e_linf * (1.0 + 1e-12)),
        1e-12,
    ));
    if is_quadratic(&cfg.potential) {
        let pm = observed.phi_minus_measured;
        let lam = constants::lambda(a, m0, pm, ctx.phi_plus);
        let lam1 = constants::lambda1(a, m0, pm, ctx.phi_plus);
        let c0 = constants::c0_linf(a, m0, pm, ctx.phi_plus, lam1);
        let cinf = constants::c_inf(a, m0, pm, ctx.phi_plus, lam).max(constants::c_inf_proof(c0, m0, lam));
        checks.push(BoundCheck::new(
            "l2_flocking",
            format!("deltaE_L2 <= 2 deltaE_L2(0) exp(-lambda t), lambda = {lam:e} from phi(D_max)"),
            max_excess(frames, |f| f.delta_e_l2 - 2.0 * f0.delta_e_l2 * (-lam * f.t).exp()),
            1e-9,
        ));
        checks.push(BoundCheck::new(
            "linf_flocking",
            format!("deltaE_Linf <= C_inf deltaE_Linf(0) exp(-lambda t / 2), C_inf = {cinf:e}"),
            max_excess(frames, |f| f.delta_e_linf - cinf * f0.delta_e_linf * (-lam * f.t / 2.0).exp()),
            1e-9,
        ));
        if let Some(r0) = report.r0.value {
            checks.push(BoundCheck::new(
                "energy_support",
                format!("P <= R0 = {r0:e}"),
                max_excess(frames, |f| f.p - r0),
                1e-9,
            ));
        }
        checks.push(BoundCheck::new(
            "diameter_energy",
            "(a/8) D^2 <= P",
            max_excess(frames, |f| a / 8.0 * f.diameter * f.diameter - f.p),
            1e-9,
        ));
    }
    if let (Some(mu1), Some(mu2), Some(mu3)) = (report.mu1.value, report.mu2.value, report.mu3.value) {
        checks.push(BoundCheck::new(
            "constant_kernel_flocking",
            format!("deltaE_L2 <= (mu2/mu3) deltaE_L2(0) exp(-(mu1/mu2) t), mu = ({mu1:e}, {mu2:e}, {mu3:e})"),
            max_excess(frames, |f| f.delta_e_l2 - mu2 / mu3 * f0.delta_e_l2 * (-mu1 / mu2 * f.t).exp()),
            1e-9,
        ));
    }
    let stable = m0 * ctx.phi_plus > ctx.a_hi / a.sqrt();
    if matches!(cfg.potential, PotentialSpec::PerturbedQuadratic { .. }) && !cfg.kernel.is_constant() && stable {
        // Exact zeros mean the ensemble has collapsed to one state; log(0) = -inf carries no growth.
        let (lo, hi) = trailing_window(cfg.t_end);
        let in_window: Vec<(f64, f64)> = frames
            .iter()
            .filter(|f| f.t >= lo && f.t <= hi)
            .map(|f| (f.t, f.delta_e_l2 * (1.0 + f.t).sqrt()))
            .collect();
        let positive: Vec<(f64, f64)> = in_window.iter().copied().filter(|s| s.1 > 0.0).collect();
        let slope = if !in_window.is_empty() && positive.is_empty() {
            f64::NEG_INFINITY
        } else {
            fit_rate(&positive, (lo, hi), FitMode::Exponential).map_or(f64::NAN, |r| -r.rate)
        };
        checks.push(BoundCheck::new(
            "algebraic_flocking",
            format!(
                "trailing-window slope of log(deltaE_L2 sqrt(1+t)) <= 1e-3 over {} positive of {} samples",
                positive.len(),
                in_window.len()
            ),
            slope,
            1e-3,
        ));
    }
    checks
}

fn run_particles<const D: usize>(cfg: &ExperimentConfig) -> Result<RunOutput> {
    let start = Instant::now();
    let ens0 = init::initial_ensemble::<D>(cfg)?;
    let ctx = context(cfg, &ens0)?;
    let report = constants(&ctx.input);
    let harmonic = cfg.potential.quadratic_coefficient().filter(|_| !cfg.pairwise);
    let means0 = ens0.means();

    let last = n_steps(cfg);
    let mut ens = ens0;
    let mut frames = Vec::new();
    let mut blowup = None;
    let mut means_err: f64 = 0.0;
    let mut steps = 0;
    for step in 0..=last {
        if is_frame(cfg, step, last) {
            frames.push(ensemble_frame(&ens, cfg, &ctx, &report));
        }
        if let Some(a) = harmonic {
            let exact = harmonic_means(&means0, a, ens.t);
            let m = ens.means();
            let dev: f64 = (0..D)
                .map(|k| (m.x_c[k] - exact.x_c[k]).powi(2) + (m.u_c[k] - exact.u_c[k]).powi(2))
                .sum::<f64>()
                .sqrt();
            means_err = means_err.max(dev);
        }
        if step == last {
            break;
        }
        let next = match cfg.potential.quadratic_coefficient() {
            Some(a) if cfg.pairwise => particles::step_rk4_pairwise(&ens, &cfg.kernel, a, cfg.dt),
            _ => particles::step_rk4(&ens, &cfg.kernel, &cfg.potential, cfg.dt),
        };
        match next {
            Ok(e) => {
                ens = e;
                ens.t = (step + 1) as f64 * cfg.dt;
            }
            Err(FlockError::BlowUp { t_lo, t_hi }) => {
                blowup = Some((t_lo, t_hi));
                frames.push(ensemble_frame(&ens, cfg, &ctx, &report));
                break;
            }
            Err(e) => return Err(e),
        }
        steps += 1;
    }

    let diameter_max = frames.iter().map(|f| f.diameter).fold(0.0, f64::max);
    let observed = Observed {
        diameter_max,
        phi_minus_measured: cfg.kernel.eval(diameter_max),
        ..Default::default()
    };
    let mut bound_checks = particle_checks(cfg, &ctx, &report, &frames, &observed);
    if harmonic.is_some() {
        bound_checks.push(BoundCheck::new(
            "harmonic_means",
            "|(x_c, u_c)(t) - harmonic oscillator closed form| <= 1e-7",
            means_err,
            1e-7,
        ));
    }
    let mut rate_fits = Vec::new();
    let window = trailing_window(cfg.t_end);
    let series: Vec<(f64, f64)> = frames.iter().map(|f| (f.t, f.delta_e_l2)).filter(|s| s.1 > 0.0).collect();
    rate_fits.push(NamedFit::of("deltaE_L2", fit_rate(&series, window, FitMode::Exponential)));
    if !is_quadratic(&cfg.potential) && !cfg.kernel.is_constant() {
        rate_fits.push(NamedFit::of("deltaE_L2", fit_rate(&series, window, FitMode::Algebraic)));
    }

    Ok(RunOutput {
        summary: RunSummary {
            scenario: cfg.scenario.clone(),
            mode: cfg.mode.as_str(),
            config: cfg.to_toml(),
            constants: report,
            threshold: None,
            u_max_source: None,
            bound_checks,
            rate_fits,
            blowup,
            final_time: ens.t,
            steps,
            observed,
            wall_time: start.elapsed().as_secs_f64(),
        },
        frames,
        min_e_series: Vec::new(),
        dim: D,
    })
}

fn ensemble_1d(s: &CharState1D) -> Ensemble<1> {
    Ensemble {
        x: s.x.iter().map(|&v| [v]).collect(),
        u: s.u.iter().map(|&v| [v]).collect(),
        m: s.m.clone(),
        t: s.t,
    }
}

fn ensemble_2d(s: &CharState2D) -> Ensemble<2> {
    Ensemble {
        x: s.x.clone(),
        u: s.u.clone(),
        m: s.m.clone(),
        t: s.t,
    }
}

fn threshold_1d(cfg: &ExperimentConfig, s0: &CharState1D, ctx: &Context) -> ThresholdReport1D {
    classify_1d(ctx.a, ctx.a_hi, cfg.m0, ctx.phi_minus, ctx.phi_plus, s0.min_e(), s0.max_e())
}

/// Closed-form solution of e′ = −e(e − K) − A from e(0) = e0.
pub fn riccati_exact(e0: f64, k: f64, a: f64, t: f64) -> f64 {
    let disc = k * k / 4.0 - a;
    let y0 = e0 - k / 2.0;
    if disc > 0.0 {
        let q = disc.sqrt();
        let (r1, r2) = (k / 2.0 - q, k / 2.0 + q);
        if e0 == r2 {
            return r2;
        }
        let w = (e0 - r1) / (e0 - r2) * ((r2 - r1) * t).exp();
        (r1 - r2 * w) / (1.0 - w)
    } else if disc < 0.0 {
        let q = (-disc).sqrt();
        k / 2.0 + q * ((y0 / q).atan() - q * t).tan()
    } else {
        k / 2.0 + y0 / (1.0 + y0 * t)
    }
}

fn run_hydro1d(cfg: &ExperimentConfig) -> Result<RunOutput> {
    let start = Instant::now();
    let s0 = init::initial_characteristics_1d(cfg)?;
    let ctx = context(cfg, &ensemble_1d(&s0))?;
    let report = constants(&ctx.input);
    let threshold = threshold_1d(cfg, &s0, &ctx);
    let riccati = match (&cfg.kernel, &cfg.potential) {
        (KernelSpec::Constant { k }, PotentialSpec::Quadratic { a }) if s0.len() == 1 => Some((cfg.m0 * k, *a)),
        (KernelSpec::Constant { k }, PotentialSpec::Zero) if s0.len() == 1 => Some((cfg.m0 * k, 0.0)),
        _ => None,
    };
    let e_init = s0.e[0];

    let last = n_steps(cfg);
    let mut s = s0;
    let mut frames = Vec::new();
    let mut series = vec![(s.t, s.min_e())];
    let (mut min_e, mut max_e) = (s.min_e(), s.max_e());
    let mut riccati_err: f64 = 0.0;
    let mut stopped = false;
    let mut steps = 0;
    let frame = |s: &CharState1D| {
        let mut f = ensemble_frame(&ensemble_1d(s), cfg, &ctx, &report);
        f.min_e = s.min_e();
        f.max_e = s.max_e();
        f.min_rho = s.rho.iter().copied().fold(f64::INFINITY, f64::min);
        f.max_rho = s.rho.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        f
    };
    for step in 0..=last {
        if is_frame(cfg, step, last) {
            frames.push(frame(&s));
        }
        if step == last {
            break;
        }
        match hydro1d::step(&s, &cfg.kernel, &cfg.potential, cfg.dt) {
            Ok(next) => {
                s = next;
                s.t = (step + 1) as f64 * cfg.dt;
            }
            Err(FlockError::BlowUp { t_hi, .. }) => {
                series.push((t_hi, f64::NEG_INFINITY));
                frames.push(frame(&s));
                stopped = true;
                break;
            }
            Err(e) => return Err(e),
        }
        steps += 1;
        let (lo, hi) = (s.min_e(), s.max_e());
        series.push((s.t, lo));
        min_e = min_e.min(lo);
        max_e = max_e.max(hi);
        if let Some((k, a)) = riccati {
            riccati_err = riccati_err.max((s.e[0] - riccati_exact(e_init, k, a, s.t)).abs());
        }
        if lo < cfg.e_threshold {
            frames.push(frame(&s));
            stopped = true;
            break;
        }
    }
    let blowup = if stopped { detect_blowup(&series, cfg.e_threshold) } else { None };

    let mut bound_checks = Vec::new();
    if threshold.verdict == Verdict1D::SmoothGuaranteed {
        bound_checks.push(BoundCheck::flag("no_blowup", "predicted smooth: no blow-up", blowup.is_none()));
        if let Some(r) = threshold.e_lower_root {
            bound_checks.push(BoundCheck::new(
                "e_lower_bound",
                format!("min e >= lower root {r:e}"),
                r - min_e,
                1e-6,
            ));
        }
        bound_checks.push(BoundCheck::new(
            "e_upper_bound",
            format!("max e <= {:e}", threshold.e_upper_bound),
            max_e - threshold.e_upper_bound,
            1e-6,
        ));
    }
    if riccati.is_some() {
        bound_checks.push(BoundCheck::new(
            "riccati_oracle",
            "|e - closed-form Riccati solution| <= 1e-8",
            riccati_err,
            1e-8,
        ));
    }
    let diameter_max = frames.iter().map(|f| f.diameter).fold(0.0, f64::max);

    Ok(RunOutput {
        summary: RunSummary {
            scenario: cfg.scenario.clone(),
            mode: cfg.mode.as_str(),
            config: cfg.to_toml(),
            constants: report,
            threshold: Some(Threshold::OneD(threshold)),
            u_max_source: None,
            bound_checks,
            rate_fits: Vec::new(),
            blowup,
            final_time: s.t,
            steps,
            observed: Observed {
                diameter_max,
                phi_minus_measured: cfg.kernel.eval(diameter_max),
                min_e: Some(min_e),
                max_e: Some(max_e),
                ..Default::default()
            },
            wall_time: start.elapsed().as_secs_f64(),
        },
        frames,
        min_e_series: series,
        dim: 1,
    })
}

struct Hydro2dSetup {
    ctx: Context,
    report: ConstantsReport,
    threshold: Option<ThresholdReport2D>,
    u_max_source: Option<String>,
}

fn setup_2d(cfg: &ExperimentConfig, s0: &CharState2D) -> Result<Hydro2dSetup> {
    let ens0 = ensemble_2d(s0);
    let mut ctx = context(cfg, &ens0)?;
    let spec = s0.spectra(&cfg.kernel);
    let e0_min = spec.iter().map(|q| q.e).fold(f64::INFINITY, f64::min);
    let eta0 = spec.iter().map(|q| q.eta_s.abs()).fold(0.0, f64::max);
    let omega0 = spec.iter().map(|q| q.omega.abs()).fold(0.0, f64::max);
    let (_, de_inf0) = diag::fluctuations(&ens0, ctx.a);
    ctx.input.eta_s0_max = Some(eta0);
    ctx.input.omega0_max = Some(omega0);
    ctx.input.delta_einf0 = Some(de_inf0);
    let provisional = constants(&ctx.input);
    let u_max = provisional.u_max_apriori.value;
    ctx.input.u_max = u_max;
    let report = constants(&ctx.input);
    let (threshold, u_max_source) = match &cfg.potential {
        PotentialSpec::Quadratic { a } => (
            Some(classify_2d_quadratic(
                *a,
                cfg.m0,
                ctx.phi_minus,
                ctx.phi_plus,
                ctx.dphi_inf,
                eta0,
                de_inf0,
                e0_min,
            )),
            None,
        ),
        PotentialSpec::PerturbedQuadratic { .. } => match u_max {
            Some(u) => (
                Some(classify_2d_general(
                    ctx.a_hi,
                    ctx.a,
                    cfg.m0,
                    ctx.phi_minus,
                    ctx.dphi_inf,
                    u,
                    eta0,
                    e0_min,
                )),
                Some(format!("a-priori amplitude bound {u:e}")),
            ),
            None => (None, None),
        },
        PotentialSpec::Zero => (None, None),
    };
    Ok(Hydro2dSetup {
        ctx,
        report,
        threshold,
        u_max_source,
    })
}

fn run_hydro2d(cfg: &ExperimentConfig) -> Result<RunOutput> {
    let start = Instant::now();
    let s0 = init::initial_characteristics_2d(cfg)?;
    let Hydro2dSetup {
        ctx,
        report,
        threshold,
        u_max_source,
    } = setup_2d(cfg, &s0)?;

    let last = n_steps(cfg);
    let mut s = s0;
    let mut frames = Vec::new();
    let mut blowup = None;
    let mut steps = 0;
    let vorticity = |s: &CharState2D| -> Vec<f64> { s.mat.iter().map(|m| 0.5 * (m[1][0] - m[0][1])).collect() };
    let omega0 = vorticity(&s);
    let mut omega_flip: f64 = 0.0;
    let frame = |s: &CharState2D| {
        let mut f = ensemble_frame(&ensemble_2d(s), cfg, &ctx, &report);
        let spec = s.spectra(&cfg.kernel);
        f.min_e = spec.iter().map(|q| q.e).fold(f64::INFINITY, f64::min);
        f.max_e = spec.iter().map(|q| q.e).fold(f64::NEG_INFINITY, f64::max);
        f.max_abs_eta_s = spec.iter().map(|q| q.eta_s.abs()).fold(0.0, f64::max);
        f.max_abs_omega = spec.iter().map(|q| q.omega.abs()).fold(0.0, f64::max);
        f.max_tr_m = spec.iter().map(|q| q.d).fold(f64::NEG_INFINITY, f64::max);
        f
    };
    for step in 0..=last {
        if is_frame(cfg, step, last) {
            frames.push(frame(&s));
        }
        if step == last {
            break;
        }
        match hydro2d::step(&s, &cfg.kernel, &cfg.potential, cfg.dt) {
            Ok(next) => {
                s = next;
                s.t = (step + 1) as f64 * cfg.dt;
                for (w0, w) in omega0.iter().zip(vorticity(&s)) {
                    if *w0 != 0.0 {
                        omega_flip = omega_flip.max(-w0.signum() * w);
                    }
                }
            }
            Err(FlockError::BlowUp { t_lo, t_hi }) => {
                blowup = Some((t_lo, t_hi));
                break;
            }
            Err(e) => return Err(e),
        }
        steps += 1;
    }

    let min_e = frames.iter().map(|f| f.min_e).fold(f64::INFINITY, f64::min);
    let max_e = frames.iter().map(|f| f.max_e).fold(f64::NEG_INFINITY, f64::max);
    let max_eta = frames.iter().map(|f| f.max_abs_eta_s).fold(0.0, f64::max);
    let max_omega = frames.iter().map(|f| f.max_abs_omega).fold(0.0, f64::max);
    let mut bound_checks = Vec::new();
    if cfg.kernel.is_constant() {
        bound_checks.push(BoundCheck::new(
            "omega_sign",
            "sign of omega kept along every characteristic",
            omega_flip,
            0.0,
        ));
    }
    if let Some(th) = &threshold {
        if th.verdict != Verdict2D::NotSubcritical {
            bound_checks.push(BoundCheck::flag("no_blowup", "predicted subcritical: no blow-up", blowup.is_none()));
        }
        if let (Verdict2D::SubcriticalQuadratic, Constants2D::Quadratic { lambda, c_inf, .. }) = (th.verdict, th.constants) {
            bound_checks.push(BoundCheck::new("e_nonnegative", "min e >= 0", -min_e, 1e-6));
            if let Some(eb) = th.eta_s_bound {
                bound_checks.push(BoundCheck::new("eta_s_bound", format!("max|eta_S| <= {eb:e}"), max_eta - eb, 1e-6));
            }
            let w = constants::omega_bound(
                ctx.input.omega0_max.unwrap_or(0.0),
                lambda,
                cfg.m0,
                ctx.dphi_inf,
                c_inf,
                ctx.input.delta_einf0.unwrap_or(0.0),
            );
            bound_checks.push(BoundCheck::new("omega_bound", format!("max|omega| <= {w:e}"), max_omega - w, 1e-6));
        }
    }
    let diameter_max = frames.iter().map(|f| f.diameter).fold(0.0, f64::max);

    Ok(RunOutput {
        summary: RunSummary {
            scenario: cfg.scenario.clone(),
            mode: cfg.mode.as_str(),
            config: cfg.to_toml(),
            constants: report,
            threshold: threshold.map(Threshold::TwoD),
            u_max_source,
            bound_checks,
            rate_fits: Vec::new(),
            blowup,
            final_time: s.t,
            steps,
            observed: Observed {
                diameter_max,
                phi_minus_measured: cfg.kernel.eval(diameter_max),
                min_e: Some(min_e),
                max_e: Some(max_e),
                max_abs_eta_s: Some(max_eta),
                max_abs_omega: Some(max_omega),
            },
            wall_time: start.elapsed().as_secs_f64(),
        },
        frames,
        min_e_series: Vec::new(),
        dim: 2,
    })
}

/// Runs a validated config to completion or blow-up.
pub fn run(cfg: &ExperimentConfig) -> Result<RunOutput> {
    match (cfg.mode, cfg.dim) {
        (Mode::Particles, 1) => run_particles::<1>(cfg),
        (Mode::Particles, 2) => run_particles::<2>(cfg),
        (Mode::Hydro1d, _) => run_hydro1d(cfg),
        (Mode::Hydro2d, _) => run_hydro2d(cfg),
        (_, d) => Err(FlockError::Unsupported(format!("dimension {d}"))),
    }
}

/// Threshold report of the initial data of a hydrodynamic config.
pub fn classify(cfg: &ExperimentConfig) -> Result<Threshold> {
    match cfg.mode {
        Mode::Hydro1d => {
            let s0 = init::initial_characteristics_1d(cfg)?;
            let ctx = context(cfg, &ensemble_1d(&s0))?;
            Ok(Threshold::OneD(threshold_1d(cfg, &s0, &ctx)))
        }
        Mode::Hydro2d => {
            let s0 = init::initial_characteristics_2d(cfg)?;
            setup_2d(cfg, &s0)?
                .threshold
                .map(Threshold::TwoD)
                .ok_or_else(|| FlockError::Unsupported("2D classification needs a convex potential".into()))
        }
        Mode::Particles => Err(FlockError::Unsupported("classification needs mode hydro1d or hydro2d".into())),
    }
}

/// Constants report of the initial data of any config.
pub fn constants_report(cfg: &ExperimentConfig) -> Result<ConstantsReport> {
    match (cfg.mode, cfg.dim) {
        (Mode::Particles, 1) => Ok(constants(&context(cfg, &init::initial_ensemble::<1>(cfg)?)?.input)),
        (Mode::Particles, _) => Ok(constants(&context(cfg, &init::initial_ensemble::<2>(cfg)?)?.input)),
        (Mode::Hydro1d, _) => {
            let s0 = init::initial_characteristics_1d(cfg)?;
            Ok(constants(&context(cfg, &ensemble_1d(&s0))?.input))
        }
        (Mode::Hydro2d, _) => Ok(setup_2d(cfg, &init::initial_characteristics_2d(cfg)?)?.report),
    }
}

/// Runs a preset and appends its scenario-level expectations.
pub fn check_preset(name: &str) -> Result<RunOutput> {
    let cfg = presets::preset(name).ok_or_else(|| FlockError::config("run.scenario", format!("unknown preset '{name}'")))?;
    let mut out = run(&cfg)?;
    if let Some(Threshold::OneD(th)) = &out.summary.threshold {
        if th.verdict == Verdict1D::BlowupGuaranteed {
            let b = out.summary.blowup;
            out.summary.bound_checks.push(BoundCheck::flag(
                "blowup_detected",
                format!("predicted blow-up: bracket found before T = {}", cfg.t_end),
                b.is_some_and(|(_, hi)| hi <= cfg.t_end),
            ));
        }
    }
    Ok(out)
}
