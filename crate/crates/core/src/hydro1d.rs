//! One-dimensional Euler-alignment system along characteristics.
//!
//! Each characteristic carries (x, u, ρ, e) with e = ∂ₓu + φ∗ρ. Convolutions are
//! mass-weighted quadrature sums over all characteristics; the evolved ρ is output
//! only and never fed back into the dynamics.

use serde::Serialize;

use crate::error::{FlockError, Result};
use crate::kernel::KernelSpec;
use crate::pairwise::pair_sums;
use crate::particles::STATE_CAP;
use crate::potential::PotentialSpec;
use crate::profiles::{DensityProfile, VelocityProfile};
use crate::rk4::{self, OdeState};

/// |e| beyond this magnitude counts as blow-up.
pub const E_BLOWUP: f64 = 1e6;

#[derive(Debug, Clone, PartialEq)]
pub struct CharState1D {
    pub x: Vec<f64>,
    pub u: Vec<f64>,
    pub rho: Vec<f64>,
    pub e: Vec<f64>,
    pub m: Vec<f64>,
    pub t: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict1D {
    SmoothGuaranteed,
    BlowupGuaranteed,
    Indeterminate,
}

/// The inequality that decided a 1D verdict.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Condition1D {
    /// A < (m₀φ₋)²/4 and e₀ above the lower Riccati root.
    SubcriticalRiccati,
    /// a > (m₀φ₊)²/4: every initial datum blows up.
    UnconditionalBlowup,
    /// 0 < a ≤ (m₀φ₊)²/4 and e₀ below the φ₊ lower root somewhere.
    SupercriticalConvex,
    /// a ≤ 0 and e₀ below the φ₋ lower root somewhere.
    SupercriticalNonconvex,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ThresholdReport1D {
    pub verdict: Verdict1D,
    pub condition: Option<Condition1D>,
    /// Signed slack of the binding inequality; positive means satisfied.
    pub margin: f64,
    /// Lower Riccati root m₀φ₋/2 − √((m₀φ₋)²/4 − A), when real.
    pub e_lower_root: Option<f64>,
    /// max{max e₀, 2m₀φ₊, √max(0, −2a)}.
    pub e_upper_bound: f64,
}

impl CharState1D {
    pub fn len(&self) -> usize {
        self.x.len()
    }

    pub fn is_empty(&self) -> bool {
        self.x.is_empty()
    }

    pub fn min_e(&self) -> f64 {
        self.e.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max_e(&self) -> f64 {
        self.e.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    /// φ∗ρ at every characteristic.
    pub fn convolution(&self, kernel: &KernelSpec) -> Vec<f64> {
        let (xs, us) = self.as_points();
        pair_sums(&xs, &us, &self.m, &kernel.compile(), false).conv
    }

    fn as_points(&self) -> (Vec<[f64; 1]>, Vec<[f64; 1]>) {
        (self.x.iter().map(|&v| [v]).collect(), self.u.iter().map(|&v| [v]).collect())
    }

    fn within_caps(&self) -> bool {
        self.x.iter().chain(&self.u).all(|v| v.is_finite() && v.abs() <= STATE_CAP)
            && self.e.iter().all(|v| v.is_finite() && v.abs() <= E_BLOWUP)
            && self.rho.iter().all(|v| v.is_finite())
    }
}

impl OdeState for CharState1D {
    fn pack(&self) -> Vec<f64> {
        let mut v = Vec::with_capacity(4 * self.len());
        v.extend(&self.x);
        v.extend(&self.u);
        v.extend(&self.rho);
        v.extend(&self.e);
        v
    }

    fn unpack(&self, values: &[f64], t: f64) -> Self {
        let n = self.len();
        CharState1D {
            x: values[..n].to_vec(),
            u: values[n..2 * n].to_vec(),
            rho: values[2 * n..3 * n].to_vec(),
            e: values[3 * n..4 * n].to_vec(),
            m: self.m.clone(),
            t,
        }
    }

    fn time(&self) -> f64 {
        self.t
    }
}

/// Characteristics at the cell-centred quadrature nodes of `density`, with
/// eᵢ = ∂ₓu₀(xᵢ) + Σⱼ mⱼ φ(xᵢ − xⱼ) from the analytic derivative.
pub fn init_characteristics(
    density: &DensityProfile,
    velocity: &VelocityProfile,
    n: usize,
    m0: f64,
    kernel: &KernelSpec,
) -> Result<CharState1D> {
    if !(m0 > 0.0 && m0.is_finite()) {
        return Err(FlockError::param("run.m0", format!("must be positive, got {m0}")));
    }
    let (nodes, m) = density.quadrature::<1>(n, m0)?;
    let unsupported = || FlockError::Unsupported("hydrodynamic runs need a velocity profile with an analytic derivative".into());
    let mut x = Vec::with_capacity(nodes.len());
    let mut u = Vec::with_capacity(nodes.len());
    let mut rho = Vec::with_capacity(nodes.len());
    let mut du = Vec::with_capacity(nodes.len());
    for p in &nodes {
        x.push(p[0]);
        u.push(velocity.value(p).ok_or_else(unsupported)?[0]);
        du.push(velocity.jacobian(p).ok_or_else(unsupported)?[0][0]);
        rho.push(density.density(p, m0)?);
    }
    let mut state = CharState1D {
        e: vec![0.0; x.len()],
        x,
        u,
        rho,
        m,
        t: 0.0,
    };
    let conv = state.convolution(kernel);
    state.e = du.iter().zip(&conv).map(|(d, c)| d + c).collect();
    Ok(state)
}

/// Packed time derivative in the layout of [`OdeState::pack`].
pub fn rhs_1d(state: &CharState1D, kernel: &KernelSpec, potential: &PotentialSpec) -> Result<Vec<f64>> {
    if !state.within_caps() {
        return Err(FlockError::BlowUp {
            t_lo: state.t,
            t_hi: state.t,
        });
    }
    let n = state.len();
    let (xs, us) = state.as_points();
    let sums = pair_sums(&xs, &us, &state.m, &kernel.compile(), false);
    let mut out = vec![0.0; 4 * n];
    for i in 0..n {
        let xi = [state.x[i]];
        let gap = state.e[i] - sums.conv[i];
        out[i] = state.u[i];
        out[n + i] = sums.force[i][0] - potential.gradient(&xi)[0];
        out[2 * n + i] = -state.rho[i] * gap;
        out[3 * n + i] = -state.e[i] * gap - potential.hessian_diag(&xi)[0];
    }
    Ok(out)
}

/// One RK4 step; blow-up inside any stage is reported as `[t, t + dt]`.
pub fn step(state: &CharState1D, kernel: &KernelSpec, potential: &PotentialSpec, dt: f64) -> Result<CharState1D> {
    let bracket = FlockError::BlowUp {
        t_lo: state.t,
        t_hi: state.t + dt,
    };
    let next = rk4::step(state, dt, |s| rhs_1d(s, kernel, potential)).map_err(|e| match e {
        FlockError::BlowUp { .. } => bracket.clone(),
        other => other,
    })?;
    if !next.within_caps() {
        return Err(bracket);
    }
    Ok(next)
}

/// Critical-threshold classification of 1D initial data.
///
/// `a`, `a_hi` are the Hessian bounds of the potential and `m0φ±` enter only
/// through products. Equality in a strict inequality yields `Indeterminate`.
pub fn classify_1d(a: f64, a_hi: f64, m0: f64, phi_minus: f64, phi_plus: f64, e0_min: f64, e0_max: f64) -> ThresholdReport1D {
    let km = m0 * phi_minus;
    let kp = m0 * phi_plus;
    let lower_root = |k: f64, c: f64| {
        let disc = k * k / 4.0 - c;
        (disc >= 0.0).then(|| k / 2.0 - disc.sqrt())
    };
    let e_lower_root = lower_root(km, a_hi);
    let e_upper_bound = e0_max.max(2.0 * kp).max((-2.0 * a).max(0.0).sqrt());
    let report = |verdict, condition, margin| ThresholdReport1D {
        verdict,
        condition,
        margin,
        e_lower_root,
        e_upper_bound,
    };

    let potential_slack = km * km / 4.0 - a_hi;
    let smooth_margin = match e_lower_root {
        Some(r) => potential_slack.min(e0_min - r),
        None => potential_slack,
    };
    if smooth_margin > 0.0 {
        return report(Verdict1D::SmoothGuaranteed, Some(Condition1D::SubcriticalRiccati), smooth_margin);
    }

    let critical = kp * kp / 4.0;
    if a > critical {
        return report(Verdict1D::BlowupGuaranteed, Some(Condition1D::UnconditionalBlowup), a - critical);
    }
    if a > 0.0 {
        if let Some(r) = lower_root(kp, a) {
            if e0_min < r {
                return report(Verdict1D::BlowupGuaranteed, Some(Condition1D::SupercriticalConvex), r - e0_min);
            }
        }
    } else if let Some(r) = lower_root(km, a) {
        if e0_min < r {
            return report(Verdict1D::BlowupGuaranteed, Some(Condition1D::SupercriticalNonconvex), r - e0_min);
        }
    }
    report(Verdict1D::Indeterminate, None, smooth_margin)
}

/// First sampling interval in which the series drops below `threshold`.
pub fn detect_blowup(series: &[(f64, f64)], threshold: f64) -> Option<(f64, f64)> {
    let first = series.first()?;
    if first.1 < threshold || first.1.is_nan() {
        return Some((first.0, first.0));
    }
    series
        .windows(2)
        .find(|w| w[1].1 < threshold || w[1].1.is_nan())
        .map(|w| (w[0].0, w[1].0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn classify_examples() {
        let r = classify_1d(0.0, 0.0, 1.0, 1.0, 1.0, 0.01, 0.01);
        assert_eq!(r.verdict, Verdict1D::SmoothGuaranteed);

        let r = classify_1d(5.0, 5.0, 1.0, 2.0, 2.0, 3.0, 3.0);
        assert_eq!(r.verdict, Verdict1D::BlowupGuaranteed);
        assert_eq!(r.condition, Some(Condition1D::UnconditionalBlowup));
        assert_abs_diff_eq!(r.margin, 4.0);

        let r = classify_1d(0.2, 0.2, 1.0, 1.0, 1.0, 0.3, 0.3);
        assert_eq!(r.verdict, Verdict1D::SmoothGuaranteed);
        assert_abs_diff_eq!(r.e_lower_root.unwrap(), 0.5 - 0.05f64.sqrt(), epsilon = 1e-15);
        assert!(r.margin > 0.0 && r.margin < 0.03);
    }

    #[test]
    fn classify_other_branches() {
        let r = classify_1d(0.2, 0.2, 1.0, 1.0, 1.0, 0.1, 0.5);
        assert_eq!(r.condition, Some(Condition1D::SupercriticalConvex));
        let r = classify_1d(-0.5, -0.5, 1.0, 1.0, 1.0, -1.0, 0.5);
        assert_eq!(r.condition, Some(Condition1D::SupercriticalNonconvex));
        // equality at the smooth boundary: potential-free with e₀ = 0
        let r = classify_1d(0.0, 0.0, 1.0, 1.0, 1.0, 0.0, 1.0);
        assert_eq!(r.verdict, Verdict1D::Indeterminate);
        assert_eq!(r.margin, 0.0);
    }

    #[test]
    fn detect_blowup_examples() {
        let big_t = 0.5 + 5e-7;
        let series: Vec<(f64, f64)> = (0..=500)
            .map(|i| {
                let t = i as f64 * 1e-3;
                (t, -1.0 / (big_t - t))
            })
            .collect();
        let (lo, hi) = detect_blowup(&series, -1e6).unwrap();
        let crossing = big_t - 1e-6;
        assert!(lo <= crossing && crossing <= hi);

        let rising: Vec<(f64, f64)> = (0..50).map(|i| (i as f64, i as f64)).collect();
        assert_eq!(detect_blowup(&rising, -1e6), None);
    }

    #[test]
    fn init_examples() {
        let bump = DensityProfile::Bump { half_width: 1.0 };
        let s = init_characteristics(
            &bump,
            &VelocityProfile::linear_1d(0.0),
            32,
            1.0,
            &KernelSpec::constant(2.0).unwrap(),
        )
        .unwrap();
        assert!(s.e.iter().all(|&e| (e - 2.0).abs() < 1e-14));

        let s = init_characteristics(
            &bump,
            &VelocityProfile::linear_1d(1.0),
            32,
            1.0,
            &KernelSpec::constant(1e-300).unwrap(),
        )
        .unwrap();
        assert!(s.e.iter().all(|&e| (e - 1.0).abs() < 1e-14));

        let s = init_characteristics(
            &bump,
            &VelocityProfile::Sinusoidal { amplitude: 0.5 },
            33,
            1.0,
            &KernelSpec::power_law(1.0, 1.0).unwrap(),
        )
        .unwrap();
        let n = s.len();
        for i in 0..n {
            assert_abs_diff_eq!(s.e[i], s.e[n - 1 - i], epsilon = 1e-13);
        }
    }

    #[test]
    fn rhs_special_cases() {
        let s = CharState1D {
            x: vec![0.3, -0.4],
            u: vec![0.1, 0.2],
            rho: vec![0.0, 1.0],
            e: vec![0.0, 0.5],
            m: vec![0.5, 0.5],
            t: 0.0,
        };
        let p = PotentialSpec::perturbed_quadratic(1.0, 0.25, 1.0).unwrap();
        let d = rhs_1d(&s, &KernelSpec::power_law(1.0, 1.0).unwrap(), &p).unwrap();
        assert_eq!(d[4], 0.0);
        assert_abs_diff_eq!(d[6], -p.hessian_diag(&[0.3])[0], epsilon = 1e-15);
    }

    #[test]
    fn blowup_is_reported() {
        let mut s = CharState1D {
            x: vec![0.0],
            u: vec![0.0],
            rho: vec![1.0],
            e: vec![-10.0],
            m: vec![1.0],
            t: 0.0,
        };
        let k = KernelSpec::constant(1.0).unwrap();
        let p = PotentialSpec::Zero;
        let mut hit = None;
        for _ in 0..2000 {
            match step(&s, &k, &p, 1e-3) {
                Ok(next) => s = next,
                Err(FlockError::BlowUp { t_lo, t_hi }) => {
                    hit = Some((t_lo, t_hi));
                    break;
                }
                Err(e) => panic!("{e}"),
            }
        }
        let (lo, hi) = hit.unwrap();
        assert_abs_diff_eq!(hi - lo, 1e-3, epsilon = 1e-12);
        assert!(lo < 0.2);
    }
}
