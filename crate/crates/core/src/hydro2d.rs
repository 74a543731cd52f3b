//! Two-dimensional velocity-gradient dynamics along characteristics.
//!
//! The hydrodynamic solution is the weighted particle quadrature augmented with the
//! gradient matrix M = ∇u per characteristic:
//! M′ = −M² − (φ∗ρ)M + R − ∇²U with R_kl = Σⱼ mⱼ ∂_lφ(x − xⱼ)(u_k(xⱼ) − u_k(x)).

use serde::Serialize;

use crate::constants::{c_inf, c_star, lambda};
use crate::error::{FlockError, Result};
use crate::kernel::KernelSpec;
use crate::pairwise::pair_sums;
use crate::particles::STATE_CAP;
use crate::potential::PotentialSpec;
use crate::profiles::{DensityProfile, VelocityProfile};
use crate::rk4::{self, OdeState};

pub type Mat2 = [[f64; 2]; 2];

#[derive(Debug, Clone, PartialEq)]
pub struct CharState2D {
    pub x: Vec<[f64; 2]>,
    pub u: Vec<[f64; 2]>,
    /// M_kl = ∂_l u_k.
    pub mat: Vec<Mat2>,
    pub m: Vec<f64>,
    pub t: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SpectralQuantities {
    pub d: f64,
    pub eta_s: f64,
    pub omega: f64,
    pub e: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict2D {
    SubcriticalQuadratic,
    SubcriticalGeneral,
    NotSubcritical,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Constants2D {
    Quadratic {
        lambda: f64,
        c_inf: f64,
        c_star: f64,
        c1_squared: f64,
    },
    General {
        c_max: f64,
        c_a: f64,
        c2: Option<f64>,
        eta_s_max: Option<f64>,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Margin {
    pub name: &'static str,
    /// Positive when the inequality holds strictly.
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ThresholdReport2D {
    pub verdict: Verdict2D,
    pub constants: Constants2D,
    pub margins: Vec<Margin>,
    /// Bound on |η_S| along the evolution implied by the report.
    pub eta_s_bound: Option<f64>,
}

/// Closed-form spectral data of M; `phi_conv` is φ∗ρ at the same point.
pub fn spectral(m: &Mat2, phi_conv: f64) -> SpectralQuantities {
    let d = m[0][0] + m[1][1];
    let s12 = 0.5 * (m[0][1] + m[1][0]);
    let diff = m[0][0] - m[1][1];
    SpectralQuantities {
        d,
        eta_s: (diff * diff + 4.0 * s12 * s12).sqrt(),
        omega: 0.5 * (m[1][0] - m[0][1]),
        e: d + phi_conv,
    }
}

impl CharState2D {
    pub fn len(&self) -> usize {
        self.x.len()
    }

    pub fn is_empty(&self) -> bool {
        self.x.is_empty()
    }

    pub fn convolution(&self, kernel: &KernelSpec) -> Vec<f64> {
        pair_sums(&self.x, &self.u, &self.m, &kernel.compile(), false).conv
    }

    /// Spectral quantities at every characteristic.
    pub fn spectra(&self, kernel: &KernelSpec) -> Vec<SpectralQuantities> {
        self.convolution(kernel)
            .iter()
            .zip(&self.mat)
            .map(|(c, m)| spectral(m, *c))
            .collect()
    }

    fn within_caps(&self) -> bool {
        self.x
            .iter()
            .chain(&self.u)
            .flatten()
            .chain(self.mat.iter().flatten().flatten())
            .all(|v| v.is_finite() && v.abs() <= STATE_CAP)
    }
}

impl OdeState for CharState2D {
    fn pack(&self) -> Vec<f64> {
        let mut v = Vec::with_capacity(8 * self.len());
        v.extend(self.x.iter().flatten());
        v.extend(self.u.iter().flatten());
        v.extend(self.mat.iter().flatten().flatten());
        v
    }

    fn unpack(&self, values: &[f64], t: f64) -> Self {
        let n = self.len();
        let pair = |off: usize| -> Vec<[f64; 2]> { (0..n).map(|i| [values[off + 2 * i], values[off + 2 * i + 1]]).collect() };
        let mat = (0..n)
            .map(|i| {
                let b = 4 * n + 4 * i;
                [[values[b], values[b + 1]], [values[b + 2], values[b + 3]]]
            })
            .collect();
        CharState2D {
            x: pair(0),
            u: pair(2 * n),
            mat,
            m: self.m.clone(),
            t,
        }
    }

    fn time(&self) -> f64 {
        self.t
    }
}

/// Characteristics at the quadrature nodes of `density` with M = ∇u₀ from the analytic Jacobian.
pub fn init_characteristics(density: &DensityProfile, velocity: &VelocityProfile, n: usize, m0: f64) -> Result<CharState2D> {
    if !(m0 > 0.0 && m0.is_finite()) {
        return Err(FlockError::param("run.m0", format!("must be positive, got {m0}")));
    }
    let (x, m) = density.quadrature::<2>(n, m0)?;
    let unsupported = || FlockError::Unsupported("hydrodynamic runs need a velocity profile with an analytic Jacobian".into());
    let u = x
        .iter()
        .map(|p| velocity.value(p).ok_or_else(unsupported))
        .collect::<Result<Vec<_>>>()?;
    let mat = x
        .iter()
        .map(|p| velocity.jacobian(p).ok_or_else(unsupported))
        .collect::<Result<Vec<_>>>()?;
    Ok(CharState2D { x, u, mat, m, t: 0.0 })
}

/// Packed time derivative in the layout of [`OdeState::pack`].
pub fn rhs_2d(state: &CharState2D, kernel: &KernelSpec, potential: &PotentialSpec) -> Result<Vec<f64>> {
    if !state.within_caps() {
        return Err(FlockError::BlowUp {
            t_lo: state.t,
            t_hi: state.t,
        });
    }
    let n = state.len();
    let sums = pair_sums(&state.x, &state.u, &state.m, &kernel.compile(), true);
    let r = sums.gradient_forcing.expect("requested");
    let mut out = vec![0.0; 8 * n];
    for i in 0..n {
        let g = potential.gradient(&state.x[i]);
        let h = potential.hessian_diag(&state.x[i]);
        let mm = &state.mat[i];
        for k in 0..2 {
            out[2 * i + k] = state.u[i][k];
            out[2 * n + 2 * i + k] = sums.force[i][k] - g[k];
            for l in 0..2 {
                let sq = mm[k][0] * mm[0][l] + mm[k][1] * mm[1][l];
                let hess = if k == l { h[k] } else { 0.0 };
                out[4 * n + 4 * i + 2 * k + l] = -sq - sums.conv[i] * mm[k][l] + r[i][k][l] - hess;
            }
        }
    }
    if out.iter().any(|v| !v.is_finite()) {
        return Err(FlockError::BlowUp {
            t_lo: state.t,
            t_hi: state.t,
        });
    }
    Ok(out)
}

/// One RK4 step; blow-up inside any stage is reported as `[t, t + dt]`.
pub fn step(state: &CharState2D, kernel: &KernelSpec, potential: &PotentialSpec, dt: f64) -> Result<CharState2D> {
    let bracket = FlockError::BlowUp {
        t_lo: state.t,
        t_hi: state.t + dt,
    };
    let next = rk4::step(state, dt, |s| rhs_2d(s, kernel, potential)).map_err(|e| match e {
        FlockError::BlowUp { .. } => bracket.clone(),
        other => other,
    })?;
    if !next.within_caps() {
        return Err(bracket);
    }
    Ok(next)
}

/// Subcritical test under quadratic confinement U = a|x|²/2.
#[allow(clippy::too_many_arguments)]
pub fn classify_2d_quadratic(
    a: f64,
    m0: f64,
    phi_minus: f64,
    phi_plus: f64,
    dphi_inf: f64,
    eta_s0_max: f64,
    delta_einf0: f64,
    e0_min: f64,
) -> ThresholdReport2D {
    let lam = lambda(a, m0, phi_minus, phi_plus);
    let cinf = c_inf(a, m0, phi_minus, phi_plus, lam);
    let cs = c_star(lam, m0, dphi_inf, cinf);
    let eta_bound = eta_s0_max + cs * delta_einf0.sqrt();
    let c1_squared = (m0 * phi_minus).powi(2) - eta_bound.powi(2) - 4.0 * a;
    let verdict = if c1_squared > 0.0 && e0_min >= 0.0 {
        Verdict2D::SubcriticalQuadratic
    } else {
        Verdict2D::NotSubcritical
    };
    ThresholdReport2D {
        verdict,
        constants: Constants2D::Quadratic {
            lambda: lam,
            c_inf: cinf,
            c_star: cs,
            c1_squared,
        },
        margins: vec![
            Margin {
                name: "c1_squared_positive",
                value: c1_squared,
            },
            Margin {
                name: "e0_min_nonnegative",
                value: e0_min,
            },
        ],
        eta_s_bound: Some(eta_bound),
    }
}

/// Subcritical test under general convex confinement a·I ≤ ∇²U ≤ A·I.
#[allow(clippy::too_many_arguments)]
pub fn classify_2d_general(
    a_hi: f64,
    a: f64,
    m0: f64,
    phi_minus: f64,
    dphi_inf: f64,
    u_max: f64,
    eta_s0_max: f64,
    e0_min: f64,
) -> ThresholdReport2D {
    debug_assert!(a > 0.0 && a_hi >= a);
    let c_max = 8.0 * dphi_inf * m0 * u_max + 2.0 * a_hi;
    let c_a = (m0 * phi_minus).powi(2) / 2.0 - 2.0 * a_hi;
    let mut margins = vec![Margin {
        name: "c_max_below_c_a",
        value: c_a - c_max,
    }];
    let (c2, eta_s_max, subcritical) = if c_max < c_a {
        let root = (c_a * c_a - c_max * c_max).sqrt();
        let eta_cap = (c_a + root).sqrt();
        let c2 = (c_a - root).sqrt();
        margins.push(Margin {
            name: "eta_s0_within_bound",
            value: eta_cap - eta_s0_max,
        });
        margins.push(Margin {
            name: "e0_min_above_c2",
            value: e0_min - c2,
        });
        let ok = eta_s0_max <= eta_cap && e0_min > c2;
        (Some(c2), Some(eta_s0_max.max(c_max / c2)), ok)
    } else {
        (None, None, false)
    };
    ThresholdReport2D {
        verdict: if subcritical {
            Verdict2D::SubcriticalGeneral
        } else {
            Verdict2D::NotSubcritical
        },
        constants: Constants2D::General { c_max, c_a, c2, eta_s_max },
        margins,
        eta_s_bound: eta_s_max,
    }
}
