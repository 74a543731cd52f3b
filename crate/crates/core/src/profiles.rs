//! Analytic initial profiles: density shapes on `[−L, L]^d` and velocity fields
//! with closed-form Jacobians.

use std::f64::consts::PI;

use crate::error::{FlockError, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DensityProfile {
    /// Constant density on the cube `[−L, L]^d`.
    Uniform { half_width: f64 },
    /// ρ₀(x) = Z·max(0, 1 − |x|²/L²)², Z fixed by the total mass.
    Bump { half_width: f64 },
}

/// One Fourier component `amplitude·sin(wavenumber·x_k + phase)` of a velocity field.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Mode {
    pub wavenumber: f64,
    pub amplitude: f64,
    pub phase: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub enum VelocityProfile {
    /// u(x) = G·x; in 1D only `G[0][0]` is used.
    Linear { gradient: [[f64; 2]; 2] },
    /// u_k(x) = s·sin(x_k).
    Sinusoidal { amplitude: f64 },
    /// u_k(x) = Σ modes evaluated at x_k.
    Modes { modes: Vec<Mode> },
    /// iid uniform in `[−s, s]^d`; no Jacobian, particle runs only.
    Random { amplitude: f64 },
}

impl DensityProfile {
    pub fn half_width(&self) -> f64 {
        match self {
            DensityProfile::Uniform { half_width } | DensityProfile::Bump { half_width } => *half_width,
        }
    }

    fn validate(&self) -> Result<()> {
        let l = self.half_width();
        if !(l > 0.0 && l.is_finite()) {
            return Err(FlockError::param("initial.half_width", format!("must be positive, got {l}")));
        }
        Ok(())
    }

    fn shape<const D: usize>(&self, x: &[f64; D]) -> f64 {
        let l = self.half_width();
        match self {
            DensityProfile::Uniform { .. } => {
                if x.iter().all(|v| v.abs() <= l) {
                    1.0
                } else {
                    0.0
                }
            }
            DensityProfile::Bump { .. } => {
                let s = 1.0 - x.iter().map(|v| v * v).sum::<f64>() / (l * l);
                if s > 0.0 {
                    s * s
                } else {
                    0.0
                }
            }
        }
    }

    /// ∫ of the unnormalised shape over ℝ^d.
    fn shape_integral(&self, d: usize) -> Result<f64> {
        let l = self.half_width();
        match (self, d) {
            (DensityProfile::Uniform { .. }, _) => Ok((2.0 * l).powi(d as i32)),
            (DensityProfile::Bump { .. }, 1) => Ok(16.0 * l / 15.0),
            (DensityProfile::Bump { .. }, 2) => Ok(PI * l * l / 3.0),
            _ => Err(FlockError::Unsupported(format!("bump density in dimension {d}"))),
        }
    }

    /// Density value ρ₀(x) normalised to total mass `m0`.
    pub fn density<const D: usize>(&self, x: &[f64; D], m0: f64) -> Result<f64> {
        Ok(m0 * self.shape(x) / self.shape_integral(D)?)
    }

    /// Cell-centred quadrature nodes and weights normalised to `m0`. In 2D the grid is
    /// `k × k` with `k = round(√n)`; nodes outside the support are dropped.
    pub fn quadrature<const D: usize>(&self, n: usize, m0: f64) -> Result<(Vec<[f64; D]>, Vec<f64>)> {
        self.validate()?;
        if n == 0 {
            return Err(FlockError::param("run.N", "must be at least 1"));
        }
        let l = self.half_width();
        let per_axis = match D {
            1 => n,
            2 => ((n as f64).sqrt().round() as usize).max(1),
            _ => return Err(FlockError::Unsupported(format!("quadrature in dimension {D}"))),
        };
        let h = 2.0 * l / per_axis as f64;
        let total = per_axis.pow(D as u32);
        let mut nodes = Vec::with_capacity(total);
        let mut weights = Vec::with_capacity(total);
        for idx in 0..total {
            let mut rem = idx;
            let x: [f64; D] = std::array::from_fn(|_| {
                let c = rem % per_axis;
                rem /= per_axis;
                -l + (c as f64 + 0.5) * h
            });
            let w = self.shape(&x);
            if w > 0.0 {
                nodes.push(x);
                weights.push(w);
            }
        }
        let sum: f64 = weights.iter().sum();
        if !(sum > 0.0) {
            return Err(FlockError::param("initial", "density profile has zero total mass"));
        }
        for w in &mut weights {
            *w *= m0 / sum;
        }
        Ok((nodes, weights))
    }
}

impl VelocityProfile {
    pub fn linear_1d(slope: f64) -> Self {
        VelocityProfile::Linear {
            gradient: [[slope, 0.0], [0.0, slope]],
        }
    }

    pub fn value<const D: usize>(&self, x: &[f64; D]) -> Option<[f64; D]> {
        match self {
            VelocityProfile::Linear { gradient } => Some(std::array::from_fn(|k| (0..D).map(|l| gradient[k][l] * x[l]).sum())),
            VelocityProfile::Sinusoidal { amplitude } => Some(std::array::from_fn(|k| amplitude * x[k].sin())),
            VelocityProfile::Modes { modes } => Some(std::array::from_fn(|k| {
                modes.iter().map(|m| m.amplitude * (m.wavenumber * x[k] + m.phase).sin()).sum()
            })),
            VelocityProfile::Random { .. } => None,
        }
    }

    /// ∂u_k/∂x_l at x.
    pub fn jacobian<const D: usize>(&self, x: &[f64; D]) -> Option<[[f64; D]; D]> {
        let mut j = [[0.0; D]; D];
        match self {
            VelocityProfile::Linear { gradient } => {
                for k in 0..D {
                    for l in 0..D {
                        j[k][l] = gradient[k][l];
                    }
                }
            }
            VelocityProfile::Sinusoidal { amplitude } => {
                for k in 0..D {
                    j[k][k] = amplitude * x[k].cos();
                }
            }
            VelocityProfile::Modes { modes } => {
                for k in 0..D {
                    j[k][k] = modes
                        .iter()
                        .map(|m| m.amplitude * m.wavenumber * (m.wavenumber * x[k] + m.phase).cos())
                        .sum();
                }
            }
            VelocityProfile::Random { .. } => return None,
        }
        Some(j)
    }
}
