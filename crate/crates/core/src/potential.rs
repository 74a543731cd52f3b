//! External potentials U(x) with value, gradient and Hessian.

use crate::error::{FlockError, Result};

#[derive(Debug, Clone, PartialEq)]
pub enum PotentialSpec {
    /// U(x) = a|x|²/2.
    Quadratic {
        a: f64,
    },
    /// U(x) = a|x|²/2 + ε Σᵢ (1 − cos κxᵢ)/κ²; Hessian diag(a + ε cos κxᵢ).
    PerturbedQuadratic {
        a: f64,
        eps: f64,
        kappa: f64,
    },
    Zero,
}

/// Value, gradient and Hessian of U at one point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PotentialEval<const D: usize> {
    pub value: f64,
    pub grad: [f64; D],
    pub hess: [[f64; D]; D],
}

impl PotentialSpec {
    pub fn quadratic(a: f64) -> Result<Self> {
        if !(a > 0.0 && a.is_finite()) {
            return Err(FlockError::param("potential.a", format!("must be positive, got {a}")));
        }
        Ok(PotentialSpec::Quadratic { a })
    }

    pub fn perturbed_quadratic(a: f64, eps: f64, kappa: f64) -> Result<Self> {
        if !(a > 0.0 && a.is_finite()) {
            return Err(FlockError::param("potential.a", format!("must be positive, got {a}")));
        }
        if !(eps.abs() < a) {
            return Err(FlockError::param("potential.eps", format!("need |eps| < a, got {eps}")));
        }
        if !(kappa > 0.0 && kappa.is_finite()) {
            return Err(FlockError::param("potential.kappa", format!("must be positive, got {kappa}")));
        }
        Ok(PotentialSpec::PerturbedQuadratic { a, eps, kappa })
    }

    /// Infimum of the Hessian eigenvalues.
    pub fn a_lo(&self) -> f64 {
        match self {
            PotentialSpec::Quadratic { a } => *a,
            PotentialSpec::PerturbedQuadratic { a, eps, .. } => a - eps.abs(),
            PotentialSpec::Zero => 0.0,
        }
    }

    /// Supremum of the Hessian eigenvalues.
    pub fn a_hi(&self) -> f64 {
        match self {
            PotentialSpec::Quadratic { a } => *a,
            PotentialSpec::PerturbedQuadratic { a, eps, .. } => a + eps.abs(),
            PotentialSpec::Zero => 0.0,
        }
    }

    /// Coefficient a of a purely quadratic potential.
    pub fn quadratic_coefficient(&self) -> Option<f64> {
        match self {
            PotentialSpec::Quadratic { a } => Some(*a),
            _ => None,
        }
    }

    pub fn value<const D: usize>(&self, x: &[f64; D]) -> f64 {
        match self {
            PotentialSpec::Quadratic { a } => 0.5 * a * norm_sq(x),
            PotentialSpec::PerturbedQuadratic { a, eps, kappa } => {
                let ripple: f64 = x.iter().map(|&xi| 1.0 - (kappa * xi).cos()).sum();
                0.5 * a * norm_sq(x) + eps * ripple / (kappa * kappa)
            }
            PotentialSpec::Zero => 0.0,
        }
    }

    #[inline]
    pub fn gradient<const D: usize>(&self, x: &[f64; D]) -> [f64; D] {
        let mut g = [0.0; D];
        match self {
            PotentialSpec::Quadratic { a } => {
                for k in 0..D {
                    g[k] = a * x[k];
                }
            }
            PotentialSpec::PerturbedQuadratic { a, eps, kappa } => {
                for k in 0..D {
                    g[k] = a * x[k] + eps * (kappa * x[k]).sin() / kappa;
                }
            }
            PotentialSpec::Zero => {}
        }
        g
    }

    /// Diagonal of the Hessian; every family here has a diagonal Hessian.
    #[inline]
    pub fn hessian_diag<const D: usize>(&self, x: &[f64; D]) -> [f64; D] {
        let mut h = [0.0; D];
        match self {
            PotentialSpec::Quadratic { a } => h = [*a; D],
            PotentialSpec::PerturbedQuadratic { a, eps, kappa } => {
                for k in 0..D {
                    h[k] = a + eps * (kappa * x[k]).cos();
                }
            }
            PotentialSpec::Zero => {}
        }
        h
    }

    pub fn eval<const D: usize>(&self, x: &[f64; D]) -> PotentialEval<D> {
        let diag = self.hessian_diag(x);
        let mut hess = [[0.0; D]; D];
        for k in 0..D {
            hess[k][k] = diag[k];
        }
        PotentialEval {
            value: self.value(x),
            grad: self.gradient(x),
            hess,
        }
    }
}

#[inline]
pub(crate) fn norm_sq<const D: usize>(x: &[f64; D]) -> f64 {
    x.iter().map(|v| v * v).sum()
}
