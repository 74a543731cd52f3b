//! Interaction kernels φ(r) and their analytic bounds.
//!
//! Every family is a closed form, so tail classification is decidable and the
//! bounds reported by [`KernelSpec::bounds`] are exact rather than sampled.

use crate::error::{FlockError, Result};

/// Radially symmetric alignment kernel.
#[derive(Debug, Clone, PartialEq)]
pub enum KernelSpec {
    /// φ(r) = c₀ (1 + r²)^(−β).
    PowerLaw { c0: f64, beta: f64 },
    /// φ(r) = K̄.
    Constant { k: f64 },
    /// φ_α(r) = max(inner(r), α): the lower-bounded surrogate of an admissible kernel.
    FloorClipped { inner: Box<KernelSpec>, alpha: f64 },
}

/// Tail behaviour of a kernel at infinity.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
pub struct TailClass {
    /// ∫₀^∞ φ(r) dr = ∞.
    pub fat_tail: bool,
    /// ∫^∞ r φ(r) dr = ∞; admissible under quadratic confinement.
    pub thin_tail_admissible: bool,
    /// limsup r φ(r) = ∞; admissible for general convex confinement.
    pub limsup_admissible: bool,
}

/// Exact bounds of a kernel on a range `[0, D]`.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct KernelBounds {
    pub phi_minus: f64,
    pub phi_plus: f64,
    /// sup over `[0, ∞)` of |φ′|.
    pub dphi_inf: f64,
}

impl KernelSpec {
    pub fn power_law(c0: f64, beta: f64) -> Result<Self> {
        if !(c0 > 0.0 && c0.is_finite()) {
            return Err(FlockError::param("kernel.c0", format!("must be positive, got {c0}")));
        }
        if !(beta >= 0.0 && beta.is_finite()) {
            return Err(FlockError::param("kernel.beta", format!("must be nonnegative, got {beta}")));
        }
        Ok(KernelSpec::PowerLaw { c0, beta })
    }

    pub fn constant(k: f64) -> Result<Self> {
        if !(k > 0.0 && k.is_finite()) {
            return Err(FlockError::param("kernel.K", format!("must be positive, got {k}")));
        }
        Ok(KernelSpec::Constant { k })
    }

    pub fn floor_clipped(inner: KernelSpec, alpha: f64) -> Result<Self> {
        if !(alpha > 0.0 && alpha.is_finite()) {
            return Err(FlockError::param("kernel.alpha", format!("must be positive, got {alpha}")));
        }
        Ok(KernelSpec::FloorClipped {
            inner: Box::new(inner),
            alpha,
        })
    }

    pub fn eval(&self, r: f64) -> f64 {
        self.eval_sq(r * r)
    }

    /// φ evaluated from the squared distance.
    pub fn eval_sq(&self, r2: f64) -> f64 {
        match self {
            KernelSpec::PowerLaw { c0, beta } => c0 * (1.0 + r2).powf(-beta),
            KernelSpec::Constant { k } => *k,
            KernelSpec::FloorClipped { inner, alpha } => inner.eval_sq(r2).max(*alpha),
        }
    }

    /// φ′(r), the radial derivative. Zero wherever the floor is active.
    pub fn derivative(&self, r: f64) -> f64 {
        match self {
            KernelSpec::PowerLaw { c0, beta } => -2.0 * c0 * beta * r * (1.0 + r * r).powf(-beta - 1.0),
            KernelSpec::Constant { .. } => 0.0,
            KernelSpec::FloorClipped { inner, alpha } => {
                if inner.eval(r) < *alpha {
                    0.0
                } else {
                    inner.derivative(r)
                }
            }
        }
    }

    /// φ(0).
    pub fn phi_plus(&self) -> f64 {
        self.eval_sq(0.0)
    }

    /// True when φ′ ≡ 0, so the convolutional forcing of the gradient dynamics vanishes.
    pub fn is_constant(&self) -> bool {
        match self {
            KernelSpec::PowerLaw { beta, .. } => *beta == 0.0,
            KernelSpec::Constant { .. } => true,
            KernelSpec::FloorClipped { inner, alpha } => inner.is_constant() || *alpha >= inner.phi_plus(),
        }
    }

    /// Tail classification. Floor-clipped kernels report a constant-like tail
    /// (all true), matching their use as a surrogate of an admissible kernel.
    pub fn classify_tail(&self) -> TailClass {
        match self {
            KernelSpec::PowerLaw { beta, .. } => TailClass {
                fat_tail: *beta <= 0.5,
                thin_tail_admissible: *beta <= 1.0,
                limsup_admissible: *beta < 0.5,
            },
            KernelSpec::Constant { .. } | KernelSpec::FloorClipped { .. } => TailClass {
                fat_tail: true,
                thin_tail_admissible: true,
                limsup_admissible: true,
            },
        }
    }

    /// (φ₋, φ₊, |φ′|_∞) on `[0, d]`; φ₋ = φ(d) by monotonicity.
    pub fn bounds(&self, d: f64) -> Result<KernelBounds> {
        if !(d >= 0.0) {
            return Err(FlockError::param("D", format!("must be nonnegative, got {d}")));
        }
        Ok(KernelBounds {
            phi_minus: self.eval(d),
            phi_plus: self.phi_plus(),
            dphi_inf: self.dphi_sup(),
        })
    }

    fn dphi_sup(&self) -> f64 {
        match self {
            KernelSpec::PowerLaw { .. } | KernelSpec::Constant { .. } => {
                let r = self.dphi_argmax();
                self.derivative(r).abs()
            }
            KernelSpec::FloorClipped { inner, alpha } => {
                // |inner′| increases on [0, r_m]; the floor removes everything past
                // the crossing r* where inner(r*) = α.
                let r_m = inner.dphi_argmax();
                if inner.eval(r_m) >= *alpha {
                    inner.dphi_sup()
                } else {
                    match inner.crossing_radius(*alpha) {
                        Some(r_star) => inner.derivative(r_star).abs(),
                        None => 0.0,
                    }
                }
            }
        }
    }

    fn dphi_argmax(&self) -> f64 {
        match self {
            // d/dr [r (1+r²)^(−β−1)] = 0  ⇔  r² = 1/(2β+1)
            KernelSpec::PowerLaw { beta, .. } => (1.0 / (2.0 * beta + 1.0)).sqrt(),
            KernelSpec::Constant { .. } => 0.0,
            KernelSpec::FloorClipped { inner, .. } => inner.dphi_argmax(),
        }
    }

    /// Radius where φ(r) = level, when it exists.
    fn crossing_radius(&self, level: f64) -> Option<f64> {
        match self {
            KernelSpec::PowerLaw { c0, beta } if *beta > 0.0 && level > 0.0 && level < *c0 => {
                let r2 = (c0 / level).powf(1.0 / beta) - 1.0;
                Some(r2.max(0.0).sqrt())
            }
            KernelSpec::FloorClipped { inner, .. } => inner.crossing_radius(level),
            _ => None,
        }
    }

    /// Lower-bounded surrogate φ_α with α = φ(r₀); `r0` comes from an a-priori diameter bound.
    pub fn floor_for_admissible(&self, r0: f64) -> Result<KernelSpec> {
        if !(r0 > 0.0 && r0.is_finite()) {
            return Err(FlockError::param("r0", format!("must be positive, got {r0}")));
        }
        KernelSpec::floor_clipped(self.clone(), self.eval(r0))
    }

    /// Lowers the spec to the form evaluated in the pairwise loops.
    pub fn compile(&self) -> CompiledKernel {
        match self {
            KernelSpec::PowerLaw { c0, beta } => CompiledKernel {
                base: Base::Power {
                    c0: *c0,
                    beta: *beta,
                    mode: PowMode::for_beta(*beta),
                },
                floor: 0.0,
            },
            KernelSpec::Constant { k } => CompiledKernel {
                base: Base::Constant(*k),
                floor: 0.0,
            },
            KernelSpec::FloorClipped { inner, alpha } => {
                let mut c = inner.compile();
                c.floor = c.floor.max(*alpha);
                c
            }
        }
    }
}

#[derive(Debug, Clone, Copy)]
enum PowMode {
    /// 4β is a small integer: (1+r²)^(−β) = (⁴√(1+r²))^(−4β) without `powf`.
    Quarter(i32),
    General,
}

impl PowMode {
    fn for_beta(beta: f64) -> Self {
        let q = 4.0 * beta;
        if q.fract() == 0.0 && q <= 64.0 {
            PowMode::Quarter(q as i32)
        } else {
            PowMode::General
        }
    }
}

#[derive(Debug, Clone, Copy)]
enum Base {
    Power { c0: f64, beta: f64, mode: PowMode },
    Constant(f64),
}

/// Evaluation form of a [`KernelSpec`] used inside O(N²) loops.
#[derive(Debug, Clone, Copy)]
pub struct CompiledKernel {
    base: Base,
    floor: f64,
}

impl CompiledKernel {
    #[inline]
    fn pow_neg(s: f64, beta: f64, mode: PowMode) -> f64 {
        match mode {
            PowMode::Quarter(q) => {
                if q % 4 == 0 {
                    s.powi(-q / 4)
                } else if q % 2 == 0 {
                    s.sqrt().powi(-q / 2)
                } else {
                    s.sqrt().sqrt().powi(-q)
                }
            }
            PowMode::General => s.powf(-beta),
        }
    }

    /// φ from the squared distance.
    #[inline]
    pub fn phi_sq(&self, r2: f64) -> f64 {
        let v = match self.base {
            Base::Power { c0, beta, mode } => c0 * Self::pow_neg(1.0 + r2, beta, mode),
            Base::Constant(k) => k,
        };
        v.max(self.floor)
    }

    /// (φ, g) with ∇φ(z) = g·z, i.e. g = φ′(r)/r, which stays finite at r = 0.
    #[inline]
    pub fn phi_and_grad_factor_sq(&self, r2: f64) -> (f64, f64) {
        match self.base {
            Base::Power { c0, beta, mode } => {
                let s = 1.0 + r2;
                let v = c0 * Self::pow_neg(s, beta, mode);
                if v < self.floor {
                    (self.floor, 0.0)
                } else {
                    // φ′(r)/r = −2β c₀ (1+r²)^(−β−1) = −2β φ / (1+r²)
                    (v, -2.0 * beta * v / s)
                }
            }
            Base::Constant(k) => (k.max(self.floor), 0.0),
        }
    }

    pub fn is_constant(&self) -> bool {
        match self.base {
            Base::Power { beta, c0, .. } => beta == 0.0 || self.floor >= c0,
            Base::Constant(_) => true,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn power_law_values() {
        let k = KernelSpec::power_law(1.0, 1.0).unwrap();
        assert_eq!(k.eval(0.0), 1.0);
        assert_eq!(k.eval(1.0), 0.5);
        let f = KernelSpec::floor_clipped(k, 0.3).unwrap();
        assert_eq!(f.eval(2.0), 0.3);
    }

    #[test]
    fn tail_classes() {
        let c = |b| KernelSpec::power_law(1.0, b).unwrap().classify_tail();
        assert_eq!(
            c(0.4),
            TailClass {
                fat_tail: true,
                thin_tail_admissible: true,
                limsup_admissible: true
            }
        );
        assert_eq!(
            c(1.0),
            TailClass {
                fat_tail: false,
                thin_tail_admissible: true,
                limsup_admissible: false
            }
        );
        assert_eq!(
            c(1.5),
            TailClass {
                fat_tail: false,
                thin_tail_admissible: false,
                limsup_admissible: false
            }
        );
        // boundary: β = 1/2 is fat (≤) but not limsup-admissible (<)
        assert_eq!(
            c(0.5),
            TailClass {
                fat_tail: true,
                thin_tail_admissible: true,
                limsup_admissible: false
            }
        );
        let fc = KernelSpec::floor_clipped(KernelSpec::power_law(1.0, 3.0).unwrap(), 0.1).unwrap();
        assert!(fc.classify_tail().fat_tail && fc.classify_tail().limsup_admissible);
    }

    #[test]
    fn tail_fat_implies_thin() {
        for i in 0..=40 {
            let t = KernelSpec::power_law(1.0, i as f64 * 0.05).unwrap().classify_tail();
            assert!(!t.fat_tail || t.thin_tail_admissible);
        }
    }

    #[test]
    fn bounds_examples() {
        // max of 2r/(1+r²)² sits at r = 1/√3 and equals (2/√3)(9/16)
        let oracle = 2.0 / 3f64.sqrt() * 9.0 / 16.0;
        let b = KernelSpec::power_law(1.0, 1.0).unwrap().bounds(2.0).unwrap();
        assert_abs_diff_eq!(b.phi_minus, 0.2, epsilon = 1e-15);
        assert_eq!(b.phi_plus, 1.0);
        assert_abs_diff_eq!(b.dphi_inf, oracle, epsilon = 1e-12);
        assert_abs_diff_eq!(b.dphi_inf, 0.6495, epsilon = 1e-4);

        let b = KernelSpec::constant(2.0).unwrap().bounds(10.0).unwrap();
        assert_eq!((b.phi_minus, b.phi_plus, b.dphi_inf), (2.0, 2.0, 0.0));

        let f = KernelSpec::floor_clipped(KernelSpec::power_law(1.0, 1.0).unwrap(), 0.3).unwrap();
        let b = f.bounds(5.0).unwrap();
        assert_eq!(b.phi_minus, 0.3);
        assert_eq!(b.phi_plus, 1.0);
        assert_abs_diff_eq!(b.dphi_inf, oracle, epsilon = 1e-12);
    }

    #[test]
    fn floor_past_argmax_limits_derivative() {
        // floor 0.9 clips at r* = 1/3 < 1/√3, where |φ′| is still increasing
        let inner = KernelSpec::power_law(1.0, 1.0).unwrap();
        let f = KernelSpec::floor_clipped(inner.clone(), 0.9).unwrap();
        let r_star = (1.0f64 / 0.9 - 1.0).sqrt();
        let b = f.bounds(1.0).unwrap();
        assert_abs_diff_eq!(b.dphi_inf, inner.derivative(r_star).abs(), epsilon = 1e-12);
    }

    #[test]
    fn floor_for_admissible_examples() {
        let k = KernelSpec::power_law(1.0, 1.0).unwrap();
        match k.floor_for_admissible(3.0).unwrap() {
            KernelSpec::FloorClipped { alpha, .. } => assert_abs_diff_eq!(alpha, 0.1, epsilon = 1e-15),
            other => panic!("unexpected {other:?}"),
        }
        let c = KernelSpec::constant(2.5).unwrap();
        let fc = c.floor_for_admissible(7.0).unwrap();
        for r in [0.0, 1.0, 100.0] {
            assert_eq!(fc.eval(r), c.eval(r));
        }
        assert!(KernelSpec::power_law(1.0, 0.5).unwrap().floor_for_admissible(0.0).is_err());
    }

    #[test]
    fn rejects_bad_parameters() {
        assert!(KernelSpec::power_law(0.0, 1.0).is_err());
        assert!(KernelSpec::power_law(1.0, -0.1).is_err());
        assert!(KernelSpec::constant(-1.0).is_err());
        assert!(KernelSpec::floor_clipped(KernelSpec::constant(1.0).unwrap(), 0.0).is_err());
    }

    #[test]
    fn compiled_matches_spec() {
        let specs = [
            KernelSpec::power_law(1.3, 1.0).unwrap(),
            KernelSpec::power_law(2.0, 0.25).unwrap(),
            KernelSpec::power_law(0.7, 0.75).unwrap(),
            KernelSpec::power_law(1.0, 0.3).unwrap(),
            KernelSpec::constant(2.0).unwrap(),
            KernelSpec::floor_clipped(KernelSpec::power_law(1.0, 1.0).unwrap(), 0.3).unwrap(),
        ];
        for k in &specs {
            let c = k.compile();
            for i in 0..200 {
                let r = i as f64 * 0.037;
                let (phi, g) = c.phi_and_grad_factor_sq(r * r);
                assert_abs_diff_eq!(c.phi_sq(r * r), k.eval(r), epsilon = 1e-14);
                assert_abs_diff_eq!(phi, k.eval(r), epsilon = 1e-14);
                if r > 0.0 {
                    assert_abs_diff_eq!(g * r, k.derivative(r), epsilon = 1e-13);
                }
            }
        }
    }
}
