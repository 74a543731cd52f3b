//! Agent-based alignment dynamics with an external potential.
//!
//! The coupling is mass weighted, `duᵢ = Σⱼ mⱼ φ(|xᵢ − xⱼ|)(uⱼ − uᵢ) − ∇U(xᵢ)`, so an
//! ensemble is at the same time a Lagrangian quadrature of a density with total
//! mass `m₀ = Σ mᵢ`. Equal masses `1/N` recover the classical `1/N` normalisation.

use crate::error::{FlockError, Result};
use crate::kernel::KernelSpec;
use crate::pairwise::pair_sums;
use crate::potential::PotentialSpec;
use crate::rk4::{self, OdeState};

/// Positions or velocities beyond this magnitude count as blow-up.
pub const STATE_CAP: f64 = 1e9;

#[derive(Debug, Clone, PartialEq)]
pub struct Ensemble<const D: usize> {
    pub x: Vec<[f64; D]>,
    pub u: Vec<[f64; D]>,
    pub m: Vec<f64>,
    pub t: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Means<const D: usize> {
    pub x_c: [f64; D],
    pub u_c: [f64; D],
}

/// Time derivative of an ensemble.
#[derive(Debug, Clone, PartialEq)]
pub struct Rate<const D: usize> {
    pub dx: Vec<[f64; D]>,
    pub du: Vec<[f64; D]>,
}

impl<const D: usize> Ensemble<D> {
    pub fn new(x: Vec<[f64; D]>, u: Vec<[f64; D]>, m: Vec<f64>) -> Result<Self> {
        if x.is_empty() {
            return Err(FlockError::param("N", "ensemble needs at least one particle"));
        }
        if x.len() != u.len() || x.len() != m.len() {
            return Err(FlockError::param("N", "x, u and m must have equal length"));
        }
        if m.iter().any(|&mi| !(mi > 0.0 && mi.is_finite())) {
            return Err(FlockError::param("m", "masses must be positive and finite"));
        }
        if x.iter().chain(u.iter()).flatten().any(|v| !v.is_finite()) {
            return Err(FlockError::param("state", "coordinates must be finite"));
        }
        Ok(Ensemble { x, u, m, t: 0.0 })
    }

    pub fn len(&self) -> usize {
        self.x.len()
    }

    pub fn is_empty(&self) -> bool {
        self.x.is_empty()
    }

    pub fn total_mass(&self) -> f64 {
        self.m.iter().sum()
    }

    pub fn means(&self) -> Means<D> {
        let m0 = self.total_mass();
        let mut x_c = [0.0; D];
        let mut u_c = [0.0; D];
        for i in 0..self.len() {
            for k in 0..D {
                x_c[k] += self.m[i] * self.x[i][k];
                u_c[k] += self.m[i] * self.u[i][k];
            }
        }
        for k in 0..D {
            x_c[k] /= m0;
            u_c[k] /= m0;
        }
        Means { x_c, u_c }
    }

    /// Galilean shift to zero mean position and velocity.
    pub fn recenter(&self) -> Self {
        let Means { x_c, u_c } = self.means();
        let mut out = self.clone();
        for i in 0..out.len() {
            for k in 0..D {
                out.x[i][k] -= x_c[k];
                out.u[i][k] -= u_c[k];
            }
        }
        out
    }

    fn check_finite_and_capped(&self) -> bool {
        self.x
            .iter()
            .chain(self.u.iter())
            .flatten()
            .all(|v| v.is_finite() && v.abs() <= STATE_CAP)
    }
}

impl<const D: usize> OdeState for Ensemble<D> {
    fn pack(&self) -> Vec<f64> {
        let mut v = Vec::with_capacity(2 * D * self.len());
        v.extend(self.x.iter().flatten());
        v.extend(self.u.iter().flatten());
        v
    }

    fn unpack(&self, values: &[f64], t: f64) -> Self {
        let n = self.len();
        let block = |off: usize| -> Vec<[f64; D]> { (0..n).map(|i| std::array::from_fn(|k| values[off + i * D + k])).collect() };
        Ensemble {
            x: block(0),
            u: block(n * D),
            m: self.m.clone(),
            t,
        }
    }

    fn time(&self) -> f64 {
        self.t
    }
}

impl<const D: usize> Rate<D> {
    fn pack(&self) -> Vec<f64> {
        let mut v = Vec::with_capacity(2 * D * self.dx.len());
        v.extend(self.dx.iter().flatten());
        v.extend(self.du.iter().flatten());
        v
    }

    fn is_finite(&self) -> bool {
        self.dx.iter().chain(self.du.iter()).flatten().all(|v| v.is_finite())
    }
}

fn blowup_at(t: f64) -> FlockError {
    FlockError::BlowUp { t_lo: t, t_hi: t }
}

/// Right-hand side with external potential forcing.
pub fn rhs<const D: usize>(ens: &Ensemble<D>, kernel: &KernelSpec, potential: &PotentialSpec) -> Result<Rate<D>> {
    if !ens.check_finite_and_capped() {
        return Err(blowup_at(ens.t));
    }
    let sums = pair_sums(&ens.x, &ens.u, &ens.m, &kernel.compile(), false);
    let du = sums
        .force
        .iter()
        .zip(&ens.x)
        .map(|(f, xi)| {
            let g = potential.gradient(xi);
            std::array::from_fn(|k| f[k] - g[k])
        })
        .collect();
    let rate = Rate { dx: ens.u.clone(), du };
    if !rate.is_finite() {
        return Err(blowup_at(ens.t));
    }
    Ok(rate)
}

/// Right-hand side where quadratic confinement acts as the pairwise attraction
/// `(a/m₀) Σⱼ mⱼ (xᵢ − xⱼ)`; momentum is conserved.
pub fn rhs_pairwise<const D: usize>(ens: &Ensemble<D>, kernel: &KernelSpec, a: f64) -> Result<Rate<D>> {
    if !ens.check_finite_and_capped() {
        return Err(blowup_at(ens.t));
    }
    let sums = pair_sums(&ens.x, &ens.u, &ens.m, &kernel.compile(), false);
    let m0 = ens.total_mass();
    let mut first_moment = [0.0; D];
    for (xi, mi) in ens.x.iter().zip(&ens.m) {
        for k in 0..D {
            first_moment[k] += mi * xi[k];
        }
    }
    let du = sums
        .force
        .iter()
        .zip(&ens.x)
        .map(|(f, xi)| std::array::from_fn(|k| f[k] - a / m0 * (m0 * xi[k] - first_moment[k])))
        .collect();
    let rate = Rate { dx: ens.u.clone(), du };
    if !rate.is_finite() {
        return Err(blowup_at(ens.t));
    }
    Ok(rate)
}

fn advance<const D: usize, F>(ens: &Ensemble<D>, dt: f64, f: F) -> Result<Ensemble<D>>
where
    F: Fn(&Ensemble<D>) -> Result<Rate<D>>,
{
    let bracket = |e: FlockError| match e {
        FlockError::BlowUp { .. } => FlockError::BlowUp {
            t_lo: ens.t,
            t_hi: ens.t + dt,
        },
        other => other,
    };
    let next = rk4::step(ens, dt, |s| f(s).map(|r| r.pack())).map_err(bracket)?;
    if !next.check_finite_and_capped() {
        return Err(FlockError::BlowUp { t_lo: ens.t, t_hi: next.t });
    }
    Ok(next)
}

/// One RK4 step of the potential-forced system.
pub fn step_rk4<const D: usize>(ens: &Ensemble<D>, kernel: &KernelSpec, potential: &PotentialSpec, dt: f64) -> Result<Ensemble<D>> {
    advance(ens, dt, |s| rhs(s, kernel, potential))
}

/// One RK4 step of the pairwise-attraction system.
pub fn step_rk4_pairwise<const D: usize>(ens: &Ensemble<D>, kernel: &KernelSpec, a: f64, dt: f64) -> Result<Ensemble<D>> {
    advance(ens, dt, |s| rhs_pairwise(s, kernel, a))
}

/// Closed-form harmonic-oscillator means for quadratic confinement `a`.
pub fn harmonic_means<const D: usize>(initial: &Means<D>, a: f64, t: f64) -> Means<D> {
    let w = a.sqrt();
    let (s, c) = (w * t).sin_cos();
    Means {
        x_c: std::array::from_fn(|k| initial.x_c[k] * c + initial.u_c[k] / w * s),
        u_c: std::array::from_fn(|k| -initial.x_c[k] * w * s + initial.u_c[k] * c),
    }
}
