//! Deterministic initial data from a config. All randomness comes from one
//! ChaCha stream keyed by `run.seed`, drawn in fixed index order.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::config::{ExperimentConfig, InitialSpec, PositionKind, VelocityKind};
use crate::error::{FlockError, Result};
use crate::hydro1d::{self, CharState1D};
use crate::hydro2d::{self, CharState2D};
use crate::particles::Ensemble;
use crate::profiles::{DensityProfile, Mode, VelocityProfile};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn density_profile(ini: &InitialSpec) -> DensityProfile {
    match ini.positions {
        PositionKind::Uniform => DensityProfile::Uniform {
            half_width: ini.half_width,
        },
        PositionKind::Bump => DensityProfile::Bump {
            half_width: ini.half_width,
        },
    }
}

/// Velocity profile of the config; `modes` draws its coefficients from `rng`.
pub fn velocity_profile(ini: &InitialSpec, rng: &mut ChaCha8Rng) -> VelocityProfile {
    let s = ini.amplitude;
    match ini.velocity {
        VelocityKind::Linear => VelocityProfile::Linear {
            gradient: ini.gradient.unwrap_or([[s, 0.0], [0.0, s]]),
        },
        VelocityKind::Sinusoidal => VelocityProfile::Sinusoidal { amplitude: s },
        VelocityKind::Random => VelocityProfile::Random { amplitude: s },
        VelocityKind::Modes => VelocityProfile::Modes {
            modes: (1..=ini.modes)
                .map(|j| {
                    let amplitude = s * rng.gen_range(-1.0..1.0) / j as f64;
                    let phase = rng.gen_range(0.0..2.0 * PI);
                    Mode {
                        wavenumber: j as f64,
                        amplitude,
                        phase,
                    }
                })
                .collect(),
        },
    }
}

fn shift_of<const D: usize>(v: &[f64]) -> [f64; D] {
    std::array::from_fn(|k| v.get(k).copied().unwrap_or(0.0))
}

/// Particle ensemble: `uniform` positions are iid on `[−L, L]^d` with equal masses,
/// `bump` positions are the weighted quadrature grid. Recentering precedes the shifts.
pub fn initial_ensemble<const D: usize>(cfg: &ExperimentConfig) -> Result<Ensemble<D>> {
    let ini = &cfg.initial;
    let mut rng = rng(cfg.seed);
    let l = ini.half_width;
    let (x, m): (Vec<[f64; D]>, Vec<f64>) = match ini.positions {
        PositionKind::Uniform => {
            let x = (0..cfg.n).map(|_| std::array::from_fn(|_| rng.gen_range(-l..l))).collect();
            (x, vec![cfg.m0 / cfg.n as f64; cfg.n])
        }
        PositionKind::Bump => density_profile(ini).quadrature::<D>(cfg.n, cfg.m0)?,
    };
    let profile = velocity_profile(ini, &mut rng);
    let u = x
        .iter()
        .map(|p| match &profile {
            VelocityProfile::Random { amplitude } => {
                let s = amplitude.abs();
                if s > 0.0 {
                    std::array::from_fn(|_| rng.gen_range(-s..s))
                } else {
                    [0.0; D]
                }
            }
            other => other.value(p).expect("analytic profile"),
        })
        .collect();
    let mut ens = Ensemble::new(x, u, m)?;
    if ini.recenter {
        ens = ens.recenter();
    }
    let (xs, us) = (shift_of::<D>(&ini.x_shift), shift_of::<D>(&ini.u_shift));
    for i in 0..ens.len() {
        for k in 0..D {
            ens.x[i][k] += xs[k];
            ens.u[i][k] += us[k];
        }
    }
    Ok(ens)
}

fn hydro_profiles(cfg: &ExperimentConfig) -> Result<(DensityProfile, VelocityProfile)> {
    let mut rng = rng(cfg.seed);
    let v = velocity_profile(&cfg.initial, &mut rng);
    if matches!(v, VelocityProfile::Random { .. }) {
        return Err(FlockError::config(
            "initial.velocity",
            "hydrodynamic modes need an analytic velocity profile",
        ));
    }
    Ok((density_profile(&cfg.initial), v))
}

pub fn initial_characteristics_1d(cfg: &ExperimentConfig) -> Result<CharState1D> {
    let (density, velocity) = hydro_profiles(cfg)?;
    let mut s = hydro1d::init_characteristics(&density, &velocity, cfg.n, cfg.m0, &cfg.kernel)?;
    let (xs, us) = (shift_of::<1>(&cfg.initial.x_shift), shift_of::<1>(&cfg.initial.u_shift));
    for i in 0..s.len() {
        s.x[i] += xs[0];
        s.u[i] += us[0];
    }
    Ok(s)
}

pub fn initial_characteristics_2d(cfg: &ExperimentConfig) -> Result<CharState2D> {
    let (density, velocity) = hydro_profiles(cfg)?;
    let mut s = hydro2d::init_characteristics(&density, &velocity, cfg.n, cfg.m0)?;
    let (xs, us) = (shift_of::<2>(&cfg.initial.x_shift), shift_of::<2>(&cfg.initial.u_shift));
    for i in 0..s.len() {
        for k in 0..2 {
            s.x[i][k] += xs[k];
            s.u[i][k] += us[k];
        }
    }
    Ok(s)
}
