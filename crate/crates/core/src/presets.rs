//! Named scenarios used by the acceptance checks and as config templates.

use crate::config::{ExperimentConfig, InitialSpec, Mode, PositionKind, VelocityKind, DEFAULT_E_THRESHOLD};
use crate::kernel::KernelSpec;
use crate::potential::PotentialSpec;

pub const NAMES: [&str; 9] = [
    "quadratic-flocking-1d",
    "quadratic-flocking-2d",
    "harmonic-means",
    "blowup-1d-unconditional",
    "smooth-1d",
    "riccati-single",
    "convex-constant-kernel",
    "convex-algebraic",
    "subcritical-2d",
];

fn base(name: &str, mode: Mode, dim: usize, n: usize, t_end: f64, kernel: KernelSpec, potential: PotentialSpec) -> ExperimentConfig {
    ExperimentConfig {
        scenario: name.to_string(),
        mode,
        dim,
        n,
        dt: 1e-3,
        t_end,
        output_stride: 100,
        seed: 20_240_501,
        m0: 1.0,
        pairwise: false,
        e_threshold: DEFAULT_E_THRESHOLD,
        kernel,
        potential,
        initial: InitialSpec::default(),
    }
}

fn flocking_initial() -> InitialSpec {
    InitialSpec {
        positions: PositionKind::Uniform,
        half_width: 1.0,
        velocity: VelocityKind::Random,
        amplitude: 1.0,
        recenter: true,
        ..InitialSpec::default()
    }
}

pub fn preset(name: &str) -> Option<ExperimentConfig> {
    let pl = |c0, beta| KernelSpec::power_law(c0, beta).expect("valid preset kernel");
    let constant = |k| KernelSpec::constant(k).expect("valid preset kernel");
    let quad = |a| PotentialSpec::quadratic(a).expect("valid preset potential");
    let convex = || PotentialSpec::perturbed_quadratic(1.25, 0.25, 1.0).expect("valid preset potential");

    let cfg = match name {
        "quadratic-flocking-1d" => ExperimentConfig {
            initial: flocking_initial(),
            ..base(name, Mode::Particles, 1, 256, 40.0, pl(1.0, 1.0), quad(1.0))
        },
        "quadratic-flocking-2d" => ExperimentConfig {
            initial: flocking_initial(),
            ..base(name, Mode::Particles, 2, 128, 40.0, pl(1.0, 1.0), quad(1.0))
        },
        "harmonic-means" => ExperimentConfig {
            initial: InitialSpec {
                half_width: 0.5,
                amplitude: 0.5,
                x_shift: vec![1.0, 0.0],
                u_shift: vec![0.0, 0.0],
                ..flocking_initial()
            },
            ..base(name, Mode::Particles, 2, 64, 10.0, pl(1.0, 1.0), quad(4.0))
        },
        "blowup-1d-unconditional" => ExperimentConfig {
            initial: InitialSpec {
                positions: PositionKind::Bump,
                velocity: VelocityKind::Modes,
                amplitude: 0.5,
                modes: 3,
                ..InitialSpec::default()
            },
            output_stride: 10,
            ..base(name, Mode::Hydro1d, 1, 128, 10.0, constant(2.0), quad(5.0))
        },
        "smooth-1d" => ExperimentConfig {
            initial: InitialSpec {
                positions: PositionKind::Bump,
                velocity: VelocityKind::Linear,
                amplitude: -0.7,
                ..InitialSpec::default()
            },
            dt: 2e-3,
            ..base(name, Mode::Hydro1d, 1, 128, 100.0, constant(1.0), quad(0.2))
        },
        "riccati-single" => ExperimentConfig {
            initial: InitialSpec {
                positions: PositionKind::Uniform,
                velocity: VelocityKind::Linear,
                amplitude: 0.5,
                ..InitialSpec::default()
            },
            dt: 1e-4,
            ..base(name, Mode::Hydro1d, 1, 1, 5.0, constant(1.0), quad(0.2))
        },
        "convex-constant-kernel" => ExperimentConfig {
            initial: flocking_initial(),
            ..base(name, Mode::Particles, 1, 128, 40.0, constant(2.0), convex())
        },
        "convex-algebraic" => ExperimentConfig {
            initial: flocking_initial(),
            ..base(name, Mode::Particles, 1, 64, 100.0, pl(2.0, 0.25), convex())
        },
        "subcritical-2d" => ExperimentConfig {
            initial: InitialSpec {
                positions: PositionKind::Uniform,
                velocity: VelocityKind::Linear,
                amplitude: 0.0,
                gradient: Some([[0.1, 0.3], [-0.1, 0.2]]),
                ..InitialSpec::default()
            },
            dt: 2e-3,
            output_stride: 10,
            ..base(name, Mode::Hydro2d, 2, 256, 50.0, constant(3.0), quad(1.0))
        },
        _ => return None,
    };
    Some(cfg)
}
