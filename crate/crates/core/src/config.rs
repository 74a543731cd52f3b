//! Experiment configuration: a TOML document with `[run]`, `[kernel]`,
//! `[potential]` and `[initial]` sections.
//!
//! `run.scenario` may name a preset; keys present in the document then override
//! the preset. Errors carry the key path, e.g. `run.dt`.

use toml::{Table, Value};

use crate::error::{FlockError, Result};
use crate::hydro2d::Mat2;
use crate::kernel::KernelSpec;
use crate::potential::PotentialSpec;
use crate::presets;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    Particles,
    Hydro1d,
    Hydro2d,
}

impl Mode {
    pub fn as_str(&self) -> &'static str {
        match self {
            Mode::Particles => "particles",
            Mode::Hydro1d => "hydro1d",
            Mode::Hydro2d => "hydro2d",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PositionKind {
    /// iid uniform on `[−L, L]^d` for particles; a uniform grid for hydrodynamic modes.
    Uniform,
    Bump,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VelocityKind {
    Linear,
    Sinusoidal,
    Random,
    Modes,
}

#[derive(Debug, Clone, PartialEq)]
pub struct InitialSpec {
    pub positions: PositionKind,
    pub half_width: f64,
    pub velocity: VelocityKind,
    pub amplitude: f64,
    /// Full velocity gradient for `linear` in 2D; defaults to `amplitude·I`.
    pub gradient: Option<Mat2>,
    pub modes: usize,
    pub x_shift: Vec<f64>,
    pub u_shift: Vec<f64>,
    pub recenter: bool,
}

impl Default for InitialSpec {
    fn default() -> Self {
        InitialSpec {
            positions: PositionKind::Uniform,
            half_width: 1.0,
            velocity: VelocityKind::Random,
            amplitude: 1.0,
            gradient: None,
            modes: 3,
            x_shift: Vec::new(),
            u_shift: Vec::new(),
            recenter: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub scenario: String,
    pub mode: Mode,
    pub dim: usize,
    pub n: usize,
    pub dt: f64,
    pub t_end: f64,
    pub output_stride: usize,
    pub seed: u64,
    pub m0: f64,
    /// Quadratic confinement as pairwise attraction (particles only).
    pub pairwise: bool,
    pub e_threshold: f64,
    pub kernel: KernelSpec,
    pub potential: PotentialSpec,
    pub initial: InitialSpec,
}

pub const DEFAULT_DT: f64 = 1e-3;
pub const DEFAULT_STRIDE: usize = 100;
pub const DEFAULT_E_THRESHOLD: f64 = -1e6;

const SECTIONS: [&str; 4] = ["run", "kernel", "potential", "initial"];
const RUN_KEYS: [&str; 11] = [
    "scenario",
    "mode",
    "dim",
    "N",
    "dt",
    "T",
    "output_stride",
    "seed",
    "m0",
    "pairwise",
    "e_threshold",
];
const INITIAL_KEYS: [&str; 9] = [
    "positions",
    "half_width",
    "velocity",
    "amplitude",
    "gradient",
    "modes",
    "x_shift",
    "u_shift",
    "recenter",
];

fn err(path: impl Into<String>, reason: impl Into<String>) -> FlockError {
    FlockError::config(path, reason)
}

struct Section<'a> {
    name: &'static str,
    table: Option<&'a Table>,
}

impl<'a> Section<'a> {
    fn path(&self, key: &str) -> String {
        format!("{}.{}", self.name, key)
    }

    fn check_keys(&self, allowed: &[&str]) -> Result<()> {
        if let Some(t) = self.table {
            if let Some(k) = t.keys().find(|k| !allowed.contains(&k.as_str())) {
                return Err(err(self.path(k), "unknown key"));
            }
        }
        Ok(())
    }

    fn raw(&self, key: &str) -> Option<&'a Value> {
        self.table.and_then(|t| t.get(key))
    }

    fn f64(&self, key: &str) -> Result<Option<f64>> {
        match self.raw(key) {
            None => Ok(None),
            Some(Value::Float(v)) => Ok(Some(*v)),
            Some(Value::Integer(v)) => Ok(Some(*v as f64)),
            Some(_) => Err(err(self.path(key), "expected a number")),
        }
    }

    fn req_f64(&self, key: &str) -> Result<f64> {
        self.f64(key)?.ok_or_else(|| err(self.path(key), "missing required key"))
    }

    fn uint(&self, key: &str) -> Result<Option<u64>> {
        match self.raw(key) {
            None => Ok(None),
            Some(Value::Integer(v)) if *v >= 0 => Ok(Some(*v as u64)),
            Some(_) => Err(err(self.path(key), "expected a nonnegative integer")),
        }
    }

    fn str(&self, key: &str) -> Result<Option<&'a str>> {
        match self.raw(key) {
            None => Ok(None),
            Some(Value::String(s)) => Ok(Some(s.as_str())),
            Some(_) => Err(err(self.path(key), "expected a string")),
        }
    }

    fn bool(&self, key: &str) -> Result<Option<bool>> {
        match self.raw(key) {
            None => Ok(None),
            Some(Value::Boolean(b)) => Ok(Some(*b)),
            Some(_) => Err(err(self.path(key), "expected a boolean")),
        }
    }

    fn vec(&self, key: &str) -> Result<Option<Vec<f64>>> {
        match self.raw(key) {
            None => Ok(None),
            Some(Value::Array(items)) => items
                .iter()
                .map(|v| match v {
                    Value::Float(f) => Ok(*f),
                    Value::Integer(i) => Ok(*i as f64),
                    _ => Err(err(self.path(key), "expected an array of numbers")),
                })
                .collect::<Result<Vec<_>>>()
                .map(Some),
            Some(_) => Err(err(self.path(key), "expected an array of numbers")),
        }
    }
}

fn section<'a>(root: &'a Table, name: &'static str) -> Result<Section<'a>> {
    match root.get(name) {
        None => Ok(Section { name, table: None }),
        Some(Value::Table(t)) => Ok(Section { name, table: Some(t) }),
        Some(_) => Err(err(name, "expected a table")),
    }
}

fn positive(path: &str, v: f64) -> Result<f64> {
    if v > 0.0 && v.is_finite() {
        Ok(v)
    } else {
        Err(err(path, format!("must be positive, got {v}")))
    }
}

fn parse_kernel(s: &Section) -> Result<KernelSpec> {
    let family = s.str("family")?.ok_or_else(|| err(s.path("family"), "missing required key"))?;
    let wrap = |e: FlockError| err(s.name, e.to_string());
    match family {
        "power_law" => {
            s.check_keys(&["family", "c0", "beta"])?;
            KernelSpec::power_law(s.f64("c0")?.unwrap_or(1.0), s.req_f64("beta")?).map_err(wrap)
        }
        "constant" => {
            s.check_keys(&["family", "K"])?;
            KernelSpec::constant(s.req_f64("K")?).map_err(wrap)
        }
        "floor_clipped" => {
            s.check_keys(&["family", "c0", "beta", "alpha"])?;
            let inner = KernelSpec::power_law(s.f64("c0")?.unwrap_or(1.0), s.req_f64("beta")?).map_err(wrap)?;
            KernelSpec::floor_clipped(inner, s.req_f64("alpha")?).map_err(wrap)
        }
        other => Err(err(s.path("family"), format!("unknown kernel family '{other}'"))),
    }
}

fn parse_potential(s: &Section) -> Result<PotentialSpec> {
    let family = s.str("family")?.ok_or_else(|| err(s.path("family"), "missing required key"))?;
    let wrap = |e: FlockError| err(s.name, e.to_string());
    match family {
        "quadratic" => {
            s.check_keys(&["family", "a"])?;
            PotentialSpec::quadratic(s.req_f64("a")?).map_err(wrap)
        }
        "perturbed_quadratic" => {
            s.check_keys(&["family", "a", "eps", "kappa"])?;
            PotentialSpec::perturbed_quadratic(s.req_f64("a")?, s.req_f64("eps")?, s.f64("kappa")?.unwrap_or(1.0)).map_err(wrap)
        }
        "zero" => {
            s.check_keys(&["family"])?;
            Ok(PotentialSpec::Zero)
        }
        other => Err(err(s.path("family"), format!("unknown potential family '{other}'"))),
    }
}

fn parse_initial(s: &Section, dim: usize) -> Result<InitialSpec> {
    s.check_keys(&INITIAL_KEYS)?;
    let d = InitialSpec::default();
    let positions = match s.str("positions")? {
        None => d.positions,
        Some("uniform") => PositionKind::Uniform,
        Some("bump") => PositionKind::Bump,
        Some(o) => return Err(err(s.path("positions"), format!("unknown position profile '{o}'"))),
    };
    let velocity = match s.str("velocity")? {
        None => d.velocity,
        Some("linear") => VelocityKind::Linear,
        Some("sinusoidal") => VelocityKind::Sinusoidal,
        Some("random") => VelocityKind::Random,
        Some("modes") => VelocityKind::Modes,
        Some(o) => return Err(err(s.path("velocity"), format!("unknown velocity profile '{o}'"))),
    };
    let gradient = match s.raw("gradient") {
        None => None,
        Some(Value::Array(rows)) if rows.len() == 2 => {
            let mut g = [[0.0; 2]; 2];
            for (k, row) in rows.iter().enumerate() {
                let parsed = match row {
                    Value::Array(r) if r.len() == 2 => r
                        .iter()
                        .map(|v| match v {
                            Value::Float(f) => Ok(*f),
                            Value::Integer(i) => Ok(*i as f64),
                            _ => Err(err(s.path("gradient"), "expected a 2x2 array of numbers")),
                        })
                        .collect::<Result<Vec<_>>>()?,
                    _ => return Err(err(s.path("gradient"), "expected a 2x2 array of numbers")),
                };
                g[k] = [parsed[0], parsed[1]];
            }
            Some(g)
        }
        Some(_) => return Err(err(s.path("gradient"), "expected a 2x2 array of numbers")),
    };
    let shift = |key: &str| -> Result<Vec<f64>> {
        let v = s.vec(key)?.unwrap_or_default();
        if !v.is_empty() && v.len() != dim {
            return Err(err(s.path(key), format!("expected {dim} components, got {}", v.len())));
        }
        Ok(v)
    };
    let half_width = positive(&s.path("half_width"), s.f64("half_width")?.unwrap_or(d.half_width))?;
    let amplitude = s.f64("amplitude")?.unwrap_or(d.amplitude);
    if !amplitude.is_finite() {
        return Err(err(s.path("amplitude"), "must be finite"));
    }
    Ok(InitialSpec {
        positions,
        half_width,
        velocity,
        amplitude,
        gradient,
        modes: s.uint("modes")?.map(|m| m as usize).unwrap_or(d.modes),
        x_shift: shift("x_shift")?,
        u_shift: shift("u_shift")?,
        recenter: s.bool("recenter")?.unwrap_or(d.recenter),
    })
}

impl ExperimentConfig {
    /// Validated config from a parsed document, without preset expansion.
    pub fn from_table(root: &Table) -> Result<Self> {
        if let Some(k) = root.keys().find(|k| !SECTIONS.contains(&k.as_str())) {
            return Err(err(k.as_str(), "unknown section"));
        }
        let run = section(root, "run")?;
        run.check_keys(&RUN_KEYS)?;
        let mode = match run.str("mode")? {
            None | Some("particles") => Mode::Particles,
            Some("hydro1d") => Mode::Hydro1d,
            Some("hydro2d") => Mode::Hydro2d,
            Some(o) => return Err(err("run.mode", format!("unknown mode '{o}'"))),
        };
        let dim = match (mode, run.uint("dim")?) {
            (Mode::Hydro1d, None | Some(1)) => 1,
            (Mode::Hydro2d, None | Some(2)) => 2,
            (Mode::Particles, None) => 1,
            (Mode::Particles, Some(d @ (1 | 2))) => d as usize,
            (_, Some(d)) => return Err(err("run.dim", format!("dimension {d} not supported in mode {}", mode.as_str()))),
        };
        let n = run.uint("N")?.ok_or_else(|| err("run.N", "missing required key"))?;
        if n == 0 {
            return Err(err("run.N", "must be at least 1"));
        }
        let dt = positive("run.dt", run.f64("dt")?.unwrap_or(DEFAULT_DT))?;
        let t_end = positive("run.T", run.req_f64("T")?)?;
        let output_stride = run.uint("output_stride")?.unwrap_or(DEFAULT_STRIDE as u64);
        if output_stride == 0 {
            return Err(err("run.output_stride", "must be at least 1"));
        }
        let m0 = positive("run.m0", run.f64("m0")?.unwrap_or(1.0))?;
        let e_threshold = run.f64("e_threshold")?.unwrap_or(DEFAULT_E_THRESHOLD);
        if !(e_threshold < 0.0) {
            return Err(err("run.e_threshold", "must be negative"));
        }
        let pairwise = run.bool("pairwise")?.unwrap_or(false);

        let ksec = section(root, "kernel")?;
        if ksec.table.is_none() {
            return Err(err("kernel", "missing required section"));
        }
        let psec = section(root, "potential")?;
        if psec.table.is_none() {
            return Err(err("potential", "missing required section"));
        }
        let kernel = parse_kernel(&ksec)?;
        let potential = parse_potential(&psec)?;
        if pairwise && (mode != Mode::Particles || potential.quadratic_coefficient().is_none()) {
            return Err(err("run.pairwise", "requires particles mode and a quadratic potential"));
        }
        let initial = parse_initial(&section(root, "initial")?, dim)?;
        if mode != Mode::Particles && initial.velocity == VelocityKind::Random {
            return Err(err("initial.velocity", "hydrodynamic modes need an analytic velocity profile"));
        }
        Ok(ExperimentConfig {
            scenario: run.str("scenario")?.unwrap_or("custom").to_string(),
            mode,
            dim,
            n: n as usize,
            dt,
            t_end,
            output_stride: output_stride as usize,
            seed: run.uint("seed")?.unwrap_or(0),
            m0,
            pairwise,
            e_threshold,
            kernel,
            potential,
            initial,
        })
    }

    pub fn to_table(&self) -> Table {
        let mut run = Table::new();
        run.insert("scenario".into(), self.scenario.clone().into());
        run.insert("mode".into(), self.mode.as_str().into());
        run.insert("dim".into(), (self.dim as i64).into());
        run.insert("N".into(), (self.n as i64).into());
        run.insert("dt".into(), self.dt.into());
        run.insert("T".into(), self.t_end.into());
        run.insert("output_stride".into(), (self.output_stride as i64).into());
        run.insert("seed".into(), (self.seed as i64).into());
        run.insert("m0".into(), self.m0.into());
        run.insert("pairwise".into(), self.pairwise.into());
        run.insert("e_threshold".into(), self.e_threshold.into());

        let mut kernel = Table::new();
        match &self.kernel {
            KernelSpec::PowerLaw { c0, beta } => {
                kernel.insert("family".into(), "power_law".into());
                kernel.insert("c0".into(), (*c0).into());
                kernel.insert("beta".into(), (*beta).into());
            }
            KernelSpec::Constant { k } => {
                kernel.insert("family".into(), "constant".into());
                kernel.insert("K".into(), (*k).into());
            }
            KernelSpec::FloorClipped { inner, alpha } => {
                kernel.insert("family".into(), "floor_clipped".into());
                if let KernelSpec::PowerLaw { c0, beta } = inner.as_ref() {
                    kernel.insert("c0".into(), (*c0).into());
                    kernel.insert("beta".into(), (*beta).into());
                }
                kernel.insert("alpha".into(), (*alpha).into());
            }
        }

        let mut potential = Table::new();
        match &self.potential {
            PotentialSpec::Quadratic { a } => {
                potential.insert("family".into(), "quadratic".into());
                potential.insert("a".into(), (*a).into());
            }
            PotentialSpec::PerturbedQuadratic { a, eps, kappa } => {
                potential.insert("family".into(), "perturbed_quadratic".into());
                potential.insert("a".into(), (*a).into());
                potential.insert("eps".into(), (*eps).into());
                potential.insert("kappa".into(), (*kappa).into());
            }
            PotentialSpec::Zero => {
                potential.insert("family".into(), "zero".into());
            }
        }

        let ini = &self.initial;
        let mut initial = Table::new();
        initial.insert(
            "positions".into(),
            match ini.positions {
                PositionKind::Uniform => "uniform",
                PositionKind::Bump => "bump",
            }
            .into(),
        );
        initial.insert("half_width".into(), ini.half_width.into());
        initial.insert(
            "velocity".into(),
            match ini.velocity {
                VelocityKind::Linear => "linear",
                VelocityKind::Sinusoidal => "sinusoidal",
                VelocityKind::Random => "random",
                VelocityKind::Modes => "modes",
            }
            .into(),
        );
        initial.insert("amplitude".into(), ini.amplitude.into());
        if let Some(g) = ini.gradient {
            let rows: Vec<Value> = g.iter().map(|r| Value::Array(vec![r[0].into(), r[1].into()])).collect();
            initial.insert("gradient".into(), Value::Array(rows));
        }
        initial.insert("modes".into(), (ini.modes as i64).into());
        let arr = |v: &[f64]| Value::Array(v.iter().map(|x| (*x).into()).collect());
        if !ini.x_shift.is_empty() {
            initial.insert("x_shift".into(), arr(&ini.x_shift));
        }
        if !ini.u_shift.is_empty() {
            initial.insert("u_shift".into(), arr(&ini.u_shift));
        }
        initial.insert("recenter".into(), ini.recenter.into());

        let mut root = Table::new();
        root.insert("run".into(), Value::Table(run));
        root.insert("kernel".into(), Value::Table(kernel));
        root.insert("potential".into(), Value::Table(potential));
        root.insert("initial".into(), Value::Table(initial));
        root
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(&self.to_table()).expect("config tables serialise")
    }
}

/// Overlays `top` on `base` section by section. A section that names a different
/// `family` replaces the base section outright.
pub fn merge_tables(base: &mut Table, top: &Table) {
    for (name, value) in top {
        match (base.get_mut(name), value) {
            (Some(Value::Table(b)), Value::Table(t)) => {
                let family_changed = t.get("family").is_some_and(|f| b.get("family") != Some(f));
                if family_changed {
                    *b = t.clone();
                } else {
                    for (k, v) in t {
                        b.insert(k.clone(), v.clone());
                    }
                }
            }
            _ => {
                base.insert(name.clone(), value.clone());
            }
        }
    }
}

/// Parses a config document, expanding `run.scenario` when it names a preset.
pub fn parse_config(text: &str) -> Result<ExperimentConfig> {
    let doc: Table = text
        .parse()
        .map_err(|e: toml::de::Error| err("<document>", e.message().to_string()))?;
    let scenario = doc
        .get("run")
        .and_then(|r| r.get("scenario"))
        .and_then(|s| s.as_str())
        .filter(|s| *s != "custom");
    let root = match scenario {
        Some(name) => {
            let preset = presets::preset(name).ok_or_else(|| err("run.scenario", format!("unknown preset '{name}'")))?;
            let mut base = preset.to_table();
            merge_tables(&mut base, &doc);
            base
        }
        None => doc,
    };
    ExperimentConfig::from_table(&root)
}

/// Sets `section.key` on a config through its table form and revalidates.
pub fn with_override(cfg: &ExperimentConfig, path: &str, value: Value) -> Result<ExperimentConfig> {
    let (sec, key) = path.split_once('.').ok_or_else(|| err(path, "expected section.key"))?;
    let mut table = cfg.to_table();
    match table.get_mut(sec) {
        Some(Value::Table(t)) => {
            t.insert(key.to_string(), value);
        }
        _ => return Err(err(path, "unknown section")),
    }
    ExperimentConfig::from_table(&table)
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"
[run]
N = 16
T = 1.0

[kernel]
family = "power_law"
beta = 1.0

[potential]
family = "quadratic"
a = 1.0
"#;

    #[test]
    fn minimal_config_gets_defaults() {
        let c = parse_config(MINIMAL).unwrap();
        assert_eq!(
            (c.dt, c.output_stride, c.mode, c.dim),
            (DEFAULT_DT, DEFAULT_STRIDE, Mode::Particles, 1)
        );
        assert_eq!(c.kernel, KernelSpec::power_law(1.0, 1.0).unwrap());
    }

    #[test]
    fn preset_reference_expands() {
        let c = parse_config("[run]\nscenario = \"quadratic-flocking-1d\"\n").unwrap();
        assert_eq!(c, presets::preset("quadratic-flocking-1d").unwrap());
        let c = parse_config("[run]\nscenario = \"quadratic-flocking-1d\"\nT = 2.0\n").unwrap();
        assert_eq!(c.t_end, 2.0);
    }

    #[test]
    fn errors_carry_key_paths() {
        let bad_dt = MINIMAL.replace("T = 1.0", "T = 1.0\ndt = -1");
        match parse_config(&bad_dt) {
            Err(FlockError::Config { path, .. }) => assert_eq!(path, "run.dt"),
            other => panic!("{other:?}"),
        }
        let bad_family = MINIMAL.replace("\"power_law\"", "\"gaussian\"");
        match parse_config(&bad_family) {
            Err(FlockError::Config { path, .. }) => assert_eq!(path, "kernel.family"),
            other => panic!("{other:?}"),
        }
        let unknown = MINIMAL.replace("T = 1.0", "T = 1.0\nspeed = 3");
        match parse_config(&unknown) {
            Err(FlockError::Config { path, .. }) => assert_eq!(path, "run.speed"),
            other => panic!("{other:?}"),
        }
        let missing = MINIMAL.replace("N = 16\n", "");
        assert!(matches!(parse_config(&missing), Err(FlockError::Config { path, .. }) if path == "run.N"));
    }

    #[test]
    fn round_trip_presets() {
        for name in presets::NAMES {
            let c = presets::preset(name).unwrap();
            assert_eq!(parse_config(&c.to_toml()).unwrap(), c, "{name}");
        }
    }

    #[test]
    fn override_revalidates() {
        let c = parse_config(MINIMAL).unwrap();
        let c2 = with_override(&c, "potential.a", Value::Float(5.0)).unwrap();
        assert_eq!(c2.potential, PotentialSpec::quadratic(5.0).unwrap());
        assert!(with_override(&c, "run.dt", Value::Float(0.0)).is_err());
    }
}
