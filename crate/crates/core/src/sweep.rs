//! Parameter sweeps over one or two config keys.

use std::io::{self, Write};

use rayon::prelude::*;
use serde::Serialize;
use toml::Value;

use crate::config::{with_override, ExperimentConfig};
use crate::error::{FlockError, Result};
use crate::run::{classify, run, Threshold};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Axis {
    pub key: String,
    pub values: Vec<f64>,
}

/// Parses `section.key=lo:hi:n` (inclusive, evenly spaced) or `section.key=v1,v2,...`.
pub fn parse_axis(spec: &str) -> Result<Axis> {
    let bad = |reason: &str| FlockError::config(spec, reason.to_string());
    let (key, rhs) = spec.split_once('=').ok_or_else(|| bad("expected key=lo:hi:n or key=v1,v2"))?;
    let num = |s: &str| s.trim().parse::<f64>().map_err(|_| bad("not a number"));
    let values = if rhs.contains(':') {
        let parts: Vec<&str> = rhs.split(':').collect();
        if parts.len() != 3 {
            return Err(bad("range needs lo:hi:n"));
        }
        let (lo, hi) = (num(parts[0])?, num(parts[1])?);
        let n: usize = parts[2].trim().parse().map_err(|_| bad("count must be an integer"))?;
        match n {
            0 => return Err(bad("count must be positive")),
            1 => vec![lo],
            _ => (0..n).map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64).collect(),
        }
    } else {
        rhs.split(',').map(num).collect::<Result<Vec<_>>>()?
    };
    Ok(Axis {
        key: key.trim().to_string(),
        values,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRow {
    pub values: Vec<f64>,
    pub verdict: Option<String>,
    pub condition: Option<String>,
    pub margin: Option<f64>,
    pub simulated: Option<Outcome>,
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Outcome {
    pub blowup: Option<(f64, f64)>,
    pub checks_pass: bool,
}

fn tag<T: Serialize>(v: &T) -> String {
    serde_json::to_value(v)
        .ok()
        .and_then(|v| v.as_str().map(str::to_string))
        .unwrap_or_default()
}

fn value_for(cfg: &ExperimentConfig, key: &str, v: f64) -> Value {
    let table = cfg.to_table();
    let current = key.split_once('.').and_then(|(s, k)| table.get(s).and_then(|t| t.get(k)));
    match current {
        Some(Value::Integer(_)) if v.fract() == 0.0 => Value::Integer(v as i64),
        _ => Value::Float(v),
    }
}

fn point(base: &ExperimentConfig, axes: &[Axis], values: &[f64], simulate: bool) -> SweepRow {
    let mut row = SweepRow {
        values: values.to_vec(),
        verdict: None,
        condition: None,
        margin: None,
        simulated: None,
        error: None,
    };
    let mut cfg = base.clone();
    for (axis, &v) in axes.iter().zip(values) {
        match with_override(&cfg, &axis.key, value_for(&cfg, &axis.key, v)) {
            Ok(c) => cfg = c,
            Err(e) => {
                row.error = Some(e.to_string());
                return row;
            }
        }
    }
    match classify(&cfg) {
        Ok(Threshold::OneD(t)) => {
            row.verdict = Some(tag(&t.verdict));
            row.condition = Some(tag(&t.condition));
            row.margin = Some(t.margin);
        }
        Ok(Threshold::TwoD(t)) => {
            row.verdict = Some(tag(&t.verdict));
            row.margin = t.margins.iter().map(|m| m.value).reduce(f64::min);
        }
        Err(e) => row.error = Some(e.to_string()),
    }
    if simulate {
        match run(&cfg) {
            Ok(out) => {
                row.simulated = Some(Outcome {
                    blowup: out.summary.blowup,
                    checks_pass: out.summary.all_pass(),
                })
            }
            Err(e) => row.error = Some(e.to_string()),
        }
    }
    row
}

/// Evaluates every grid point in row-major order; `threads > 1` spreads points over a pool
/// while keeping the output order.
pub fn sweep(base: &ExperimentConfig, axes: &[Axis], simulate: bool, threads: usize) -> Result<Vec<SweepRow>> {
    if axes.is_empty() || axes.len() > 2 {
        return Err(FlockError::Unsupported(format!("sweeps take one or two axes, got {}", axes.len())));
    }
    let grid: Vec<Vec<f64>> = match axes {
        [a] => a.values.iter().map(|&v| vec![v]).collect(),
        [a, b] => a
            .values
            .iter()
            .flat_map(|&va| b.values.iter().map(move |&vb| vec![va, vb]))
            .collect(),
        _ => unreachable!(),
    };
    if threads <= 1 {
        return Ok(grid.iter().map(|v| point(base, axes, v, simulate)).collect());
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| FlockError::Unsupported(e.to_string()))?;
    Ok(pool.install(|| grid.par_iter().map(|v| point(base, axes, v, simulate)).collect()))
}

pub fn write_csv<W: Write>(axes: &[Axis], rows: &[SweepRow], mut w: W) -> io::Result<()> {
    let keys: Vec<&str> = axes.iter().map(|a| a.key.as_str()).collect();
    writeln!(
        w,
        "{},verdict,condition,margin,blowup_lo,blowup_hi,checks_pass,error",
        keys.join(",")
    )?;
    let opt = |v: Option<f64>| v.map(|x| format!("{x:e}")).unwrap_or_default();
    for r in rows {
        let vals: Vec<String> = r.values.iter().map(|v| format!("{v:e}")).collect();
        let (lo, hi) = r.simulated.as_ref().and_then(|s| s.blowup).unzip();
        writeln!(
            w,
            "{},{},{},{},{},{},{},{}",
            vals.join(","),
            r.verdict.as_deref().unwrap_or(""),
            r.condition.as_deref().unwrap_or(""),
            opt(r.margin),
            opt(lo),
            opt(hi),
            r.simulated.as_ref().map(|s| s.checks_pass.to_string()).unwrap_or_default(),
            r.error.as_deref().unwrap_or("").replace(',', ";"),
        )?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::presets::preset;

    #[test]
    fn axis_forms() {
        let a = parse_axis("potential.a=0.1:0.3:3").unwrap();
        assert_eq!(a.key, "potential.a");
        assert_eq!(a.values.len(), 3);
        assert!((a.values[2] - 0.3).abs() < 1e-15);
        assert_eq!(parse_axis("kernel.K=1,2").unwrap().values, vec![1.0, 2.0]);
        assert!(parse_axis("kernel.K").is_err());
        assert!(parse_axis("kernel.K=1:2").is_err());
    }

    #[test]
    fn parallel_sweep_matches_sequential() {
        let base = preset("smooth-1d").unwrap();
        let axes = vec![
            parse_axis("potential.a=0.05:0.5:4").unwrap(),
            parse_axis("initial.amplitude=-0.7,0.5").unwrap(),
        ];
        let s = sweep(&base, &axes, false, 1).unwrap();
        let p = sweep(&base, &axes, false, 3).unwrap();
        assert_eq!(s, p);
        assert_eq!(s.len(), 8);
        assert!(s.iter().all(|r| r.error.is_none() && r.verdict.is_some()));
    }

    #[test]
    fn integer_keys_stay_integers() {
        let base = preset("smooth-1d").unwrap();
        let rows = sweep(&base, &[parse_axis("run.N=16,32").unwrap()], false, 1).unwrap();
        assert!(rows.iter().all(|r| r.error.is_none()), "{rows:?}");
    }
}
