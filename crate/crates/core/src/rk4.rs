//! Classical four-stage Runge–Kutta with a fixed step.

use crate::error::{FlockError, Result};

/// A state that can be flattened into the vector the integrator advances.
/// Static data (masses) rides along in `self` and is copied by `unpack`.
pub trait OdeState: Sized {
    fn pack(&self) -> Vec<f64>;
    fn unpack(&self, values: &[f64], t: f64) -> Self;
    fn time(&self) -> f64;
}

/// One RK4 step of `y' = f(y)`; `f` returns the packed derivative and may fail at any stage.
pub fn step<S, F>(state: &S, dt: f64, mut f: F) -> Result<S>
where
    S: OdeState,
    F: FnMut(&S) -> Result<Vec<f64>>,
{
    if !(dt > 0.0 && dt.is_finite()) {
        return Err(FlockError::param("dt", format!("must be positive, got {dt}")));
    }
    let t = state.time();
    let y = state.pack();
    let stage = |k: &[f64], h: f64| -> Vec<f64> { y.iter().zip(k).map(|(a, b)| a + h * b).collect() };

    let k1 = f(state)?;
    let k2 = f(&state.unpack(&stage(&k1, 0.5 * dt), t + 0.5 * dt))?;
    let k3 = f(&state.unpack(&stage(&k2, 0.5 * dt), t + 0.5 * dt))?;
    let k4 = f(&state.unpack(&stage(&k3, dt), t + dt))?;

    let sixth = dt / 6.0;
    let next: Vec<f64> = (0..y.len())
        .map(|i| y[i] + sixth * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]))
        .collect();
    Ok(state.unpack(&next, t + dt))
}

#[cfg(test)]
mod tests {
    use super::*;

    struct Scalar {
        y: f64,
        t: f64,
    }

    impl OdeState for Scalar {
        fn pack(&self) -> Vec<f64> {
            vec![self.y]
        }
        fn unpack(&self, v: &[f64], t: f64) -> Self {
            Scalar { y: v[0], t }
        }
        fn time(&self) -> f64 {
            self.t
        }
    }

    fn integrate(dt: f64, t_end: f64) -> f64 {
        let mut s = Scalar { y: 1.0, t: 0.0 };
        let n = (t_end / dt).round() as usize;
        for _ in 0..n {
            s = step(&s, dt, |s| Ok(vec![-s.y * s.y])).unwrap();
        }
        s.y
    }

    #[test]
    fn fourth_order_convergence() {
        // y' = −y², y(0) = 1  ⇒  y(t) = 1/(1+t)
        let exact = 1.0 / 3.0;
        let e1 = (integrate(0.1, 2.0) - exact).abs();
        let e2 = (integrate(0.05, 2.0) - exact).abs();
        let ratio = e1 / e2;
        assert!((ratio - 16.0).abs() < 1.5, "ratio {ratio}");
    }

    #[test]
    fn rejects_nonpositive_step() {
        let s = Scalar { y: 1.0, t: 0.0 };
        assert!(step(&s, 0.0, |s| Ok(vec![s.y])).is_err());
        assert!(step(&s, -1.0, |s| Ok(vec![s.y])).is_err());
    }
}
