//! Energies, fluctuation functionals and per-frame snapshots of a trajectory.

use crate::particles::Ensemble;
use crate::potential::{norm_sq, PotentialSpec};

/// Column names of [`DiagnosticsFrame::csv_row`], in order.
pub const CSV_COLUMNS: [&str; 19] = [
    "t",
    "E",
    "E_k",
    "deltaE_L2",
    "deltaE_Linf",
    "P",
    "D",
    "V",
    "F1_max",
    "F_const_max",
    "xc_k",
    "uc_k",
    "min_e",
    "max_e",
    "min_rho",
    "max_rho",
    "max_abs_etaS",
    "max_abs_omega",
    "max_trM",
];

/// One output-time snapshot; functionals that do not apply to a run are NaN.
#[derive(Debug, Clone, PartialEq)]
pub struct DiagnosticsFrame {
    pub t: f64,
    pub energy: f64,
    pub kinetic: f64,
    pub delta_e_l2: f64,
    pub delta_e_linf: f64,
    pub p: f64,
    pub diameter: f64,
    pub v: f64,
    pub f1_max: f64,
    pub f_const_max: f64,
    pub x_c: Vec<f64>,
    pub u_c: Vec<f64>,
    pub min_e: f64,
    pub max_e: f64,
    pub min_rho: f64,
    pub max_rho: f64,
    pub max_abs_eta_s: f64,
    pub max_abs_omega: f64,
    pub max_tr_m: f64,
}

impl DiagnosticsFrame {
    pub fn empty(t: f64) -> Self {
        DiagnosticsFrame {
            t,
            energy: f64::NAN,
            kinetic: f64::NAN,
            delta_e_l2: f64::NAN,
            delta_e_linf: f64::NAN,
            p: f64::NAN,
            diameter: f64::NAN,
            v: f64::NAN,
            f1_max: f64::NAN,
            f_const_max: f64::NAN,
            x_c: Vec::new(),
            u_c: Vec::new(),
            min_e: f64::NAN,
            max_e: f64::NAN,
            min_rho: f64::NAN,
            max_rho: f64::NAN,
            max_abs_eta_s: f64::NAN,
            max_abs_omega: f64::NAN,
            max_tr_m: f64::NAN,
        }
    }

    /// Header line for `dim`-dimensional frames; vector columns expand per axis.
    pub fn csv_header(dim: usize) -> String {
        let mut cols = Vec::new();
        for c in CSV_COLUMNS {
            match c {
                "xc_k" | "uc_k" => {
                    for k in 0..dim {
                        cols.push(format!("{}{}", &c[..2], k));
                    }
                }
                _ => cols.push(c.to_string()),
            }
        }
        cols.join(",")
    }

    pub fn csv_row(&self) -> String {
        let mut vals = vec![
            self.t,
            self.energy,
            self.kinetic,
            self.delta_e_l2,
            self.delta_e_linf,
            self.p,
            self.diameter,
            self.v,
            self.f1_max,
            self.f_const_max,
        ];
        vals.extend(&self.x_c);
        vals.extend(&self.u_c);
        vals.extend([
            self.min_e,
            self.max_e,
            self.min_rho,
            self.max_rho,
            self.max_abs_eta_s,
            self.max_abs_omega,
            self.max_tr_m,
        ]);
        vals.iter().map(|v| format!("{v:e}")).collect::<Vec<_>>().join(",")
    }
}

/// (E, E_k) with E = Σmᵢ(½|uᵢ|² + U(xᵢ)).
pub fn energy<const D: usize>(ens: &Ensemble<D>, potential: &PotentialSpec) -> (f64, f64) {
    let mut e = 0.0;
    let mut ek = 0.0;
    for i in 0..ens.len() {
        let k = 0.5 * ens.m[i] * norm_sq(&ens.u[i]);
        ek += k;
        e += k + ens.m[i] * potential.value(&ens.x[i]);
    }
    (e, ek)
}

fn pair_term<const D: usize>(ens: &Ensemble<D>, i: usize, j: usize, a: f64) -> f64 {
    let mut du = 0.0;
    let mut dx = 0.0;
    for k in 0..D {
        du += (ens.u[i][k] - ens.u[j][k]).powi(2);
        dx += (ens.x[i][k] - ens.x[j][k]).powi(2);
    }
    du + a * dx
}

/// (δE, δE_∞): mass-weighted double sum and worst pair of |Δu|² + a|Δx|².
pub fn fluctuations<const D: usize>(ens: &Ensemble<D>, a: f64) -> (f64, f64) {
    let mut l2 = 0.0;
    let mut linf: f64 = 0.0;
    for i in 0..ens.len() {
        for j in (i + 1)..ens.len() {
            let w = pair_term(ens, i, j, a);
            l2 += 2.0 * ens.m[i] * ens.m[j] * w;
            linf = linf.max(w);
        }
    }
    (l2, linf)
}

/// (P, D): maximal particle energy and support diameter.
pub fn particle_energy_support<const D: usize>(ens: &Ensemble<D>, potential: &PotentialSpec) -> (f64, f64) {
    let p = (0..ens.len())
        .map(|i| 0.5 * norm_sq(&ens.u[i]) + potential.value(&ens.x[i]))
        .fold(f64::NEG_INFINITY, f64::max);
    let mut d2: f64 = 0.0;
    for i in 0..ens.len() {
        for j in (i + 1)..ens.len() {
            let mut s = 0.0;
            for k in 0..D {
                s += (ens.x[i][k] - ens.x[j][k]).powi(2);
            }
            d2 = d2.max(s);
        }
    }
    (p, d2.sqrt())
}

fn warn_if_uncentered<const D: usize>(ens: &Ensemble<D>, what: &str) {
    let m = ens.means();
    let off = (norm_sq(&m.x_c) + norm_sq(&m.u_c)).sqrt();
    if off > 1e-8 {
        log::warn!("{what} evaluated on an ensemble with nonzero means (|means| = {off:e})");
    }
}

/// V = Σmᵢ(½|uᵢ|² + (a/2)|xᵢ|² + 2λ uᵢ·xᵢ) on a centred ensemble.
pub fn lyapunov_v<const D: usize>(ens: &Ensemble<D>, a: f64, lambda: f64) -> f64 {
    warn_if_uncentered(ens, "V");
    (0..ens.len())
        .map(|i| {
            let ux: f64 = (0..D).map(|k| ens.u[i][k] * ens.x[i][k]).sum();
            ens.m[i] * (0.5 * norm_sq(&ens.u[i]) + 0.5 * a * norm_sq(&ens.x[i]) + 2.0 * lambda * ux)
        })
        .sum()
}

/// maxᵢ (½|uᵢ|² + (a/2)|xᵢ|² + 2λ₁ uᵢ·xᵢ) on a centred ensemble.
pub fn f1_max<const D: usize>(ens: &Ensemble<D>, a: f64, lambda1: f64) -> f64 {
    warn_if_uncentered(ens, "F1");
    (0..ens.len())
        .map(|i| {
            let ux: f64 = (0..D).map(|k| ens.u[i][k] * ens.x[i][k]).sum();
            0.5 * norm_sq(&ens.u[i]) + 0.5 * a * norm_sq(&ens.x[i]) + 2.0 * lambda1 * ux
        })
        .fold(f64::NEG_INFINITY, f64::max)
}

/// max over pairs of K/2|Δx|² + Δx·Δu + β/2|Δu|².
pub fn pair_functional_f<const D: usize>(ens: &Ensemble<D>, k: f64, beta: f64) -> f64 {
    let mut best: f64 = 0.0;
    for i in 0..ens.len() {
        for j in (i + 1)..ens.len() {
            let (mut xx, mut xu, mut uu) = (0.0, 0.0, 0.0);
            for c in 0..D {
                let dx = ens.x[i][c] - ens.x[j][c];
                let du = ens.u[i][c] - ens.u[j][c];
                xx += dx * dx;
                xu += dx * du;
                uu += du * du;
            }
            best = best.max(0.5 * k * xx + xu + 0.5 * beta * uu);
        }
    }
    best
}

/// ½ΣᵢΣⱼ mᵢmⱼ φ(|xᵢ − xⱼ|)|uᵢ − uⱼ|², the energy dissipation rate.
pub fn dissipation<const D: usize>(ens: &Ensemble<D>, kernel: &crate::kernel::KernelSpec) -> f64 {
    let mut s = 0.0;
    for i in 0..ens.len() {
        for j in (i + 1)..ens.len() {
            let mut r2 = 0.0;
            let mut du2 = 0.0;
            for k in 0..D {
                r2 += (ens.x[i][k] - ens.x[j][k]).powi(2);
                du2 += (ens.u[i][k] - ens.u[j][k]).powi(2);
            }
            s += ens.m[i] * ens.m[j] * kernel.eval_sq(r2) * du2;
        }
    }
    s
}

/// ⟨∇E, rate⟩ = Σmᵢ(uᵢ·u̇ᵢ + ∇U(xᵢ)·ẋᵢ), the exact time derivative of E along `rate`.
pub fn energy_rate<const D: usize>(ens: &Ensemble<D>, rate: &crate::particles::Rate<D>, potential: &PotentialSpec) -> f64 {
    (0..ens.len())
        .map(|i| {
            let g = potential.gradient(&ens.x[i]);
            let s: f64 = (0..D).map(|k| ens.u[i][k] * rate.du[i][k] + g[k] * rate.dx[i][k]).sum();
            ens.m[i] * s
        })
        .sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn pair() -> Ensemble<1> {
        Ensemble::new(vec![[1.0], [-1.0]], vec![[1.0], [-1.0]], vec![0.5, 0.5]).unwrap()
    }

    #[test]
    fn energy_examples() {
        let rest = Ensemble::new(vec![[0.0, 0.0]; 3], vec![[0.0, 0.0]; 3], vec![1.0; 3]).unwrap();
        assert_eq!(energy(&rest, &PotentialSpec::quadratic(1.0).unwrap()), (0.0, 0.0));
        let (e, ek) = energy(&pair(), &PotentialSpec::quadratic(1.0).unwrap());
        assert_abs_diff_eq!(e, 1.0);
        assert_abs_diff_eq!(ek, 0.5);
    }

    #[test]
    fn fluctuation_examples() {
        assert_eq!(fluctuations(&pair(), 1.0), (4.0, 8.0));
        let same = Ensemble::new(vec![[0.3]; 4], vec![[1.0]; 4], vec![0.25; 4]).unwrap();
        assert_eq!(fluctuations(&same, 1.0), (0.0, 0.0));
    }

    #[test]
    fn support_examples() {
        let one = Ensemble::new(vec![[0.0]], vec![[0.0]], vec![1.0]).unwrap();
        assert_eq!(particle_energy_support(&one, &PotentialSpec::quadratic(1.0).unwrap()), (0.0, 0.0));
        let p = Ensemble::new(vec![[1.0], [-1.0]], vec![[0.0], [0.0]], vec![0.5, 0.5]).unwrap();
        let (pp, d) = particle_energy_support(&p, &PotentialSpec::quadratic(1.0).unwrap());
        assert_eq!((pp, d), (0.5, 2.0));
        assert!(pp >= d * d / 8.0);
    }

    #[test]
    fn lyapunov_examples() {
        let e = pair();
        let (en, _) = energy(&e, &PotentialSpec::quadratic(1.0).unwrap());
        assert_abs_diff_eq!(lyapunov_v(&e, 1.0, 0.0), en);
        let (dl2, _) = fluctuations(&e, 1.0);
        let v = lyapunov_v(&e, 1.0, 0.2);
        assert!(dl2 / 4.0 <= v && v <= dl2 / 2.0);
    }

    #[test]
    fn pair_functional_examples() {
        let same = Ensemble::new(vec![[0.3]; 2], vec![[1.0]; 2], vec![0.5; 2]).unwrap();
        assert_eq!(pair_functional_f(&same, 2.0, 16.0 / 9.0), 0.0);
        assert!(pair_functional_f(&pair(), 2.0, 16.0 / 9.0) > 0.0);
    }

    #[test]
    fn csv_header_matches_row_width() {
        let mut f = DiagnosticsFrame::empty(0.5);
        f.x_c = vec![0.0, 1.0];
        f.u_c = vec![0.0, 1.0];
        let h = DiagnosticsFrame::csv_header(2);
        assert_eq!(h.split(',').count(), f.csv_row().split(',').count());
        assert!(h.starts_with("t,E,E_k") && h.contains("xc1") && h.ends_with("max_trM"));
    }
}
