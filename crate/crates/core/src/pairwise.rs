//! Mass-weighted pairwise sums shared by the particle and characteristic solvers.
//!
//! Each pair is visited once. Contributions to particle `i` still arrive in
//! increasing `j` order (rows `j < i` first, then the tail of row `i`), so the
//! result is bitwise reproducible and matches a per-particle ordered sum.

use crate::kernel::CompiledKernel;

/// Per-particle convolution sums.
pub struct PairSums<const D: usize> {
    /// (φ∗ρ)(xᵢ) = Σⱼ mⱼ φ(|xᵢ − xⱼ|), diagonal included.
    pub conv: Vec<f64>,
    /// Σⱼ mⱼ φ(|xᵢ − xⱼ|)(uⱼ − uᵢ).
    pub force: Vec<[f64; D]>,
    /// R_kl = Σⱼ mⱼ ∂_lφ(xᵢ − xⱼ)(u_k(xⱼ) − u_k(xᵢ)), when requested.
    pub gradient_forcing: Option<Vec<[[f64; D]; D]>>,
}

pub fn pair_sums<const D: usize>(
    x: &[[f64; D]],
    u: &[[f64; D]],
    m: &[f64],
    kernel: &CompiledKernel,
    with_gradient_forcing: bool,
) -> PairSums<D> {
    let n = x.len();
    let mut conv = vec![0.0; n];
    let mut force = vec![[0.0; D]; n];
    let want_r = with_gradient_forcing && !kernel.is_constant();
    let mut r_acc = if want_r { vec![[[0.0; D]; D]; n] } else { Vec::new() };
    let phi0 = kernel.phi_sq(0.0);

    for i in 0..n {
        conv[i] += m[i] * phi0;
        let xi = x[i];
        let ui = u[i];
        let mi = m[i];
        for j in (i + 1)..n {
            let mut z = [0.0; D];
            let mut du = [0.0; D];
            let mut r2 = 0.0;
            for k in 0..D {
                z[k] = xi[k] - x[j][k];
                du[k] = u[j][k] - ui[k];
                r2 += z[k] * z[k];
            }
            let mj = m[j];
            if want_r {
                let (phi, g) = kernel.phi_and_grad_factor_sq(r2);
                conv[i] += mj * phi;
                conv[j] += mi * phi;
                for k in 0..D {
                    force[i][k] += mj * phi * du[k];
                    force[j][k] -= mi * phi * du[k];
                }
                // both orientations give the same outer product Δu ⊗ z
                for k in 0..D {
                    for l in 0..D {
                        let c = g * du[k] * z[l];
                        r_acc[i][k][l] += mj * c;
                        r_acc[j][k][l] += mi * c;
                    }
                }
            } else {
                let phi = kernel.phi_sq(r2);
                conv[i] += mj * phi;
                conv[j] += mi * phi;
                for k in 0..D {
                    force[i][k] += mj * phi * du[k];
                    force[j][k] -= mi * phi * du[k];
                }
            }
        }
    }

    let gradient_forcing = if with_gradient_forcing {
        Some(if want_r { r_acc } else { vec![[[0.0; D]; D]; n] })
    } else {
        None
    };
    PairSums {
        conv,
        force,
        gradient_forcing,
    }
}
