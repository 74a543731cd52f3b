//! Closed-form decay rates, amplitudes and thresholds of the flocking and
//! regularity estimates, evaluated from scalar inputs.

use serde::Serialize;

/// λ = ½·min{m₀φ₋/(m₀²φ₊²/a + 3/2), √a/2}.
pub fn lambda(a: f64, m0: f64, phi_minus: f64, phi_plus: f64) -> f64 {
    let kp = m0 * phi_plus;
    0.5 * (m0 * phi_minus / (kp * kp / a + 1.5)).min(a.sqrt() / 2.0)
}

/// λ₁ = ¼·min{m₀φ₋/((1 + (m₀²φ₊² + 1)/a) + ¼), √a/2}, the rate of the pointwise functional.
pub fn lambda1(a: f64, m0: f64, phi_minus: f64, phi_plus: f64) -> f64 {
    let kp = m0 * phi_plus;
    0.25 * (m0 * phi_minus / ((1.0 + (kp * kp + 1.0) / a) + 0.25)).min(a.sqrt() / 2.0)
}

/// C₀ = (1/(2m₀φ₋) + 2λ₁/a)·φ₊².
pub fn c0_linf(a: f64, m0: f64, phi_minus: f64, phi_plus: f64, lambda1: f64) -> f64 {
    (1.0 / (2.0 * m0 * phi_minus) + 2.0 * lambda1 / a) * phi_plus * phi_plus
}

/// C_∞ = 4(1 + φ₊²m₀²(2/(m₀φ₋λ) + 4/a)).
pub fn c_inf(a: f64, m0: f64, phi_minus: f64, phi_plus: f64, lambda: f64) -> f64 {
    4.0 * (1.0 + phi_plus * phi_plus * m0 * m0 * (2.0 / (m0 * phi_minus * lambda) + 4.0 / a))
}

/// C_∞ = 4(1 + 4C₀m₀²/λ), the amplitude as it comes out of the pointwise argument.
pub fn c_inf_proof(c0: f64, m0: f64, lambda: f64) -> f64 {
    4.0 * (1.0 + 4.0 * c0 * m0 * m0 / lambda)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MuConstants {
    pub mu1: f64,
    pub mu2: f64,
    pub mu3: f64,
}

/// Rate and comparability constants of the constant-kernel pair functional with
/// K = m₀φ; `None` unless K > A/√a.
pub fn mu_constants(a: f64, a_hi: f64, k: f64) -> Option<MuConstants> {
    if !(a > 0.0 && a_hi > 0.0 && k > a_hi / a.sqrt()) {
        return None;
    }
    let s = a * k * k / (a_hi * a_hi);
    let mu1 = s - (s * s - s + 1.0).sqrt();
    let b = a * a * k / (a_hi * a_hi) + k / 2.0;
    let disc = b * b - 4.0 * a * (a * k * k / (2.0 * a_hi * a_hi) - 0.25);
    if disc < 0.0 {
        return None;
    }
    let mu2 = (b + disc.sqrt()) / (2.0 * a);
    let mu3 = (b - disc.sqrt()) / (2.0 * a);
    Some(MuConstants { mu1, mu2, mu3 })
}

/// β = 2aK/A², the velocity weight of the constant-kernel pair functional.
pub fn beta_cross(a: f64, a_hi: f64, k: f64) -> f64 {
    2.0 * a * k / (a_hi * a_hi)
}

/// Uniform bound on the particle energy for φ(r) = c₀(1+r²)^(−β), β ≤ 1; a constant
/// kernel is the case β = 0, c₀ = K̄. β = 1 uses the logarithmic limit.
pub fn r0_power_law(a: f64, p0: f64, e0: f64, c0: f64, beta: f64, m0: f64, phi_plus: f64) -> Option<f64> {
    if !(a > 0.0 && c0 > 0.0 && m0 > 0.0 && (0.0..=1.0).contains(&beta)) {
        return None;
    }
    let base = 1.0 + 8.0 * p0 / a;
    let drive = 2.0 * phi_plus * e0 / (a * c0 * m0);
    let inner = if beta == 1.0 {
        base * drive.exp()
    } else {
        let q = 1.0 - beta;
        (base.powf(q) + q * drive).powf(1.0 / q)
    };
    Some(a / 8.0 * (inner - 1.0))
}

/// Constants of the a-priori amplitude bound under general convex confinement.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AmplitudeConstants {
    pub c: f64,
    pub c_0: f64,
    pub c_f: f64,
    pub c_plus: f64,
}

pub fn amplitude_constants(a: f64, a_hi: f64, m0: f64, phi_minus: f64, phi_plus: f64, e0: f64) -> AmplitudeConstants {
    let kp = m0 * phi_plus;
    let c = (m0 * phi_minus / (a_hi + 2.0 * (a_hi + kp * kp))).min((a / (8.0 * a_hi * a_hi)).sqrt());
    let c_0 = (2.0 / (m0 * phi_minus) + 4.0 * c) * phi_plus * phi_plus * m0 * e0;
    let c_f = 2.0 * a_hi * c_0 / (a * a * c);
    let c_plus = 2.0 * a_hi.sqrt() * (1.0 + 1.0 / a.sqrt());
    AmplitudeConstants { c, c_0, c_f, c_plus }
}

/// max{C₊·max(|u₀| + |x|), 2(1 + 1/√a)√C_F}.
pub fn u_max_apriori(k: &AmplitudeConstants, a: f64, max_u0_plus_x: f64) -> f64 {
    (k.c_plus * max_u0_plus_x).max(2.0 * (1.0 + 1.0 / a.sqrt()) * k.c_f.sqrt())
}

/// C_* = (64/λ)·m₀·|φ′|_∞·√C_∞.
pub fn c_star(lambda: f64, m0: f64, dphi_inf: f64, c_inf: f64) -> f64 {
    64.0 / lambda * m0 * dphi_inf * c_inf.sqrt()
}

/// ω_max = max|ω₀| + (32/λ)·m₀·|φ′|_∞·√(C_∞·δE_∞(0)).
pub fn omega_bound(omega0_max: f64, lambda: f64, m0: f64, dphi_inf: f64, c_inf: f64, delta_einf0: f64) -> f64 {
    omega0_max + 32.0 / lambda * m0 * dphi_inf * (c_inf * delta_einf0).sqrt()
}

/// One entry of a [`ConstantsReport`].
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Constant {
    pub value: Option<f64>,
    pub formula: &'static str,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

impl Constant {
    fn of(value: f64, formula: &'static str) -> Self {
        Constant {
            value: Some(value),
            formula,
            note: None,
        }
    }

    fn missing(formula: &'static str, note: impl Into<String>) -> Self {
        Constant {
            value: None,
            formula,
            note: Some(note.into()),
        }
    }

    fn maybe(value: Option<f64>, formula: &'static str, note: &str) -> Self {
        match value {
            Some(v) => Constant::of(v, formula),
            None => Constant::missing(formula, note),
        }
    }
}

/// Scalar inputs for [`constants`]. Optional fields unlock the constants that need them.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct ConstantsInput {
    pub a: f64,
    pub a_hi: f64,
    pub m0: f64,
    pub phi_minus: f64,
    pub phi_plus: f64,
    pub dphi_inf: f64,
    /// K = m₀K̄ for a constant kernel.
    pub k: Option<f64>,
    /// Total energy and maximal particle energy at t = 0.
    pub e0: f64,
    pub p0: f64,
    /// (c₀, β) of a power-law kernel, or (K̄, 0) for a constant one.
    pub power_law: Option<(f64, f64)>,
    pub max_u0_plus_x: Option<f64>,
    pub eta_s0_max: Option<f64>,
    pub omega0_max: Option<f64>,
    pub delta_einf0: Option<f64>,
    /// Velocity bound entering the general 2D threshold.
    pub u_max: Option<f64>,
    pub phi_minus_source: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConstantsReport {
    pub phi_minus_source: String,
    pub lambda: Constant,
    pub lambda1: Constant,
    pub c0_linf: Constant,
    pub c_inf: Constant,
    pub c_inf_proof: Constant,
    pub c_inf_conservative: Constant,
    pub mu1: Constant,
    pub mu2: Constant,
    pub mu3: Constant,
    pub beta_cross: Constant,
    pub r0: Constant,
    pub c: Constant,
    pub c_0: Constant,
    pub c_f: Constant,
    pub c_plus: Constant,
    pub u_max_apriori: Constant,
    pub c_star: Constant,
    pub c1_squared: Constant,
    pub omega_max: Constant,
    pub c_max: Constant,
    pub c_a: Constant,
    pub c2: Constant,
}

impl ConstantsReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("constants report serialises")
    }
}

pub fn constants(inp: &ConstantsInput) -> ConstantsReport {
    let ConstantsInput {
        a,
        a_hi,
        m0,
        phi_minus,
        phi_plus,
        dphi_inf,
        ..
    } = *inp;
    let quadratic_ok = a > 0.0 && m0 > 0.0 && phi_minus > 0.0;
    let needs = "requires a > 0, m0 > 0 and phi_minus > 0";

    let lam = quadratic_ok.then(|| lambda(a, m0, phi_minus, phi_plus));
    let lam1 = quadratic_ok.then(|| lambda1(a, m0, phi_minus, phi_plus));
    let c0 = lam1.map(|l1| c0_linf(a, m0, phi_minus, phi_plus, l1));
    let cinf = lam.map(|l| c_inf(a, m0, phi_minus, phi_plus, l));
    let cinf_p = lam.zip(c0).map(|(l, c0)| c_inf_proof(c0, m0, l));
    let cinf_c = cinf.zip(cinf_p).map(|(x, y)| x.max(y));

    let mu = inp.k.and_then(|k| mu_constants(a, a_hi, k));
    let mu_note = match inp.k {
        None => "requires a constant kernel".to_string(),
        Some(k) => format!("requires K > A/sqrt(a); K = {k}, A/sqrt(a) = {}", a_hi / a.sqrt()),
    };
    let mu_const = |f: fn(&MuConstants) -> f64, formula| match &mu {
        Some(m) => Constant::of(f(m), formula),
        None => Constant::missing(formula, mu_note.clone()),
    };

    let r0 = match inp.power_law {
        Some((c0k, beta)) => Constant::maybe(
            r0_power_law(a, inp.p0, inp.e0, c0k, beta, m0, phi_plus),
            "(a/8)[((1+8P0/a)^(1-β) + 2(1-β)φ+E0/(a c0 m0))^(1/(1-β)) - 1]; β=1: (a/8)[(1+8P0/a)exp(2φ+E0/(a c0 m0)) - 1]",
            "requires beta <= 1",
        ),
        None => Constant::missing("(a/8)[...]", "requires a power-law or constant kernel"),
    };

    let amp = (quadratic_ok && a_hi > 0.0).then(|| amplitude_constants(a, a_hi, m0, phi_minus, phi_plus, inp.e0));
    let amp_const = |f: fn(&AmplitudeConstants) -> f64, formula| match &amp {
        Some(k) => Constant::of(f(k), formula),
        None => Constant::missing(formula, needs),
    };
    let u_apriori = amp.zip(inp.max_u0_plus_x).map(|(k, m)| u_max_apriori(&k, a, m));

    let cstar = lam.zip(cinf).map(|(l, c)| c_star(l, m0, dphi_inf, c));
    let c1_sq = cstar
        .zip(inp.eta_s0_max.zip(inp.delta_einf0))
        .map(|(cs, (eta, de))| (m0 * phi_minus).powi(2) - (eta + cs * de.sqrt()).powi(2) - 4.0 * a);
    let omega_max = lam
        .zip(cinf)
        .zip(inp.omega0_max.zip(inp.delta_einf0))
        .map(|((l, c), (w, de))| omega_bound(w, l, m0, dphi_inf, c, de));

    let c_a = (m0 * phi_minus).powi(2) / 2.0 - 2.0 * a_hi;
    let c_max = inp.u_max.map(|u| 8.0 * dphi_inf * m0 * u + 2.0 * a_hi);
    let c2 = c_max.and_then(|cm| {
        let disc = c_a * c_a - cm * cm;
        (cm < c_a && disc >= 0.0).then(|| (c_a - disc.sqrt()).sqrt())
    });

    ConstantsReport {
        phi_minus_source: inp.phi_minus_source.clone(),
        lambda: Constant::maybe(lam, "½·min{m0φ-/(m0²φ+²/a + 3/2), √a/2}", needs),
        lambda1: Constant::maybe(lam1, "¼·min{m0φ-/((1 + (m0²φ+²+1)/a) + ¼), √a/2}", needs),
        c0_linf: Constant::maybe(c0, "(1/(2m0φ-) + 2λ1/a)·φ+²", needs),
        c_inf: Constant::maybe(cinf, "4(1 + φ+²m0²(2/(m0φ-λ) + 4/a))", needs),
        c_inf_proof: Constant::maybe(cinf_p, "4(1 + 4·C0·m0²/λ)", needs),
        c_inf_conservative: Constant::maybe(cinf_c, "max of the two C_inf forms", needs),
        mu1: mu_const(|m| m.mu1, "aK²/A² - √(a²K⁴/A⁴ - aK²/A² + 1)"),
        mu2: mu_const(|m| m.mu2, "(1/2a)[(a²K/A² + K/2) + √((a²K/A² + K/2)² - 4a(aK²/(2A²) - ¼))]"),
        mu3: mu_const(|m| m.mu3, "(1/2a)[(a²K/A² + K/2) - √((a²K/A² + K/2)² - 4a(aK²/(2A²) - ¼))]"),
        beta_cross: match inp.k {
            Some(k) if a_hi > 0.0 => Constant::of(beta_cross(a, a_hi, k), "2aK/A²"),
            _ => Constant::missing("2aK/A²", "requires a constant kernel"),
        },
        r0,
        c: amp_const(|k| k.c, "min{m0φ-/(A + 2(A + m0²φ+²)), √(a/(8A²))}"),
        c_0: amp_const(|k| k.c_0, "(2/(m0φ-) + 4c)·φ+²·m0·E0"),
        c_f: amp_const(|k| k.c_f, "2A·C_0/(a²c)"),
        c_plus: amp_const(|k| k.c_plus, "2√A(1 + 1/√a)"),
        u_max_apriori: Constant::maybe(
            u_apriori,
            "max{C+·max(|u0|+|x|), 2(1 + 1/√a)√C_F}",
            "requires max(|u0|+|x|) and positive a, A",
        ),
        c_star: Constant::maybe(cstar, "(64/λ)·m0·|φ'|∞·√C_inf", needs),
        c1_squared: Constant::maybe(c1_sq, "m0²φ-² - (max|ηS0| + C*·√δE∞0)² - 4a", "requires max|ηS0| and δE∞0"),
        omega_max: Constant::maybe(omega_max, "max|ω0| + (32/λ)·m0·|φ'|∞·√(C_inf·δE∞0)", "requires max|ω0| and δE∞0"),
        c_max: Constant::maybe(c_max, "8|φ'|∞·m0·u_max + 2A", "requires u_max"),
        c_a: Constant::of(c_a, "m0²φ-²/2 - 2A"),
        c2: Constant::maybe(c2, "√(C_A - √(C_A² - C_max²))", "requires u_max and C_max < C_A"),
    }
}
