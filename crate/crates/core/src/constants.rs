//! Gaussian lattice sums and the density constants they define.
//!
//! For the cubic lattice `a_m` solves `θ(a)^{2m} = 2` with
//! `θ(a) = Σ_j exp(-a² j²/2)`, and `β_m = π^m / a_m^{2m}`. For the hexagonal
//! lattice `α_m` solves `Θ(α)^m = 2` with
//! `Θ(α) = Σ_{μ ∈ ℤ²} exp(-α² (μ₁² + μ₂² + μ₁μ₂)/2)`, and
//! `β′_m = (2π / (√3 α_m²))^m`.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const TAIL_TARGET: f64 = 1e-16;

/// A truncated lattice sum together with its truncation radius and a rigorous
/// bound on the discarded tail.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ThetaSum {
    pub value: f64,
    pub radius: usize,
    pub tail_bound: f64,
}

fn theta_1d_radius(a: f64, radius: usize) -> ThetaSum {
    let a2 = a * a;
    let tail = |j: usize| {
        let j1 = (j + 1) as f64;
        2.0 * (-0.5 * a2 * j1 * j1).exp() / (1.0 - (-a2 * j1).exp())
    };
    // smallest terms first
    let mut sum = 0.0;
    for j in (1..=radius).rev() {
        let jf = j as f64;
        sum += (-0.5 * a2 * jf * jf).exp();
    }
    ThetaSum {
        value: 1.0 + 2.0 * sum,
        radius,
        tail_bound: tail(radius),
    }
}

/// `Σ_{j ∈ ℤ} exp(-a² j² / 2)`, truncated at the first `J` whose tail bound
/// `2 e^{-a²(J+1)²/2} / (1 - e^{-a²(J+1)})` is below `1e-16`.
pub fn theta_1d(a: f64) -> Result<ThetaSum> {
    if !(a > 0.0) || !a.is_finite() {
        return Err(Error::InvalidArgument(format!("theta_1d needs a > 0, got {a}")));
    }
    let a2 = a * a;
    let mut radius = 0usize;
    loop {
        let j1 = (radius + 1) as f64;
        let bound = 2.0 * (-0.5 * a2 * j1 * j1).exp() / (1.0 - (-a2 * j1).exp());
        if bound < TAIL_TARGET {
            break;
        }
        radius += 1;
    }
    Ok(theta_1d_radius(a, radius))
}

fn hex_tail(alpha: f64, radius: usize) -> f64 {
    // Q(μ) ≥ ‖μ‖²/2 ≥ s²/2 on the shell max(|μ₁|,|μ₂|) = s, which has 8s points
    let c = alpha * alpha / 4.0;
    let s = (radius + 1) as f64;
    let rho = (s + 1.0) / s * (-c * (2.0 * s + 1.0)).exp();
    if rho >= 1.0 {
        return f64::INFINITY;
    }
    8.0 * s * (-c * s * s).exp() / (1.0 - rho)
}

fn theta_hex_radius(alpha: f64, radius: usize) -> ThetaSum {
    let a2 = alpha * alpha;
    let r = radius as i64;
    let mut sum = 0.0;
    // shells from the outside in
    for s in (1..=r).rev() {
        let mut shell = 0.0;
        for m1 in -s..=s {
            for m2 in -s..=s {
                if m1.abs().max(m2.abs()) != s {
                    continue;
                }
                let q = (m1 * m1 + m2 * m2 + m1 * m2) as f64;
                shell += (-0.5 * a2 * q).exp();
            }
        }
        sum += shell;
    }
    ThetaSum {
        value: 1.0 + sum,
        radius,
        tail_bound: hex_tail(alpha, radius),
    }
}

/// `Σ_{μ ∈ ℤ²} exp(-α² (μ₁² + μ₂² + μ₁μ₂) / 2)`, truncated to the box
/// `max |μ_i| ≤ R` with the tail bounded through `Q(μ) ≥ ‖μ‖²/2`.
pub fn theta_hex(alpha: f64) -> Result<ThetaSum> {
    if !(alpha > 0.0) || !alpha.is_finite() {
        return Err(Error::InvalidArgument(format!("theta_hex needs alpha > 0, got {alpha}")));
    }
    let mut radius = 0usize;
    while hex_tail(alpha, radius) >= TAIL_TARGET {
        radius += 1;
    }
    Ok(theta_hex_radius(alpha, radius))
}

/// Root of a strictly decreasing function: bisection down to width `1e-10`,
/// then two secant steps.
fn solve_decreasing<F: Fn(f64) -> f64>(f: F, mut lo: f64, mut hi: f64, what: &'static str) -> Result<f64> {
    let (flo, fhi) = (f(lo), f(hi));
    if !(flo > 0.0 && fhi < 0.0) {
        return Err(Error::Bracket(what));
    }
    while hi - lo > 1e-10 {
        let mid = 0.5 * (lo + hi);
        if f(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let (mut x0, mut x1) = (lo, hi);
    let (mut f0, mut f1) = (f(x0), f(x1));
    for _ in 0..2 {
        if f1 == f0 {
            break;
        }
        let x2 = x1 - f1 * (x1 - x0) / (f1 - f0);
        x0 = x1;
        f0 = f1;
        x1 = x2;
        f1 = f(x1);
    }
    Ok(if f1.abs() <= f0.abs() { x1 } else { x0 })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BetaSolution {
    pub m: usize,
    /// `a_m` or `α_m`.
    pub spacing: f64,
    /// `β_m` or `β′_m`.
    pub beta: f64,
    /// `|θ(spacing) - target|`.
    pub residual: f64,
    pub radius: usize,
}

fn check_m(m: usize) -> Result<()> {
    if !(1..=12).contains(&m) {
        return Err(Error::InvalidArgument(format!("m must be in 1..=12, got {m}")));
    }
    Ok(())
}

/// `(a_m, β_m)` with `θ(a_m) = 2^{1/(2m)}`.
pub fn solve_beta(m: usize) -> Result<BetaSolution> {
    check_m(m)?;
    let target = 2f64.powf(1.0 / (2 * m) as f64);
    let f = |a: f64| theta_1d(a).map(|t| t.value - target).unwrap_or(f64::NAN);
    let a = solve_decreasing(f, 0.5, 20.0, "theta_1d")?;
    let t = theta_1d(a)?;
    Ok(BetaSolution {
        m,
        spacing: a,
        beta: PI.powi(m as i32) / a.powi(2 * m as i32),
        residual: (t.value - target).abs(),
        radius: t.radius,
    })
}

/// `(α_m, β′_m)` with `Θ(α_m) = 2^{1/m}`.
pub fn solve_beta_prime(m: usize) -> Result<BetaSolution> {
    check_m(m)?;
    let target = 2f64.powf(1.0 / m as f64);
    let f = |a: f64| theta_hex(a).map(|t| t.value - target).unwrap_or(f64::NAN);
    let alpha = solve_decreasing(f, 0.5, 20.0, "theta_hex")?;
    let t = theta_hex(alpha)?;
    Ok(BetaSolution {
        m,
        spacing: alpha,
        beta: (2.0 * PI / (3f64.sqrt() * alpha * alpha)).powi(m as i32),
        residual: (t.value - target).abs(),
        radius: t.radius,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConstantsRow {
    pub m: usize,
    pub a_m: f64,
    pub beta_m: f64,
    pub alpha_m: f64,
    pub beta_prime_m: f64,
    pub residual_cubic: f64,
    pub residual_hex: f64,
    pub radius_cubic: usize,
    pub radius_hex: usize,
    /// Rows with `m > 6` go beyond the published table.
    pub extrapolated: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConstantsTable {
    pub rows: Vec<ConstantsRow>,
}

impl ConstantsTable {
    pub fn compute(max_m: usize) -> Result<Self> {
        check_m(max_m)?;
        let rows = (1..=max_m)
            .map(|m| {
                let c = solve_beta(m)?;
                let h = solve_beta_prime(m)?;
                Ok(ConstantsRow {
                    m,
                    a_m: c.spacing,
                    beta_m: c.beta,
                    alpha_m: h.spacing,
                    beta_prime_m: h.beta,
                    residual_cubic: c.residual,
                    residual_hex: h.residual,
                    radius_cubic: c.radius,
                    radius_hex: h.radius,
                    extrapolated: m > 6,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { rows })
    }

    pub fn row(&self, m: usize) -> Option<&ConstantsRow> {
        self.rows.iter().find(|r| r.m == m)
    }

    pub fn write_csv<W: std::io::Write>(&self, w: W) -> Result<()> {
        let mut wtr = csv::Writer::from_writer(w);
        for r in &self.rows {
            wtr.serialize(r)?;
        }
        wtr.flush()?;
        Ok(())
    }
}

/// The Poisson-summation ceiling `(1 + √(2π)/ã)^{exponent} - 1` for the
/// off-diagonal row sum of a cubic frame with effective spacing `ã`.
pub fn eta_ceiling(a_tilde: f64, exponent: usize) -> f64 {
    (1.0 + (2.0 * PI).sqrt() / a_tilde).powi(exponent as i32) - 1.0
}

/// The lattice-limit row sum `θ(ã)^{2m} - 1` of a cubic frame (the `ℓ∞`
/// norm of the off-diagonal Gaussian Gram matrix on `ℤ^{2m}`).
pub fn eta_lattice_limit(a_tilde: f64, m: usize) -> Result<f64> {
    Ok(theta_1d(a_tilde)?.value.powi(2 * m as i32) - 1.0)
}

/// Same for the hexagonal lattice: `Θ(α̃)^m - 1`.
pub fn eta_lattice_limit_hex(alpha_tilde: f64, m: usize) -> Result<f64> {
    Ok(theta_hex(alpha_tilde)?.value.powi(m as i32) - 1.0)
}

/// `η = [Σ_j exp(-π j² / (2 β^{1/m}))]^{2m} - 1`, the row sum of the limit
/// lattice whose density fraction is `β`.
pub fn eta_for_beta(beta: f64, m: usize) -> Result<f64> {
    if !(beta > 0.0) {
        return Err(Error::InvalidArgument(format!("beta must be positive, got {beta}")));
    }
    // a² = π / β^{1/m}
    let a = (PI / beta.powf(1.0 / m as f64)).sqrt();
    eta_lattice_limit(a, m)
}
