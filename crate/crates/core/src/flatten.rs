//! Root-of-unity mixing of an orthonormal peak family into flat sections,
//! and the `ℓ∞ → L∞` norm of the coherent frame map.

use std::f64::consts::PI;

use num_complex::Complex64 as C64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::constants::eta_ceiling;
use crate::error::{Error, Result};
use crate::frame::Frame;
use crate::geometry::random_lift;
use crate::kernel::{ln_cos_distance, KernelModel, SectionExpansion};
use crate::linalg::{matmul, CMatrix};
use crate::mesh::compass_maximize;
use crate::multiindex::MonomialBasis;
use crate::whitening::columns_to_sections;

/// Flat sections `s_j = n^{-1/2} Σ_q ζ^{qj} Ψ_{τ^q}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FlatFamily {
    pub m: usize,
    pub k: usize,
    pub sections: Vec<SectionExpansion>,
    /// Free-form description of the frame and whitening that produced it.
    pub provenance: String,
}

impl FlatFamily {
    pub fn n(&self) -> usize {
        self.sections.len()
    }

    /// `ζ = e^{2πi/n}`.
    pub fn root(&self) -> C64 {
        C64::from_polar(1.0, 2.0 * PI / self.n() as f64)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}

/// `D_{qj} = ζ^{qj} / √n` for `q, j = 1..n`, each entry from the exact
/// exponent `(q j mod n) / n`.
pub fn dft_matrix(n: usize) -> CMatrix {
    let scale = 1.0 / (n as f64).sqrt();
    CMatrix::from_fn(n, n, |q, j| {
        let e = ((q + 1) * (j + 1)) % n;
        C64::from_polar(scale, 2.0 * PI * e as f64 / n as f64)
    })
}

/// Mix the columns of a coefficient matrix: column `j` of the result is
/// `s_j`.
pub fn dft_mix_matrix(psi: &CMatrix) -> CMatrix {
    matmul(psi, &dft_matrix(psi.ncols()))
}

pub fn dft_mix(psis: &[SectionExpansion]) -> Result<FlatFamily> {
    let first = psis.first().ok_or(Error::EmptyFrame)?;
    for p in psis {
        first.same_shape(p)?;
    }
    let basis = MonomialBasis::new(first.m, first.k);
    let mut mat = CMatrix::zeros(basis.len(), psis.len());
    for (j, p) in psis.iter().enumerate() {
        for (i, c) in p.orthonormal_coeffs(&basis).into_iter().enumerate() {
            mat[(i, j)] = c;
        }
    }
    let mixed = dft_mix_matrix(&mat);
    Ok(FlatFamily {
        m: first.m,
        k: first.k,
        sections: columns_to_sections(&mixed, &basis),
        provenance: String::new(),
    })
}

/// The vectors `v^{(j)}_ν = Σ_q ζ^{qj} B_{τ^q ν}`, one row per section, so
/// that `s_j = n^{-1/2} Σ_ν v^{(j)}_ν Φ_ν`.
pub fn mixing_vectors(b: &CMatrix) -> CMatrix {
    let n = b.nrows();
    let d = dft_matrix(n) * C64::new((n as f64).sqrt(), 0.0);
    matmul(&d.transpose(), b)
}

/// Estimate of `‖F_k‖ = sup_x Σ_μ |Φ_μ(x)|`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FkEstimate {
    /// `√diag · sup_x Σ_μ P_k(x, z_μ)`.
    pub value: f64,
    /// `sup_x Σ_μ P_k(x, z_μ)`.
    pub kernel_sum: f64,
    pub argmax: Vec<C64>,
    /// `value / k^{m/2}`.
    pub normalized: f64,
    /// `(1 + √(2π)/ã)^{2m}`, the Poisson ceiling for `kernel_sum`.
    pub theta_ceiling: f64,
    pub samples: usize,
}

/// `Σ_μ P_k(x, z_μ)`.
pub fn kernel_sum(frame: &Frame, x: &[C64]) -> f64 {
    let k = frame.k as f64;
    frame
        .lifts
        .iter()
        .map(|y| (k * ln_cos_distance(x, y.coords())).exp())
        .sum()
}

/// Sup of `Σ_μ |Φ_μ|` over the frame points, `extra` points, seeded uniform
/// samples, and compass refinement of the best candidates.
pub fn fk_norm(frame: &Frame, extra: &[Vec<C64>], random_samples: usize, seed: u64) -> Result<FkEstimate> {
    if frame.is_empty() {
        return Err(Error::EmptyFrame);
    }
    let model = KernelModel::new(frame.m, frame.k)?;
    let mut candidates: Vec<Vec<C64>> = frame.lifts.iter().map(|l| l.coords().to_vec()).collect();
    candidates.extend(extra.iter().cloned());
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    candidates.extend((0..random_samples).map(|_| random_lift(frame.m, &mut rng).coords().to_vec()));
    let mut scored: Vec<(f64, usize)> = candidates
        .iter()
        .enumerate()
        .map(|(i, x)| (kernel_sum(frame, x), i))
        .collect();
    scored.sort_by(|a, b| b.0.total_cmp(&a.0));
    let f = |x: &[C64]| kernel_sum(frame, x);
    let step = 0.25 / (frame.k.max(1) as f64).sqrt();
    let (mut best, mut argmax) = (scored[0].0, candidates[scored[0].1].clone());
    for &(_, i) in scored.iter().take(16) {
        let (v, x) = compass_maximize(&f, &candidates[i], step, step * 1e-4);
        if v > best {
            best = v;
            argmax = x;
        }
    }
    let value = model.diag.sqrt() * best;
    let a_tilde = frame.spec.a_tilde();
    Ok(FkEstimate {
        value,
        kernel_sum: best,
        argmax,
        normalized: value / (frame.k as f64).powf(frame.m as f64 / 2.0),
        theta_ceiling: eta_ceiling(a_tilde, 2 * frame.m) + 1.0,
        samples: candidates.len(),
    })
}

/// Reference family on `ℂℙ¹`:
/// `s_j = (k+1)^{-1/2} Σ_q e^{2πijq/(k+1)} σ_q χ_q` with `χ_q` the normalized
/// monomials. Any sign vector gives an orthonormal family.
pub fn bourgain_reference(signs: &[i8], k: usize) -> Result<Vec<SectionExpansion>> {
    if signs.len() != k + 1 {
        return Err(Error::Dimension {
            expected: k + 1,
            got: signs.len(),
        });
    }
    if signs.iter().any(|&s| s != 1 && s != -1) {
        return Err(Error::InvalidArgument("signs must be +1 or -1".into()));
    }
    let basis = MonomialBasis::new(1, k);
    let n = k + 1;
    let scale = 1.0 / (n as f64).sqrt();
    Ok((0..n)
        .map(|j| {
            let b: Vec<C64> = (0..n)
                .map(|q| C64::from_polar(scale * signs[q] as f64, 2.0 * PI * ((j * q) % n) as f64 / n as f64))
                .collect();
            SectionExpansion::from_orthonormal_coeffs(&basis, &b)
        })
        .collect())
}
