//! Exact `L²` inner products, sup-norm estimates, the flat bound, and the
//! polynomial and eigenfunction outputs.

use num_complex::Complex64 as C64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::flatten::FlatFamily;
use crate::geometry::{fs_volume, random_lift};
use crate::kernel::SectionExpansion;
use crate::linalg::{matmul, CMatrix};
use crate::mesh::{eval_poly, sup_norm_poly, MeshConfig, SupEstimate};
use crate::multiindex::MonomialBasis;

/// `⟨s_A, s_B⟩ = Σ_α ‖z^α‖² a_α conj(b_α)`.
pub fn l2_inner(a: &SectionExpansion, b: &SectionExpansion) -> Result<C64> {
    a.same_shape(b)?;
    let basis = MonomialBasis::new(a.m, a.k);
    Ok(l2_inner_with(&basis, a, b))
}

fn l2_inner_with(basis: &MonomialBasis, a: &SectionExpansion, b: &SectionExpansion) -> C64 {
    a.coeffs
        .iter()
        .zip(&b.coeffs)
        .enumerate()
        .map(|(i, (x, y))| x * y.conj() * basis.weight(i))
        .sum()
}

pub fn l2_norm(s: &SectionExpansion) -> f64 {
    let basis = MonomialBasis::new(s.m, s.k);
    l2_inner_with(&basis, s, s).re.sqrt()
}

/// Gram matrix `G_{ij} = ⟨s_i, s_j⟩` of a family.
pub fn gram_of(sections: &[SectionExpansion]) -> Result<CMatrix> {
    let first = sections.first().ok_or(Error::EmptyFrame)?;
    for s in sections {
        first.same_shape(s)?;
    }
    let basis = MonomialBasis::new(first.m, first.k);
    let b = CMatrix::from_fn(basis.len(), sections.len(), |i, j| {
        sections[j].coeffs[i] * (0.5 * basis.ln_weight(i)).exp()
    });
    Ok(matmul(&b.transpose(), &b.map(|c| c.conj())))
}

/// Sup-norm estimate `sup_M |s|_{h^k} = sup_{S^{2m+1}} |p|`.
pub fn sup_norm(s: &SectionExpansion, mesh: &MeshConfig) -> SupEstimate {
    let basis = MonomialBasis::new(s.m, s.k);
    sup_norm_poly(&basis, &s.coeffs, mesh)
}

/// Per-family sup-norm certificate.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NormCertificate {
    pub m: usize,
    pub k: usize,
    pub sup: Vec<f64>,
    pub l2: Vec<f64>,
    /// `‖s‖_∞ √Vol / ‖s‖₂`.
    pub ratio: Vec<f64>,
    pub argmax: Vec<Vec<C64>>,
    pub radial: usize,
    pub phase: usize,
    /// Refinement history of each section.
    pub history: Vec<Vec<f64>>,
    /// Upper reference value the sup norms are compared against.
    pub ceiling: f64,
}

impl NormCertificate {
    pub fn max_sup(&self) -> f64 {
        self.sup.iter().cloned().fold(0.0, f64::max)
    }

    pub fn min_sup(&self) -> f64 {
        self.sup.iter().cloned().fold(f64::INFINITY, f64::min)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}

pub fn certify_family(sections: &[SectionExpansion], mesh: &MeshConfig, ceiling: f64) -> Result<NormCertificate> {
    let first = sections.first().ok_or(Error::EmptyFrame)?;
    let vol = fs_volume(first.m);
    let mut cert = NormCertificate {
        m: first.m,
        k: first.k,
        sup: vec![],
        l2: vec![],
        ratio: vec![],
        argmax: vec![],
        radial: mesh.radial_count(first.k),
        phase: mesh.phase_count(first.k),
        history: vec![],
        ceiling,
    };
    for s in sections {
        let est = sup_norm(s, mesh);
        let l2 = l2_norm(s);
        cert.ratio.push(est.value * vol.sqrt() / l2);
        cert.sup.push(est.value);
        cert.l2.push(l2);
        cert.argmax.push(est.argmax);
        cert.history.push(est.history);
    }
    Ok(cert)
}

/// `(1 + η) / √(β (1 - η)) · Vol^{-1/2}`.
pub fn flat_bound(beta: f64, eta: f64, vol: f64) -> Result<f64> {
    if !(0.0..1.0).contains(&eta) || !(beta > 0.0) || !(vol > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "flat_bound needs 0 <= eta < 1, beta > 0, vol > 0 (got {eta}, {beta}, {vol})"
        )));
    }
    Ok((1.0 + eta) / (beta * (1.0 - eta)).sqrt() / vol.sqrt())
}

/// One term `c · z^α` of an emitted polynomial.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Term {
    pub exponent: Vec<u32>,
    pub re: f64,
    pub im: f64,
}

/// A homogeneous polynomial on `ℂ^{m+1}` with its sphere norms.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PolynomialRecord {
    pub m: usize,
    pub k: usize,
    pub index: usize,
    pub terms: Vec<Term>,
    pub sup: f64,
    /// `L²` norm for the normalized measure on `S^{2m+1}`.
    pub sphere_l2: f64,
    /// `sup / sphere_l2`.
    pub sphere_ratio: f64,
}

impl PolynomialRecord {
    pub fn from_section(s: &SectionExpansion, index: usize, mesh: &MeshConfig) -> Self {
        let basis = MonomialBasis::new(s.m, s.k);
        let sup = sup_norm_poly(&basis, &s.coeffs, mesh).value;
        let sphere_l2 = l2_norm(s) / fs_volume(s.m).sqrt();
        Self {
            m: s.m,
            k: s.k,
            index,
            terms: basis
                .exponents()
                .iter()
                .zip(&s.coeffs)
                .map(|(e, c)| Term {
                    exponent: e.clone(),
                    re: c.re,
                    im: c.im,
                })
                .collect(),
            sup,
            sphere_l2,
            sphere_ratio: sup / sphere_l2,
        }
    }

    pub fn section(&self) -> SectionExpansion {
        SectionExpansion {
            m: self.m,
            k: self.k,
            coeffs: self.terms.iter().map(|t| C64::new(t.re, t.im)).collect(),
        }
    }
}

/// Every member of the family as a polynomial record.
pub fn emit_polynomials(family: &FlatFamily, mesh: &MeshConfig) -> Vec<PolynomialRecord> {
    family
        .sections
        .iter()
        .enumerate()
        .map(|(j, s)| PolynomialRecord::from_section(s, j, mesh))
        .collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RealPart {
    Re,
    Im,
}

/// A real spherical harmonic `u = Re p` or `Im p` with eigenvalue
/// `λ = k(k + 2m)` for the Laplacian of `S^{2m+1}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EigenRecord {
    pub m: usize,
    pub k: usize,
    pub part: RealPart,
    pub eigenvalue: f64,
    pub l2_u: f64,
    pub l2_p: f64,
    /// `‖Δf + λ f‖₂ / ‖λ f‖₂` over the sample points.
    pub residual: f64,
    pub samples: usize,
    pub step: f64,
}

const D2_STENCIL: [f64; 7] = [1.0 / 90.0, -3.0 / 20.0, 1.5, -49.0 / 18.0, 1.5, -3.0 / 20.0, 1.0 / 90.0];

/// Pick the larger of `Re p`, `Im p` and check `Δ_S u = -λ u` by a
/// sixth-order finite-difference Laplacian of the 0-homogeneous extension
/// `y ↦ u(y/|y|)` in `ℝ^{2m+2}` at seeded sample points.
pub fn emit_eigenfunction(p: &PolynomialRecord, samples: usize, seed: u64) -> Result<EigenRecord> {
    let s = p.section();
    let basis = MonomialBasis::new(p.m, p.k);
    let l2_p = l2_norm(&s);
    if !(l2_p > 0.0) {
        return Err(Error::ZeroVector);
    }
    // ‖Re p‖² = (‖p‖² + Re ∫ p²)/2; the integral of p² vanishes unless k = 0
    let cross = if p.k == 0 {
        let c = s.coeffs[0];
        (c * c).re * fs_volume(p.m)
    } else {
        0.0
    };
    let re2 = 0.5 * (l2_p * l2_p + cross);
    let im2 = 0.5 * (l2_p * l2_p - cross);
    let part = if re2 >= im2 { RealPart::Re } else { RealPart::Im };
    let l2_u = re2.max(im2).max(0.0).sqrt();
    let lambda = (p.k * (p.k + 2 * p.m)) as f64;
    let u = |y: &[C64]| -> f64 {
        let n = y.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
        let x: Vec<C64> = y.iter().map(|c| c / n).collect();
        let v = eval_poly(&basis, &s.coeffs, &x);
        match part {
            RealPart::Re => v.re,
            RealPart::Im => v.im,
        }
    };
    let h = 0.05 / (p.k + 1) as f64;
    let residual = fd_residual(&u, p.m, lambda, h, samples, seed);
    Ok(EigenRecord {
        m: p.m,
        k: p.k,
        part,
        eigenvalue: lambda,
        l2_u,
        l2_p,
        residual,
        samples,
        step: h,
    })
}

/// `‖Δ_h F + λ F‖ / ‖λ F‖` at `samples` seeded points of the unit sphere.
fn fd_residual<F: Fn(&[C64]) -> f64>(u: &F, m: usize, lambda: f64, h: f64, samples: usize, seed: u64) -> f64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (mut num, mut den) = (0.0, 0.0);
    for _ in 0..samples {
        let x = random_lift(m, &mut rng).coords().to_vec();
        let f0 = u(&x);
        let mut lap = 0.0;
        for i in 0..x.len() {
            for dir in [C64::new(1.0, 0.0), C64::new(0.0, 1.0)] {
                let mut acc = 0.0;
                for (o, w) in D2_STENCIL.iter().enumerate() {
                    let mut y = x.clone();
                    y[i] += dir * (h * (o as f64 - 3.0));
                    acc += w * if o == 3 { f0 } else { u(&y) };
                }
                lap += acc / (h * h);
            }
        }
        num += (lap + lambda * f0).powi(2);
        den += (lambda * f0).powi(2);
    }
    if den > 0.0 {
        (num / den).sqrt()
    } else {
        num.sqrt()
    }
}
