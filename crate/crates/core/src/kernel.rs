//! The level-`k` Szegő kernel of `O(1) → ℂℙ^m`, its normalized modulus
//! `P_k = cos^k dist`, and coherent states as explicit polynomials.
//!
//! Large powers are carried as logarithms: `P_k` underflows near
//! `dist = π/2` long before `k` is large by any other measure.

use std::f64::consts::PI;

use num_complex::Complex64 as C64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{fs_volume, inner, random_point, ChartRegion, ChartSpec, ProjectivePoint, UnitLift};
use crate::multiindex::{binomial, MonomialBasis};

/// Exact data of `Π_k` on `ℂℙ^m`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct KernelModel {
    pub m: usize,
    pub k: usize,
    /// `d_k = C(k + m, m)`, the dimension of the section space.
    pub d_k: f64,
    /// `Π_k(x, x) = d_k · m! / π^m`.
    pub diag: f64,
}

impl KernelModel {
    pub fn new(m: usize, k: usize) -> Result<Self> {
        if m == 0 {
            return Err(Error::InvalidArgument("dimension m must be positive".into()));
        }
        let d_k = binomial((k + m) as u64, m as u64);
        Ok(Self {
            m,
            k,
            d_k,
            diag: d_k / fs_volume(m),
        })
    }

    pub fn ln_diag(&self) -> f64 {
        self.diag.ln()
    }

    fn check(&self, len: usize) -> Result<()> {
        if len != self.m + 1 {
            return Err(Error::Dimension {
                expected: self.m + 1,
                got: len,
            });
        }
        Ok(())
    }
}

/// A section of `O(k)` as coefficients over the degree-`k` monomials in the
/// crate's graded lexicographic order. Restricted to the unit sphere the
/// polynomial is the equivariant lift of the section.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SectionExpansion {
    pub m: usize,
    pub k: usize,
    pub coeffs: Vec<C64>,
}

impl SectionExpansion {
    pub fn new(m: usize, k: usize, coeffs: Vec<C64>) -> Result<Self> {
        let d = crate::multiindex::dimension(m, k);
        if coeffs.len() != d {
            return Err(Error::Dimension {
                expected: d,
                got: coeffs.len(),
            });
        }
        Ok(Self { m, k, coeffs })
    }

    pub fn zeros(m: usize, k: usize) -> Self {
        Self {
            m,
            k,
            coeffs: vec![C64::new(0.0, 0.0); crate::multiindex::dimension(m, k)],
        }
    }

    /// The `L²`-normalized monomial `z^α / ‖z^α‖`.
    pub fn normalized_monomial(basis: &MonomialBasis, index: usize) -> Self {
        let mut s = Self::zeros(basis.m(), basis.k());
        s.coeffs[index] = C64::new((-0.5 * basis.ln_weight(index)).exp(), 0.0);
        s
    }

    pub fn same_shape(&self, other: &Self) -> Result<()> {
        if self.m != other.m || self.k != other.k {
            return Err(Error::SectionShape {
                m_a: self.m,
                k_a: self.k,
                m_b: other.m,
                k_b: other.k,
            });
        }
        Ok(())
    }

    /// Evaluate the polynomial at a point of `ℂ^{m+1}`.
    pub fn evaluate(&self, basis: &MonomialBasis, x: &[C64]) -> Result<C64> {
        if x.len() != self.m + 1 {
            return Err(Error::Dimension {
                expected: self.m + 1,
                got: x.len(),
            });
        }
        let powers = power_table(x, self.k);
        Ok(self
            .coeffs
            .iter()
            .zip(basis.exponents())
            .map(|(c, alpha)| {
                alpha
                    .iter()
                    .enumerate()
                    .fold(*c, |acc, (i, &a)| acc * powers[i][a as usize])
            })
            .sum())
    }

    /// Coefficients against the orthonormal monomials `χ_α`.
    pub fn orthonormal_coeffs(&self, basis: &MonomialBasis) -> Vec<C64> {
        self.coeffs
            .iter()
            .enumerate()
            .map(|(i, c)| c * (0.5 * basis.ln_weight(i)).exp())
            .collect()
    }

    pub fn from_orthonormal_coeffs(basis: &MonomialBasis, b: &[C64]) -> Self {
        Self {
            m: basis.m(),
            k: basis.k(),
            coeffs: b
                .iter()
                .enumerate()
                .map(|(i, c)| c * (-0.5 * basis.ln_weight(i)).exp())
                .collect(),
        }
    }
}

/// `powers[i][j] = x_i^j` for `j = 0..=k`.
pub(crate) fn power_table(x: &[C64], k: usize) -> Vec<Vec<C64>> {
    x.iter()
        .map(|&xi| {
            let mut row = Vec::with_capacity(k + 1);
            let mut p = C64::new(1.0, 0.0);
            for _ in 0..=k {
                row.push(p);
                p *= xi;
            }
            row
        })
        .collect()
}

/// `Π_k(x, y) = diag · ⟨x, y⟩^k`, evaluated through logarithms.
pub fn szego_kernel(model: &KernelModel, x: &UnitLift, y: &UnitLift) -> Result<C64> {
    model.check(x.coords().len())?;
    model.check(y.coords().len())?;
    let c = inner(x.coords(), y.coords());
    if model.k == 0 {
        return Ok(C64::new(model.diag, 0.0));
    }
    let r = c.norm();
    if r == 0.0 {
        return Ok(C64::new(0.0, 0.0));
    }
    let k = model.k as f64;
    Ok(C64::from_polar((model.ln_diag() + k * r.ln()).exp(), k * c.arg()))
}

/// `ln P_k(z, w) = k · ln cos dist(z, w)`, with `ln cos d` evaluated as
/// `½ ln(1 - sin² d)` so that short distances keep their precision.
pub fn ln_normalized_kernel(model: &KernelModel, z: &ProjectivePoint, w: &ProjectivePoint) -> f64 {
    if model.k == 0 {
        return 0.0;
    }
    model.k as f64 * ln_cos_distance(z.coords(), w.coords())
}

/// `ln |⟨z, w⟩|` for unit vectors.
pub(crate) fn ln_cos_distance(z: &[C64], w: &[C64]) -> f64 {
    let c = inner(w, z);
    let s2: f64 = w.iter().zip(z).map(|(wi, zi)| (wi - zi * c).norm_sqr()).sum();
    if s2 < 0.5 {
        0.5 * (-s2).ln_1p()
    } else {
        c.norm().ln()
    }
}

/// `P_k(z, w) = |Π_k(x, y)| / √(Π_k(x, x) Π_k(y, y)) = cos^k dist(z, w)`.
pub fn normalized_kernel(model: &KernelModel, z: &ProjectivePoint, w: &ProjectivePoint) -> f64 {
    ln_normalized_kernel(model, z, w).exp()
}

/// The coherent state `Φ_y = Π_k(·, y) / √Π_k(y, y)` as monomial coefficients
/// `√diag · (k!/α!) · conj(y)^α`, each built in the log domain.
pub fn coherent_state(model: &KernelModel, basis: &MonomialBasis, y: &UnitLift) -> Result<SectionExpansion> {
    model.check(y.coords().len())?;
    if basis.m() != model.m || basis.k() != model.k {
        return Err(Error::SectionShape {
            m_a: basis.m(),
            k_a: basis.k(),
            m_b: model.m,
            k_b: model.k,
        });
    }
    let ln_abs: Vec<f64> = y.coords().iter().map(|c| c.norm().ln()).collect();
    let arg: Vec<f64> = y.coords().iter().map(|c| c.arg()).collect();
    let half_ln_diag = 0.5 * model.ln_diag();
    let coeffs = basis
        .exponents()
        .iter()
        .enumerate()
        .map(|(i, alpha)| {
            let mut ln_mag = half_ln_diag + basis.ln_multinomial(i);
            let mut phase = 0.0;
            for (j, &a) in alpha.iter().enumerate() {
                if a > 0 {
                    ln_mag += a as f64 * ln_abs[j];
                    phase -= a as f64 * arg[j];
                }
            }
            if ln_mag == f64::NEG_INFINITY {
                C64::new(0.0, 0.0)
            } else {
                C64::from_polar(ln_mag.exp(), phase)
            }
        })
        .collect();
    SectionExpansion::new(model.m, model.k, coeffs)
}

/// Regime label of a decay sample.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Regime {
    /// `d ≤ b √(ln k / k)`, where `P_k ≈ exp(-k d²/2)`.
    Near,
    /// `d ≥ √((2q + 2m + 1) ln k / k)`, where `P_k = O(k^{-q})`.
    Far,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DecayEntry {
    pub regime: Regime,
    pub k: usize,
    /// Near: `max |ln P_k / (-k d²/2) - 1|`. Far: `max P_k · k^q`.
    pub max_deviation: f64,
    pub sample_count: usize,
    /// Regime boundary distance.
    pub threshold: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DecayReport {
    pub m: usize,
    pub b: f64,
    pub q: usize,
    pub entries: Vec<DecayEntry>,
}

impl DecayReport {
    pub fn near(&self) -> Option<&DecayEntry> {
        self.entries.iter().find(|e| e.regime == Regime::Near)
    }

    pub fn far(&self) -> Option<&DecayEntry> {
        self.entries.iter().find(|e| e.regime == Regime::Far)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}

/// `b = √(4m + 3)`.
pub fn near_constant(m: usize) -> f64 {
    ((4 * m + 3) as f64).sqrt()
}

pub fn near_threshold(m: usize, k: usize) -> f64 {
    let kf = k as f64;
    near_constant(m) * (kf.ln() / kf).sqrt()
}

pub fn far_threshold(m: usize, k: usize, q: usize) -> f64 {
    let kf = k as f64;
    (((2 * q + 2 * m + 1) as f64) * kf.ln() / kf).sqrt()
}

/// Classify sample pairs into the two regimes of the decay estimate and
/// record the worst deviation in each. Pairs at distance zero or in the
/// intermediate band are skipped.
pub fn verify_decay(model: &KernelModel, samples: &[(ProjectivePoint, ProjectivePoint)]) -> DecayReport {
    let (m, k) = (model.m, model.k);
    let q = m + 1;
    let d_near = near_threshold(m, k);
    let d_far = far_threshold(m, k, q);
    let kf = k as f64;
    let (mut near_max, mut near_n) = (0.0f64, 0usize);
    let (mut far_max, mut far_n) = (0.0f64, 0usize);
    for (z, w) in samples {
        let d = crate::geometry::fs_distance(z, w);
        if d == 0.0 {
            continue;
        }
        let lp = ln_normalized_kernel(model, z, w);
        if d <= d_near {
            let dev = (lp / (-0.5 * kf * d * d) - 1.0).abs();
            near_max = near_max.max(dev);
            near_n += 1;
        }
        if d >= d_far {
            far_max = far_max.max((lp + q as f64 * kf.ln()).exp());
            far_n += 1;
        }
    }
    DecayReport {
        m,
        b: near_constant(m),
        q,
        entries: vec![
            DecayEntry {
                regime: Regime::Near,
                k,
                max_deviation: near_max,
                sample_count: near_n,
                threshold: d_near,
            },
            DecayEntry {
                regime: Regime::Far,
                k,
                max_deviation: far_max,
                sample_count: far_n,
                threshold: d_far,
            },
        ],
    }
}

/// Seeded sample pairs for [`verify_decay`]: random base points and random
/// directions, with distances spread over both regimes. The regime
/// boundaries themselves are always included.
pub fn decay_samples(m: usize, k: usize, per_regime: usize, seed: u64) -> Vec<(ProjectivePoint, ProjectivePoint)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let d_near = near_threshold(m, k).min(PI / 2.0);
    let d_far = far_threshold(m, k, m + 1).min(PI / 2.0);
    let mut out = Vec::with_capacity(2 * per_regime + 2);
    let mut push = |d: f64, rng: &mut ChaCha8Rng| {
        let z = random_point(m, rng);
        let chart = ChartSpec {
            center: z.clone(),
            halfwidth: PI / 2.0,
            region: ChartRegion::Ball,
            gamma: 2.0,
        };
        let dir: Vec<f64> = (0..2 * m).map(|_| rng.sample::<f64, _>(StandardNormal)).collect();
        let n = crate::geometry::euclid(&dir);
        let v: Vec<f64> = dir.iter().map(|x| x * d / n).collect();
        let w = chart.exp_unchecked(&v);
        out.push((z, w));
    };
    push(d_near, &mut rng);
    push(d_far, &mut rng);
    for i in 0..per_regime {
        let d = d_near * (i as f64 + 0.5) / per_regime as f64;
        push(d, &mut rng);
    }
    for _ in 0..per_regime {
        let d = rng.random_range(d_far..=PI / 2.0);
        push(d, &mut rng);
    }
    out
}
