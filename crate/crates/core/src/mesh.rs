//! Sup-norm search for homogeneous polynomials on the unit sphere.
//!
//! A point of `S^{2m+1}` up to phase is `(r_0, r_1 e^{iφ_1}, ..., r_m e^{iφ_m})`
//! with `r` on the positive orthant of the unit sphere. For fixed `r` the
//! polynomial is a trigonometric polynomial in `φ` of degree `≤ k` in each
//! variable, so an `m`-dimensional FFT with at least `k + 1` points per axis
//! evaluates it on the whole phase torus at once. The radii come from a
//! uniform grid in hyperspherical angles `θ_i ∈ [0, π/2]`. The best cells
//! seed a compass search in ambient coordinates.

use std::f64::consts::PI;

use num_complex::Complex64 as C64;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::kernel::power_table;
use crate::multiindex::MonomialBasis;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MeshConfig {
    /// Radial angles per axis; `None` picks `clamp(⌈8√k⌉, 16, 256)`.
    pub radial: Option<usize>,
    /// Phase samples per axis; `None` picks `k + 1` (at least 8).
    pub phase: Option<usize>,
    /// Fraction of mesh cells used to seed refinement.
    pub top_fraction: f64,
    pub max_seeds: usize,
    /// Refinement stops once a round improves the estimate by less than this.
    pub rel_tol: f64,
}

impl Default for MeshConfig {
    fn default() -> Self {
        Self {
            radial: None,
            phase: None,
            top_fraction: 0.01,
            max_seeds: 16,
            rel_tol: 1e-3,
        }
    }
}

impl MeshConfig {
    pub fn with_radial(radial: usize) -> Self {
        Self {
            radial: Some(radial),
            ..Self::default()
        }
    }

    pub fn radial_count(&self, k: usize) -> usize {
        self.radial
            .unwrap_or_else(|| ((8.0 * (k as f64).sqrt()).ceil() as usize).clamp(16, 256))
            .max(2)
    }

    pub fn phase_count(&self, k: usize) -> usize {
        self.phase.unwrap_or(k + 1).max(k + 1).max(8)
    }
}

/// Result of a sup-norm search.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SupEstimate {
    pub value: f64,
    /// Unit vector where `value` is attained.
    pub argmax: Vec<C64>,
    /// Best value after the mesh pass and after each refinement round.
    pub history: Vec<f64>,
    pub radial: usize,
    pub phase: usize,
}

impl SupEstimate {
    pub fn last_increment(&self) -> f64 {
        match self.history.len() {
            0 | 1 => 0.0,
            n => self.history[n - 1] - self.history[n - 2],
        }
    }
}

/// Radii `r ∈ S^m ∩ ℝ^{m+1}_{≥0}` from hyperspherical angles.
fn radii(angles: &[f64]) -> Vec<f64> {
    let m = angles.len();
    let mut r = vec![0.0; m + 1];
    let mut s = 1.0;
    for (i, &th) in angles.iter().enumerate() {
        r[i] = s * th.cos();
        s *= th.sin();
    }
    r[m] = s;
    r
}

/// Evaluate a polynomial given in monomial coefficients at a point.
pub fn eval_poly(basis: &MonomialBasis, coeffs: &[C64], x: &[C64]) -> C64 {
    let powers = power_table(x, basis.k());
    coeffs
        .iter()
        .zip(basis.exponents())
        .map(|(c, alpha)| {
            alpha
                .iter()
                .enumerate()
                .fold(*c, |acc, (i, &a)| acc * powers[i][a as usize])
        })
        .sum()
}

fn normalize(x: &mut [C64]) {
    let n = x.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
    for c in x.iter_mut() {
        *c /= n;
    }
}

/// Compass search for `max f` over the unit sphere in `ℂ^{m+1}`, moving one
/// real coordinate at a time and renormalizing.
pub fn compass_maximize<F: Fn(&[C64]) -> f64>(f: &F, start: &[C64], step0: f64, min_step: f64) -> (f64, Vec<C64>) {
    let mut x = start.to_vec();
    normalize(&mut x);
    let mut best = f(&x);
    let mut step = step0;
    while step > min_step {
        let mut improved = false;
        for i in 0..x.len() {
            for dir in [C64::new(1.0, 0.0), C64::new(-1.0, 0.0), C64::new(0.0, 1.0), C64::new(0.0, -1.0)] {
                let mut y = x.clone();
                y[i] += dir * step;
                normalize(&mut y);
                let v = f(&y);
                if v > best {
                    best = v;
                    x = y;
                    improved = true;
                }
            }
        }
        if !improved {
            step *= 0.5;
        }
    }
    (best, x)
}

/// In-place multi-dimensional inverse FFT (unnormalized) over an `n^dims`
/// array stored with the last axis fastest.
fn ifft_nd(data: &mut [C64], n: usize, dims: usize, planner: &mut FftPlanner<f64>) {
    let fft = planner.plan_fft_inverse(n);
    let total = data.len();
    let mut line = vec![C64::new(0.0, 0.0); n];
    for axis in 0..dims {
        let stride = n.pow((dims - 1 - axis) as u32);
        let block = stride * n;
        for base in (0..total).step_by(block) {
            for off in 0..stride {
                for (j, slot) in line.iter_mut().enumerate() {
                    *slot = data[base + off + j * stride];
                }
                fft.process(&mut line);
                for (j, v) in line.iter().enumerate() {
                    data[base + off + j * stride] = *v;
                }
            }
        }
    }
}

/// Mesh search of `sup_{S^{2m+1}} |p|` for monomial coefficients `coeffs`.
pub fn sup_norm_poly(basis: &MonomialBasis, coeffs: &[C64], config: &MeshConfig) -> SupEstimate {
    let (m, k) = (basis.m(), basis.k());
    let nr = config.radial_count(k);
    let np = config.phase_count(k);
    let cells = np.pow(m as u32);
    let mut planner = FftPlanner::new();
    let mut buf = vec![C64::new(0.0, 0.0); cells];
    // (value, radial multi-index, flat phase index)
    let mut top: Vec<(f64, Vec<usize>, usize)> = Vec::new();
    let n_radial = nr.pow(m as u32);
    let keep = ((config.top_fraction * (n_radial * cells) as f64).ceil() as usize).clamp(1, config.max_seeds);
    let grid: Vec<f64> = (0..nr).map(|i| 0.5 * PI * i as f64 / (nr - 1) as f64).collect();
    let mut ridx = vec![0usize; m];
    for _ in 0..n_radial {
        let angles: Vec<f64> = ridx.iter().map(|&i| grid[i]).collect();
        let r = radii(&angles);
        buf.iter_mut().for_each(|c| *c = C64::new(0.0, 0.0));
        let ln_r: Vec<f64> = r.iter().map(|x| x.ln()).collect();
        for (c, alpha) in coeffs.iter().zip(basis.exponents()) {
            let mut ln_mag = 0.0;
            let mut zero = false;
            for (i, &a) in alpha.iter().enumerate() {
                if a > 0 {
                    if r[i] == 0.0 {
                        zero = true;
                        break;
                    }
                    ln_mag += a as f64 * ln_r[i];
                }
            }
            if zero {
                continue;
            }
            let mut flat = 0;
            for &a in &alpha[1..] {
                flat = flat * np + a as usize;
            }
            buf[flat] += c * ln_mag.exp();
        }
        if m > 0 {
            ifft_nd(&mut buf, np, m, &mut planner);
        }
        for (idx, v) in buf.iter().enumerate() {
            let a = v.norm();
            if top.len() < keep || a > top[top.len() - 1].0 {
                let pos = top.partition_point(|e| e.0 >= a);
                top.insert(pos, (a, ridx.clone(), idx));
                top.truncate(keep);
            }
        }
        for d in (0..m).rev() {
            ridx[d] += 1;
            if ridx[d] < nr {
                break;
            }
            ridx[d] = 0;
        }
    }

    let point = |ri: &[usize], flat: usize| -> Vec<C64> {
        let angles: Vec<f64> = ri.iter().map(|&i| grid[i]).collect();
        let r = radii(&angles);
        let mut phases = vec![0usize; m];
        let mut f = flat;
        for d in (0..m).rev() {
            phases[d] = f % np;
            f /= np;
        }
        let mut x = vec![C64::new(r[0], 0.0)];
        for d in 0..m {
            x.push(C64::from_polar(r[d + 1], 2.0 * PI * phases[d] as f64 / np as f64));
        }
        x
    };

    let coarse = top.first().map(|e| e.0).unwrap_or(0.0);
    let mut argmax = top.first().map(|e| point(&e.1, e.2)).unwrap_or_else(|| {
        let mut x = vec![C64::new(0.0, 0.0); m + 1];
        x[0] = C64::new(1.0, 0.0);
        x
    });
    let f = |x: &[C64]| eval_poly(basis, coeffs, x).norm();
    let mut best = coarse;
    let mut history = vec![coarse];
    let mut step = (0.5 * PI / (nr - 1) as f64).min(PI / np as f64);
    for _round in 0..8 {
        let mut round_best = best;
        for (_, ri, flat) in &top {
            let (v, x) = compass_maximize(&f, &point(ri, *flat), step, step * 1e-4);
            if v > round_best {
                round_best = v;
                argmax = x;
            }
        }
        let change = (round_best - best) / best.max(f64::MIN_POSITIVE);
        best = round_best;
        history.push(best);
        if change < config.rel_tol {
            break;
        }
        step *= 0.5;
    }
    SupEstimate {
        value: best,
        argmax,
        history,
        radial: nr,
        phase: np,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn monomial_peak_closed_form() {
        // |z0^{k-q} z1^q| on the unit sphere peaks at |z0|² = (k-q)/k
        let k = 12;
        let basis = MonomialBasis::new(1, k);
        for q in [0, 3, 6, 11] {
            let mut c = vec![C64::new(0.0, 0.0); basis.len()];
            c[q] = C64::new(1.0, 0.0);
            let est = sup_norm_poly(&basis, &c, &MeshConfig::default());
            let (kf, qf) = (k as f64, q as f64);
            let peak = if q == 0 {
                1.0
            } else {
                ((kf - qf) / kf).powf((kf - qf) / 2.0) * (qf / kf).powf(qf / 2.0)
            };
            assert_relative_eq!(est.value, peak, max_relative = 1e-6);
        }
    }

    #[test]
    fn fft_matches_direct_evaluation_m2() {
        let basis = MonomialBasis::new(2, 5);
        let c: Vec<C64> = (0..basis.len())
            .map(|i| C64::new((i as f64 * 0.37).sin(), (i as f64 * 0.91).cos()))
            .collect();
        let est = sup_norm_poly(&basis, &c, &MeshConfig::with_radial(24));
        // brute force over a random cloud never beats the refined estimate
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(2);
        let brute = (0..20_000)
            .map(|_| {
                let x = crate::geometry::random_lift(2, &mut rng);
                eval_poly(&basis, &c, x.coords()).norm()
            })
            .fold(0.0, f64::max);
        assert!(est.value >= brute * (1.0 - 1e-9));
        assert_relative_eq!(est.value, eval_poly(&basis, &c, &est.argmax).norm(), max_relative = 1e-12);
        assert!(est.history.windows(2).all(|w| w[1] >= w[0]));
    }
}
