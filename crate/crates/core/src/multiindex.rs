//! Monomial bookkeeping for homogeneous polynomials of degree `k` in `m + 1`
//! complex variables.
//!
//! Multi-indices are kept in graded lexicographic order with `z_0 > z_1 >
//! ... > z_m`, so for `m = 1` position `q` holds `z_0^{k-q} z_1^q`. The order
//! is fixed once here and shared by every coefficient vector in the crate.

use std::collections::HashMap;
use std::f64::consts::PI;

/// `ln(n!)` for `n = 0..=max`, built by summation.
#[derive(Clone, Debug)]
pub struct LnFactorial {
    table: Vec<f64>,
}

impl LnFactorial {
    pub fn new(max: usize) -> Self {
        let mut table = Vec::with_capacity(max + 1);
        let mut acc = 0.0;
        table.push(0.0);
        for n in 1..=max {
            acc += (n as f64).ln();
            table.push(acc);
        }
        Self { table }
    }

    #[inline]
    pub fn get(&self, n: usize) -> f64 {
        self.table[n]
    }

    pub fn max(&self) -> usize {
        self.table.len() - 1
    }
}

/// `C(n, r)` as an `f64`, exact while the result fits in 53 bits.
pub fn binomial(n: u64, r: u64) -> f64 {
    let r = r.min(n - r.min(n));
    let mut acc: u128 = 1;
    for i in 0..r {
        acc = acc * (n - i) as u128 / (i + 1) as u128;
        if acc > (1u128 << 100) {
            // fall back to floating point for very large values
            let mut f = acc as f64;
            for j in (i + 1)..r {
                f = f * (n - j) as f64 / (j + 1) as f64;
            }
            return f;
        }
    }
    acc as f64
}

/// Dimension of the space of degree-`k` homogeneous polynomials in `m + 1`
/// variables, `C(k + m, m)`.
pub fn dimension(m: usize, k: usize) -> usize {
    binomial((k + m) as u64, m as u64).round() as usize
}

/// All exponent vectors `α` with `|α| = k`, in graded lexicographic order,
/// together with their squared `L²` norms on `ℂℙ^m`.
#[derive(Clone, Debug)]
pub struct MonomialBasis {
    m: usize,
    k: usize,
    exponents: Vec<Vec<u32>>,
    /// `ln ‖z^α‖²` with respect to the Fubini–Study volume `ω^m/m!`.
    ln_weights: Vec<f64>,
    /// `ln(k!/α!)`.
    ln_multinomials: Vec<f64>,
    lookup: HashMap<Vec<u32>, usize>,
}

impl MonomialBasis {
    pub fn new(m: usize, k: usize) -> Self {
        let mut exponents = Vec::with_capacity(dimension(m, k));
        let mut current = vec![0u32; m + 1];
        fill(&mut exponents, &mut current, 0, k as u32);

        let lnf = LnFactorial::new(k + m);
        let ln_top = lnf.get(k + m);
        let ln_pi_m = m as f64 * PI.ln();
        let mut ln_weights = Vec::with_capacity(exponents.len());
        let mut ln_multinomials = Vec::with_capacity(exponents.len());
        for alpha in &exponents {
            let ln_alpha_fact: f64 = alpha.iter().map(|&a| lnf.get(a as usize)).sum();
            // ∫_{S^{2m+1}} |z^α|² dσ = m! α! / (m + k)! for the normalized
            // measure, and Vol(ℂℙ^m) = π^m / m!.
            ln_weights.push(ln_pi_m + ln_alpha_fact - ln_top);
            ln_multinomials.push(lnf.get(k) - ln_alpha_fact);
        }
        let lookup = exponents
            .iter()
            .enumerate()
            .map(|(i, a)| (a.clone(), i))
            .collect();
        Self {
            m,
            k,
            exponents,
            ln_weights,
            ln_multinomials,
            lookup,
        }
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn len(&self) -> usize {
        self.exponents.len()
    }

    pub fn is_empty(&self) -> bool {
        self.exponents.is_empty()
    }

    pub fn exponents(&self) -> &[Vec<u32>] {
        &self.exponents
    }

    pub fn exponent(&self, i: usize) -> &[u32] {
        &self.exponents[i]
    }

    pub fn index_of(&self, alpha: &[u32]) -> Option<usize> {
        self.lookup.get(alpha).copied()
    }

    pub fn ln_weight(&self, i: usize) -> f64 {
        self.ln_weights[i]
    }

    pub fn weight(&self, i: usize) -> f64 {
        self.ln_weights[i].exp()
    }

    pub fn weights(&self) -> Vec<f64> {
        self.ln_weights.iter().map(|w| w.exp()).collect()
    }

    pub fn ln_multinomial(&self, i: usize) -> f64 {
        self.ln_multinomials[i]
    }
}

fn fill(out: &mut Vec<Vec<u32>>, current: &mut [u32], pos: usize, remaining: u32) {
    if pos + 1 == current.len() {
        current[pos] = remaining;
        out.push(current.to_vec());
        return;
    }
    for a in (0..=remaining).rev() {
        current[pos] = a;
        fill(out, current, pos + 1, remaining - a);
    }
}
