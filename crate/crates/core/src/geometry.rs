//! Fubini–Study geometry on `ℂℙ^m`.
//!
//! Normalization: `ω = (i/2)∂∂̄ log|z|²`, so the distance between `[z]` and
//! `[w]` is `arccos |⟨z, w⟩|` (range `[0, π/2]`), `ℂℙ¹` is the round sphere of
//! radius ½, and `Vol(ℂℙ^m) = π^m / m!`.
//!
//! Tangent vectors at a chart center are real `2m`-vectors, paired into complex
//! coordinates `v_c[j] = v[2j] + i v[2j+1]`.

use std::f64::consts::PI;

use num_complex::Complex64 as C64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const NORM_TOL: f64 = 1e-12;

/// Hermitian inner product `Σ a_i conj(b_i)`.
#[inline]
pub fn inner(a: &[C64], b: &[C64]) -> C64 {
    a.iter().zip(b).map(|(x, y)| x * y.conj()).sum()
}

#[inline]
pub fn norm(a: &[C64]) -> f64 {
    a.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt()
}

fn normalized(v: &[C64]) -> Result<Vec<C64>> {
    let n = norm(v);
    if !(n > 0.0) || !n.is_finite() {
        return Err(Error::ZeroVector);
    }
    Ok(v.iter().map(|x| x / n).collect())
}

/// A point of `ℂℙ^m`, stored as its canonical unit representative: Euclidean
/// norm one with the first nonzero entry real and positive.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProjectivePoint {
    homogeneous: Vec<C64>,
}

impl ProjectivePoint {
    pub fn new(homogeneous: &[C64]) -> Result<Self> {
        if homogeneous.len() < 2 {
            return Err(Error::InvalidArgument(
                "a point of CP^m needs at least two homogeneous coordinates".into(),
            ));
        }
        let mut v = normalized(homogeneous)?;
        canonicalize(&mut v);
        Ok(Self { homogeneous: v })
    }

    pub fn from_real(coords: &[f64]) -> Result<Self> {
        let v: Vec<C64> = coords.iter().map(|&x| C64::new(x, 0.0)).collect();
        Self::new(&v)
    }

    /// The base point `[1 : 0 : ... : 0]`.
    pub fn origin(m: usize) -> Self {
        let mut v = vec![C64::new(0.0, 0.0); m + 1];
        v[0] = C64::new(1.0, 0.0);
        Self { homogeneous: v }
    }

    pub fn dim(&self) -> usize {
        self.homogeneous.len() - 1
    }

    pub fn coords(&self) -> &[C64] {
        &self.homogeneous
    }

    /// The canonical-phase lift to the unit sphere.
    pub fn lift(&self) -> UnitLift {
        UnitLift {
            vector: self.homogeneous.clone(),
        }
    }

    /// Lift with an extra phase `e^{iθ}` on the canonical representative.
    pub fn lift_with_phase(&self, theta: f64) -> UnitLift {
        let ph = C64::from_polar(1.0, theta);
        UnitLift {
            vector: self.homogeneous.iter().map(|x| x * ph).collect(),
        }
    }
}

fn canonicalize(v: &mut [C64]) {
    if let Some(first) = v.iter().find(|x| x.norm() > 0.0).copied() {
        let ph = first.conj() / first.norm();
        for x in v.iter_mut() {
            *x *= ph;
        }
        // strip the rounding residue of the pivot's imaginary part
        if let Some(p) = v.iter_mut().find(|x| x.norm() > 0.0) {
            *p = C64::new(p.norm(), 0.0);
        }
    }
}

/// A point of the circle bundle `X = S^{2m+1}`: a unit vector with its phase.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct UnitLift {
    vector: Vec<C64>,
}

impl UnitLift {
    pub fn new(vector: &[C64]) -> Result<Self> {
        Ok(Self {
            vector: normalized(vector)?,
        })
    }

    pub fn dim(&self) -> usize {
        self.vector.len() - 1
    }

    pub fn coords(&self) -> &[C64] {
        &self.vector
    }

    pub fn project(&self) -> ProjectivePoint {
        let mut v = self.vector.clone();
        canonicalize(&mut v);
        ProjectivePoint { homogeneous: v }
    }

    pub fn rotate(&self, theta: f64) -> UnitLift {
        let ph = C64::from_polar(1.0, theta);
        UnitLift {
            vector: self.vector.iter().map(|x| x * ph).collect(),
        }
    }

    pub fn is_unit(&self) -> bool {
        (norm(&self.vector) - 1.0).abs() <= NORM_TOL
    }
}

/// `(cos d, sin d)` for the Fubini–Study distance `d` between two unit vectors.
fn cos_sin_distance(z: &[C64], w: &[C64]) -> (f64, f64) {
    let c = inner(w, z);
    // component of w orthogonal to z
    let s = w
        .iter()
        .zip(z)
        .map(|(wi, zi)| (wi - zi * c).norm_sqr())
        .sum::<f64>()
        .sqrt();
    (c.norm(), s)
}

/// Fubini–Study distance in radians, `arccos |⟨z, w⟩|`, evaluated through
/// `atan2` so that small distances keep full relative precision.
pub fn fs_distance(z: &ProjectivePoint, w: &ProjectivePoint) -> f64 {
    lift_distance(z.coords(), w.coords())
}

/// Distance between the projections of two lifts.
pub fn lift_distance(x: &[C64], y: &[C64]) -> f64 {
    // fixed argument order keeps the result exactly symmetric
    let key = |v: &[C64]| v.iter().flat_map(|c| [c.re, c.im]).collect::<Vec<f64>>();
    let (x, y) = if key(x).partial_cmp(&key(y)) == Some(std::cmp::Ordering::Greater) {
        (y, x)
    } else {
        (x, y)
    };
    let (c, s) = cos_sin_distance(x, y);
    s.atan2(c).min(PI / 2.0)
}

/// The model manifold `ℂℙ^m` with its Fubini–Study normalization.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ManifoldModel {
    pub m: usize,
    pub volume: f64,
}

impl ManifoldModel {
    pub fn new(m: usize) -> Result<Self> {
        if m == 0 {
            return Err(Error::InvalidArgument("dimension m must be positive".into()));
        }
        Ok(Self {
            m,
            volume: fs_volume(m),
        })
    }
}

/// `π^m / m!`.
pub fn fs_volume(m: usize) -> f64 {
    (1..=m).fold(1.0, |acc, j| acc * PI / j as f64)
}

/// Inner region of a chart in tangent coordinates.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ChartRegion {
    /// The axis cube `C_t = [-t, t]^{2m}`.
    Cube,
    /// The Euclidean ball of radius `t`.
    Ball,
    /// Points of `ℂℙ^m` closer to this center than to any of `others`
    /// (ties go to the lower index). `t` bounds the tangent radius of the cell.
    Voronoi {
        index: usize,
        others: Vec<(usize, ProjectivePoint)>,
    },
}

/// An exponential chart `exp_p : W ⊂ ℝ^{2m} → ℂℙ^m`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChartSpec {
    pub center: ProjectivePoint,
    pub halfwidth: f64,
    pub region: ChartRegion,
    pub gamma: f64,
}

impl ChartSpec {
    pub fn new(center: ProjectivePoint, halfwidth: f64, region: ChartRegion, gamma: f64) -> Result<Self> {
        if !(halfwidth > 0.0) {
            return Err(Error::InvalidArgument(format!("chart halfwidth must be positive, got {halfwidth}")));
        }
        if !(gamma > 1.0) {
            return Err(Error::InvalidArgument(format!("distortion gamma must exceed 1, got {gamma}")));
        }
        Ok(Self {
            center,
            halfwidth,
            region,
            gamma,
        })
    }

    pub fn cube(center: ProjectivePoint, t: f64, gamma: f64) -> Result<Self> {
        Self::new(center, t, ChartRegion::Cube, gamma)
    }

    pub fn m(&self) -> usize {
        self.center.dim()
    }

    /// Largest tangent norm admitted by `exp_map` (the doubled region).
    pub fn domain_radius(&self) -> f64 {
        let m = self.m() as f64;
        let r = match self.region {
            ChartRegion::Cube => 2.0 * self.halfwidth * (2.0 * m).sqrt(),
            _ => 2.0 * self.halfwidth,
        };
        r.min(PI / 2.0)
    }

    fn in_doubled(&self, v: &[f64]) -> bool {
        let r = euclid(v);
        if r > PI / 2.0 + 1e-12 {
            return false;
        }
        match self.region {
            ChartRegion::Cube => v.iter().all(|x| x.abs() <= 2.0 * self.halfwidth * (1.0 + 1e-12)),
            _ => r <= 2.0 * self.halfwidth * (1.0 + 1e-12),
        }
    }

    /// Whether the tangent vector lies in the inner region `W_j`.
    pub fn contains_tangent(&self, v: &[f64]) -> bool {
        let r = euclid(v);
        if r >= PI / 2.0 {
            return false;
        }
        match &self.region {
            ChartRegion::Cube => v.iter().all(|x| x.abs() <= self.halfwidth),
            ChartRegion::Ball => r <= self.halfwidth,
            ChartRegion::Voronoi { .. } => {
                if r > self.halfwidth * (1.0 + 1e-9) {
                    return false;
                }
                self.contains_point(&self.exp_unchecked(v))
            }
        }
    }

    /// Whether a point of `ℂℙ^m` lies in `exp(W_j)`.
    pub fn contains_point(&self, z: &ProjectivePoint) -> bool {
        match &self.region {
            ChartRegion::Voronoi { index, others } => {
                let own = fs_distance(z, &self.center);
                others.iter().all(|(j, p)| {
                    let d = fs_distance(z, p);
                    own < d || (own == d && index < j)
                })
            }
            _ => {
                let v = self.log_map(z);
                self.contains_tangent(&v)
            }
        }
    }

    /// Geodesic exponential map from the chart center, unit speed.
    pub fn exp_map(&self, v: &[f64]) -> Result<ProjectivePoint> {
        if v.len() != 2 * self.m() {
            return Err(Error::Dimension {
                expected: 2 * self.m(),
                got: v.len(),
            });
        }
        if !self.in_doubled(v) {
            return Err(Error::OutsideChart {
                norm: euclid(v),
                limit: self.domain_radius(),
            });
        }
        Ok(self.exp_unchecked(v))
    }

    pub(crate) fn exp_unchecked(&self, v: &[f64]) -> ProjectivePoint {
        let lift = self.exp_lift(v);
        lift.project()
    }

    /// `exp` realized on the sphere without re-canonicalizing the phase: the
    /// image of `(cos r, sin r · v_c / r)` under the chart's unitary frame.
    pub fn exp_lift(&self, v: &[f64]) -> UnitLift {
        let m = self.m();
        let r = euclid(v);
        let mut w = vec![C64::new(0.0, 0.0); m + 1];
        w[0] = C64::new(r.cos(), 0.0);
        let sinc = if r > 0.0 { r.sin() / r } else { 1.0 };
        for j in 0..m {
            w[j + 1] = C64::new(v[2 * j], v[2 * j + 1]) * sinc;
        }
        UnitLift {
            vector: householder_apply(self.center.coords(), &w),
        }
    }

    /// Inverse of [`ChartSpec::exp_map`] away from the cut locus.
    pub fn log_map(&self, z: &ProjectivePoint) -> Vec<f64> {
        let m = self.m();
        let mut w = householder_apply(self.center.coords(), z.coords());
        let a = w[0].norm();
        if a > 0.0 {
            let ph = w[0].conj() / a;
            for x in w.iter_mut() {
                *x *= ph;
            }
        }
        let s = w[1..].iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt();
        let r = s.atan2(a);
        let scale = if s > 0.0 { r / s } else { 1.0 };
        let mut v = vec![0.0; 2 * m];
        for j in 0..m {
            v[2 * j] = w[j + 1].re * scale;
            v[2 * j + 1] = w[j + 1].im * scale;
        }
        v
    }

    /// Density `g(v)` of the pulled-back volume form `ω^m/m!` against
    /// Lebesgue measure: `(sin r / r)^{2m-1} cos r`.
    pub fn volume_density(&self, v: &[f64]) -> f64 {
        volume_density_radial(self.m(), euclid(v))
    }

    /// Largest sampled ratio `dist(exp v, exp w) / ‖v - w‖` or its reciprocal.
    ///
    /// Half of the pairs are independent draws from the sampling domain, the
    /// other half are short displacements that probe the local metric.
    pub fn distortion_estimate(&self, nsamples: usize, seed: u64) -> Result<f64> {
        if nsamples < 2 {
            return Err(Error::InvalidArgument("distortion_estimate needs at least two samples".into()));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let dim = 2 * self.m();
        let mut worst: f64 = 1.0;
        let local_step = 1e-3 * self.halfwidth.min(0.1);
        let mut pairs = 0;
        let mut attempts = 0;
        while pairs < nsamples {
            attempts += 1;
            if attempts > 200 * nsamples {
                return Err(Error::InvalidArgument("could not sample the chart domain".into()));
            }
            let Some(v) = self.sample_domain(&mut rng) else { continue };
            let w = if pairs % 2 == 0 {
                match self.sample_domain(&mut rng) {
                    Some(w) => w,
                    None => continue,
                }
            } else {
                let dir: Vec<f64> = (0..dim).map(|_| rng.sample::<f64, _>(StandardNormal)).collect();
                let n = euclid(&dir);
                let w: Vec<f64> = v.iter().zip(&dir).map(|(a, d)| a + local_step * d / n).collect();
                if !self.in_sampling_domain(&w) {
                    continue;
                }
                w
            };
            let sep = euclid_diff(&v, &w);
            if sep < 1e-14 {
                continue;
            }
            let d = lift_distance(self.exp_lift(&v).coords(), self.exp_lift(&w).coords());
            let ratio = d / sep;
            worst = worst.max(ratio).max(1.0 / ratio);
            pairs += 1;
        }
        Ok(worst)
    }

    /// Accept the chart if the sampled distortion stays below the declared
    /// `gamma`; returns the estimate.
    pub fn accept(&self, nsamples: usize, seed: u64) -> Result<f64> {
        let g = self.distortion_estimate(nsamples, seed)?;
        if g >= self.gamma {
            return Err(Error::ChartRejected {
                measured: g,
                declared: self.gamma,
            });
        }
        Ok(g)
    }

    /// Region the distortion bound is checked on: `C_{2t}` for cube charts,
    /// the doubled ball, or the Voronoi cell itself.
    fn in_sampling_domain(&self, v: &[f64]) -> bool {
        match self.region {
            ChartRegion::Voronoi { .. } => self.contains_tangent(v),
            _ => self.in_doubled(v) && euclid(v) < PI / 2.0 - 1e-6,
        }
    }

    fn sample_domain(&self, rng: &mut ChaCha8Rng) -> Option<Vec<f64>> {
        let dim = 2 * self.m();
        let v: Vec<f64> = match self.region {
            ChartRegion::Cube => (0..dim)
                .map(|_| rng.random_range(-2.0 * self.halfwidth..=2.0 * self.halfwidth))
                .collect(),
            _ => {
                let radius = match self.region {
                    ChartRegion::Voronoi { .. } => self.halfwidth,
                    _ => self.domain_radius(),
                };
                let dir: Vec<f64> = (0..dim).map(|_| rng.sample::<f64, _>(StandardNormal)).collect();
                let n = euclid(&dir);
                let u: f64 = rng.random::<f64>();
                let r = radius * u.powf(1.0 / dim as f64);
                dir.iter().map(|d| d * r / n).collect()
            }
        };
        self.in_sampling_domain(&v).then_some(v)
    }

    /// `∫_{W} g(v) dv`, the Fubini–Study volume of the inner region.
    ///
    /// Balls use radial Gauss–Legendre quadrature; cubes a tensor rule;
    /// Voronoi cells (m ≤ 2) a polar rule with the cell boundary located by
    /// bisection along each ray.
    pub fn region_volume(&self, nodes: usize) -> Result<f64> {
        let m = self.m();
        match self.region {
            ChartRegion::Ball => {
                let rho = self.halfwidth.min(PI / 2.0);
                Ok(sphere_area(2 * m - 1) * radial_integral(m, rho, nodes))
            }
            ChartRegion::Cube => {
                let gl = gauss_legendre(nodes);
                let dim = 2 * m;
                let t = self.halfwidth;
                let mut total = 0.0;
                let mut idx = vec![0usize; dim];
                let mut v = vec![0.0; dim];
                loop {
                    let mut wgt = 1.0;
                    for d in 0..dim {
                        v[d] = t * gl.0[idx[d]];
                        wgt *= t * gl.1[idx[d]];
                    }
                    let r = euclid(&v);
                    if r < PI / 2.0 {
                        total += wgt * volume_density_radial(m, r);
                    }
                    let mut d = 0;
                    loop {
                        if d == dim {
                            return Ok(total);
                        }
                        idx[d] += 1;
                        if idx[d] < nodes {
                            break;
                        }
                        idx[d] = 0;
                        d += 1;
                    }
                }
            }
            ChartRegion::Voronoi { .. } => self.voronoi_volume(nodes),
        }
    }

    fn ray_exit(&self, dir: &[f64]) -> f64 {
        let rmax = self.halfwidth.min(PI / 2.0) * (1.0 + 1e-9);
        let at = |r: f64| -> bool {
            let v: Vec<f64> = dir.iter().map(|d| d * r).collect();
            self.contains_point(&self.exp_unchecked(&v))
        };
        if at(rmax) {
            return rmax.min(PI / 2.0);
        }
        let (mut lo, mut hi) = (0.0, rmax);
        for _ in 0..60 {
            let mid = 0.5 * (lo + hi);
            if at(mid) {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        0.5 * (lo + hi)
    }

    fn voronoi_volume(&self, nodes: usize) -> Result<f64> {
        let m = self.m();
        let gl = gauss_legendre(nodes);
        match m {
            1 => {
                let ndir = 4 * nodes;
                let mut total = 0.0;
                for i in 0..ndir {
                    let phi = 2.0 * PI * (i as f64 + 0.5) / ndir as f64;
                    let rho = self.ray_exit(&[phi.cos(), phi.sin()]);
                    total += radial_integral_with(m, rho, &gl) * 2.0 * PI / ndir as f64;
                }
                Ok(total)
            }
            2 => {
                // Hopf coordinates on S^3: (cos η e^{iφ1}, sin η e^{iφ2}),
                // measure cos η sin η dη dφ1 dφ2.
                let nphi = 2 * nodes;
                let mut total = 0.0;
                for (x, wx) in gl.0.iter().zip(&gl.1) {
                    let eta = PI / 4.0 * (x + 1.0);
                    let w_eta = PI / 4.0 * wx * eta.cos() * eta.sin();
                    for a in 0..nphi {
                        let p1 = 2.0 * PI * (a as f64 + 0.5) / nphi as f64;
                        for b in 0..nphi {
                            let p2 = 2.0 * PI * (b as f64 + 0.5) / nphi as f64;
                            let dir = [
                                eta.cos() * p1.cos(),
                                eta.cos() * p1.sin(),
                                eta.sin() * p2.cos(),
                                eta.sin() * p2.sin(),
                            ];
                            let rho = self.ray_exit(&dir);
                            let dphi = 2.0 * PI / nphi as f64;
                            total += w_eta * dphi * dphi * radial_integral_with(m, rho, &gl);
                        }
                    }
                }
                Ok(total)
            }
            _ => Err(Error::InvalidArgument(
                "Voronoi cell quadrature is implemented for m <= 2".into(),
            )),
        }
    }
}

pub(crate) fn euclid(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

fn euclid_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

/// `(sin r / r)^{2m-1} cos r`.
pub fn volume_density_radial(m: usize, r: f64) -> f64 {
    let sinc = if r > 0.0 { r.sin() / r } else { 1.0 };
    sinc.powi(2 * m as i32 - 1) * r.cos()
}

/// Area of the unit sphere `S^n ⊂ ℝ^{n+1}`.
pub fn sphere_area(n: usize) -> f64 {
    // |S^n| = 2 π^{(n+1)/2} / Γ((n+1)/2)
    let half = (n + 1) as f64 / 2.0;
    2.0 * PI.powf(half) / gamma_half_integer(n + 1)
}

/// `Γ(j / 2)` for a positive integer `j`.
fn gamma_half_integer(j: usize) -> f64 {
    if j % 2 == 0 {
        (1..j / 2).fold(1.0, |acc, i| acc * i as f64)
    } else {
        // Γ(1/2) = √π, Γ(x + 1) = x Γ(x)
        let mut g = PI.sqrt();
        let mut x = 0.5;
        while x < j as f64 / 2.0 - 0.25 {
            g *= x;
            x += 1.0;
        }
        g
    }
}

fn radial_integral(m: usize, rho: f64, nodes: usize) -> f64 {
    radial_integral_with(m, rho, &gauss_legendre(nodes))
}

fn radial_integral_with(m: usize, rho: f64, gl: &(Vec<f64>, Vec<f64>)) -> f64 {
    gl.0.iter()
        .zip(&gl.1)
        .map(|(x, w)| {
            let r = 0.5 * rho * (x + 1.0);
            0.5 * rho * w * volume_density_radial(m, r) * r.powi(2 * m as i32 - 1)
        })
        .sum()
}

/// Gauss–Legendre nodes and weights on `[-1, 1]` by Newton iteration.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        let mut z = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, z);
            for j in 2..=n {
                let p2 = ((2 * j - 1) as f64 * z * p1 - (j - 1) as f64 * p0) / j as f64;
                p0 = p1;
                p1 = p2;
            }
            let pn = if n == 0 { 1.0 } else if n == 1 { z } else { p1 };
            let pn1 = if n == 1 { 1.0 } else { p0 };
            dp = n as f64 * (z * pn - pn1) / (z * z - 1.0);
            let dz = pn / dp;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        x[i] = -z;
        x[n - 1 - i] = z;
        w[i] = 2.0 / ((1.0 - z * z) * dp * dp);
        w[n - 1 - i] = w[i];
    }
    (x, w)
}

/// Apply the Householder unitary that maps `e_0` to `p` (p canonical, so
/// `p_0 ≥ 0` is real). The map is its own inverse.
fn householder_apply(p: &[C64], x: &[C64]) -> Vec<C64> {
    let mut u: Vec<C64> = p.iter().map(|pi| -pi).collect();
    u[0] += 1.0;
    let uu: f64 = u.iter().map(|a| a.norm_sqr()).sum();
    if uu < 1e-30 {
        return x.to_vec();
    }
    let proj = inner(x, &u) * (2.0 / uu);
    x.iter().zip(&u).map(|(xi, ui)| xi - ui * proj).collect()
}

/// A uniformly distributed point of `ℂℙ^m` (pushforward of the round measure
/// on `S^{2m+1}`).
pub fn random_point<R: Rng + ?Sized>(m: usize, rng: &mut R) -> ProjectivePoint {
    random_lift(m, rng).project()
}

pub fn random_lift<R: Rng + ?Sized>(m: usize, rng: &mut R) -> UnitLift {
    loop {
        let v: Vec<C64> = (0..=m)
            .map(|_| C64::new(rng.sample(StandardNormal), rng.sample(StandardNormal)))
            .collect();
        if let Ok(l) = UnitLift::new(&v) {
            return l;
        }
    }
}

/// Centers of a chart cover.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ChartLayout {
    /// One chart at `[1 : 0 : ... : 0]`.
    Single,
    /// `[1:0]` and `[0:1]` on `ℂℙ¹`.
    Poles,
    /// The twelve icosahedron vertices of the radius-½ sphere `ℂℙ¹`.
    Icosahedral,
    /// Greedy farthest-point selection from seeded uniform candidates.
    FarthestPoint { count: usize, seed: u64 },
}

/// Map a point of the unit sphere `S² ⊂ ℝ³` to `ℂℙ¹` (inverse Hopf map; the
/// angular distance on `S²` is twice the Fubini–Study distance).
pub fn s2_to_cp1(n: [f64; 3]) -> ProjectivePoint {
    let theta = n[2].clamp(-1.0, 1.0).acos();
    let phi = n[1].atan2(n[0]);
    ProjectivePoint::new(&[
        C64::new((theta / 2.0).cos(), 0.0),
        C64::from_polar((theta / 2.0).sin(), phi),
    ])
    .expect("unit vector")
}

pub fn layout_centers(m: usize, layout: &ChartLayout) -> Result<Vec<ProjectivePoint>> {
    match layout {
        ChartLayout::Single => Ok(vec![ProjectivePoint::origin(m)]),
        ChartLayout::Poles => {
            if m != 1 {
                return Err(Error::InvalidArgument("pole layout is defined for m = 1".into()));
            }
            Ok(vec![
                ProjectivePoint::from_real(&[1.0, 0.0])?,
                ProjectivePoint::from_real(&[0.0, 1.0])?,
            ])
        }
        ChartLayout::Icosahedral => {
            if m != 1 {
                return Err(Error::InvalidArgument("icosahedral layout is defined for m = 1".into()));
            }
            let g = (1.0 + 5f64.sqrt()) / 2.0;
            let mut pts = Vec::with_capacity(12);
            // north pole first so that chart 0 is centered at [1:0]
            let base = [
                [0.0, 1.0, g],
                [0.0, -1.0, g],
                [1.0, g, 0.0],
                [-1.0, g, 0.0],
                [g, 0.0, 1.0],
                [-g, 0.0, 1.0],
                [1.0, -g, 0.0],
                [-1.0, -g, 0.0],
                [g, 0.0, -1.0],
                [-g, 0.0, -1.0],
                [0.0, 1.0, -g],
                [0.0, -1.0, -g],
            ];
            for b in base {
                let n = (b[0] * b[0] + b[1] * b[1] + b[2] * b[2]).sqrt();
                pts.push(s2_to_cp1([b[0] / n, b[1] / n, b[2] / n]));
            }
            // rotate so that a vertex sits at the north pole: [0,1,g]/n has
            // polar angle atan(1/g); undo it about the x axis.
            let tilt = (1.0 / g).atan();
            let rot = |p: &ProjectivePoint| -> ProjectivePoint {
                // a rotation of S² by angle `tilt` about the x axis acts on
                // ℂ² by the SU(2) element [[cos, i sin],[i sin, cos]](tilt/2)
                let (c, s) = ((tilt / 2.0).cos(), (tilt / 2.0).sin());
                let z = p.coords();
                let w = [
                    z[0] * c + z[1] * C64::new(0.0, s),
                    z[0] * C64::new(0.0, s) + z[1] * c,
                ];
                ProjectivePoint::new(&w).expect("unit vector")
            };
            let mut rotated: Vec<ProjectivePoint> = pts.iter().map(rot).collect();
            // put the vertex nearest [1:0] first
            let origin = ProjectivePoint::origin(1);
            rotated.sort_by(|a, b| {
                fs_distance(a, &origin)
                    .partial_cmp(&fs_distance(b, &origin))
                    .unwrap()
            });
            Ok(rotated)
        }
        ChartLayout::FarthestPoint { count, seed } => {
            if *count == 0 {
                return Err(Error::InvalidArgument("chart count must be positive".into()));
            }
            let mut rng = ChaCha8Rng::seed_from_u64(*seed);
            let candidates: Vec<ProjectivePoint> =
                (0..(2000 * count).max(4000)).map(|_| random_point(m, &mut rng)).collect();
            let mut centers = vec![ProjectivePoint::origin(m)];
            let mut dmin: Vec<f64> = candidates.iter().map(|c| fs_distance(c, &centers[0])).collect();
            while centers.len() < *count {
                let (best, _) = dmin
                    .iter()
                    .enumerate()
                    .fold((0, -1.0), |acc, (i, &d)| if d > acc.1 { (i, d) } else { acc });
                let next = candidates[best].clone();
                for (d, c) in dmin.iter_mut().zip(&candidates) {
                    *d = d.min(fs_distance(c, &next));
                }
                centers.push(next);
            }
            Ok(centers)
        }
    }
}

/// Voronoi cover of `ℂℙ^m` by exponential charts at the given centers.
///
/// Each chart's halfwidth is the sampled tangent radius of its cell.
pub fn voronoi_cover(centers: &[ProjectivePoint], gamma: f64, seed: u64) -> Result<Vec<ChartSpec>> {
    if centers.is_empty() {
        return Err(Error::InvalidArgument("empty center list".into()));
    }
    let m = centers[0].dim();
    let mut charts = Vec::with_capacity(centers.len());
    for (i, c) in centers.iter().enumerate() {
        let others: Vec<(usize, ProjectivePoint)> = centers
            .iter()
            .enumerate()
            .filter(|(j, _)| *j != i)
            .map(|(j, p)| (j, p.clone()))
            .collect();
        let mut chart = ChartSpec::new(
            c.clone(),
            PI / 2.0,
            ChartRegion::Voronoi { index: i, others },
            gamma,
        )?;
        if centers.len() > 1 {
            let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(i as u64));
            let mut radius: f64 = 0.0;
            for _ in 0..(400 * m) {
                let dir: Vec<f64> = (0..2 * m).map(|_| rng.sample::<f64, _>(StandardNormal)).collect();
                let n = euclid(&dir);
                let dir: Vec<f64> = dir.iter().map(|d| d / n).collect();
                radius = radius.max(chart.ray_exit(&dir));
            }
            chart.halfwidth = (radius * 1.05).min(PI / 2.0);
        }
        charts.push(chart);
    }
    Ok(charts)
}

/// Monte Carlo estimate of `Vol(M \ ∪ exp(W_j))`.
pub fn covering_defect(charts: &[ChartSpec], nsamples: usize, seed: u64) -> f64 {
    let Some(first) = charts.first() else { return 0.0 };
    let m = first.m();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let missed = (0..nsamples)
        .filter(|_| {
            let z = random_point(m, &mut rng);
            !charts.iter().any(|c| c.contains_point(&z))
        })
        .count();
    fs_volume(m) * missed as f64 / nsamples as f64
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn canonical_representative() {
        let z = ProjectivePoint::new(&[c(0.0, 2.0), c(1.0, 1.0)]).unwrap();
        assert!(z.coords()[0].im == 0.0 && z.coords()[0].re > 0.0);
        assert_relative_eq!(norm(z.coords()), 1.0, epsilon = 1e-14);
        let again = ProjectivePoint::new(z.coords()).unwrap();
        assert_eq!(z, again);
        let w = ProjectivePoint::new(&[c(0.0, 0.0), c(0.0, -3.0)]).unwrap();
        assert_eq!(w.coords()[1], c(1.0, 0.0));
        assert!(ProjectivePoint::new(&[c(0.0, 0.0), c(0.0, 0.0)]).is_err());
    }

    #[test]
    fn distance_examples() {
        let a = ProjectivePoint::from_real(&[1.0, 0.0]).unwrap();
        let b = ProjectivePoint::from_real(&[0.0, 1.0]).unwrap();
        let d = ProjectivePoint::from_real(&[1.0, 1.0]).unwrap();
        assert_relative_eq!(fs_distance(&a, &b), PI / 2.0, epsilon = 1e-15);
        assert_eq!(fs_distance(&a, &a), 0.0);
        assert_relative_eq!(fs_distance(&a, &d), PI / 4.0, epsilon = 1e-15);
    }

    #[test]
    fn distance_matches_round_sphere_arc() {
        // ℂℙ¹ is the sphere of radius ½: the geodesic length between the
        // images on S² is half the angle between the unit vectors.
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..200 {
            let z = random_point(1, &mut rng);
            let w = random_point(1, &mut rng);
            let bloch = |p: &ProjectivePoint| {
                let (a, b) = (p.coords()[0], p.coords()[1]);
                let x = a * b.conj();
                [2.0 * x.re, 2.0 * x.im, a.norm_sqr() - b.norm_sqr()]
            };
            let (u, v) = (bloch(&z), bloch(&w));
            let dot = (u[0] * v[0] + u[1] * v[1] + u[2] * v[2]).clamp(-1.0, 1.0);
            assert_relative_eq!(fs_distance(&z, &w), 0.5 * dot.acos(), epsilon = 1e-7);
        }
    }

    #[test]
    fn exp_examples() {
        let chart = ChartSpec::new(ProjectivePoint::origin(1), 0.5, ChartRegion::Ball, 2.0).unwrap();
        assert_eq!(chart.exp_map(&[0.0, 0.0]).unwrap(), ProjectivePoint::origin(1));
        let z = chart.exp_map(&[PI / 4.0, 0.0]).unwrap();
        assert_relative_eq!(fs_distance(&chart.center, &z), PI / 4.0, epsilon = 1e-14);
        assert!(chart.exp_map(&[1.2, 0.0]).is_err());
        assert!(chart.exp_map(&[0.1]).is_err());
    }

    #[test]
    fn log_inverts_exp() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for m in 1..=3 {
            let center = random_point(m, &mut rng);
            let chart = ChartSpec::new(center, 0.7, ChartRegion::Ball, 2.0).unwrap();
            for _ in 0..50 {
                let v: Vec<f64> = (0..2 * m).map(|_| rng.random_range(-0.5..0.5)).collect();
                let z = chart.exp_map(&v).unwrap();
                let back = chart.log_map(&z);
                for (a, b) in v.iter().zip(&back) {
                    assert_relative_eq!(a, b, epsilon = 1e-12);
                }
            }
        }
    }

    #[test]
    fn tiny_chart_distortion() {
        let chart = ChartSpec::cube(ProjectivePoint::origin(1), 0.01, 1.01).unwrap();
        let g = chart.accept(2000, 0).unwrap();
        assert!(g <= 1.001, "gamma_hat = {g}");
        let g_small = ChartSpec::cube(ProjectivePoint::origin(1), 0.001, 1.01)
            .unwrap()
            .distortion_estimate(2000, 0)
            .unwrap();
        assert!(g_small < g && g_small < 1.00001);
    }

    #[test]
    fn distortion_matches_circle_compression() {
        // Worst case is a short tangential step at the largest radius R of
        // C_{2t}: the ratio is sin(2R)/(2R).
        let t = PI / 8.0;
        let chart = ChartSpec::cube(ProjectivePoint::origin(1), t, 5.0).unwrap();
        let g = chart.distortion_estimate(20_000, 1).unwrap();
        let r = 2.0 * t * 2f64.sqrt();
        let analytic = 2.0 * r / (2.0 * r).sin();
        assert!(g <= analytic * (1.0 + 1e-6));
        assert!(g > 0.8 * analytic, "g = {g}, analytic = {analytic}");
        assert!(matches!(
            ChartSpec::cube(ProjectivePoint::origin(1), t, 1.2).unwrap().accept(2000, 1),
            Err(Error::ChartRejected { .. })
        ));
    }

    #[test]
    fn volume_density_expansion() {
        let chart = ChartSpec::new(ProjectivePoint::origin(1), 1.0, ChartRegion::Ball, 2.0).unwrap();
        assert_eq!(chart.volume_density(&[0.0, 0.0]), 1.0);
        // g(r) = 1 - (2m+1)/6·... for m = 1: (sin r/r) cos r = 1 - (2/3) r² + O(r⁴)
        for &r in &[1e-2, 5e-3, 2.5e-3] {
            let g = chart.volume_density(&[r, 0.0]);
            assert_relative_eq!((1.0 - g) / (r * r), 2.0 / 3.0, epsilon = 1e-4);
        }
    }

    #[test]
    fn volume_from_charts() {
        for m in 1..=2 {
            let chart =
                ChartSpec::new(ProjectivePoint::origin(m), PI / 2.0, ChartRegion::Ball, 2.0).unwrap();
            let v = chart.region_volume(40).unwrap();
            assert_relative_eq!(v, fs_volume(m), max_relative = 1e-10);
        }
        let centers = layout_centers(1, &ChartLayout::Poles).unwrap();
        let charts = voronoi_cover(&centers, 2.0, 0).unwrap();
        let total: f64 = charts.iter().map(|c| c.region_volume(24).unwrap()).sum();
        assert_relative_eq!(total, PI, max_relative = 1e-6);
    }

    #[test]
    fn icosahedral_cover_tiles_sphere() {
        let centers = layout_centers(1, &ChartLayout::Icosahedral).unwrap();
        assert_eq!(centers.len(), 12);
        assert!(fs_distance(&centers[0], &ProjectivePoint::origin(1)) < 1e-12);
        let charts = voronoi_cover(&centers, 1.2, 0).unwrap();
        let total: f64 = charts.iter().map(|c| c.region_volume(24).unwrap()).sum();
        assert_relative_eq!(total, PI, max_relative = 1e-3);
        assert_eq!(covering_defect(&charts, 2000, 5), 0.0);
    }

    #[test]
    fn pole_cubes_leave_a_gap() {
        let centers = layout_centers(1, &ChartLayout::Poles).unwrap();
        let charts: Vec<ChartSpec> = centers
            .into_iter()
            .map(|c| ChartSpec::cube(c, PI / 5.0, 3.0).unwrap())
            .collect();
        let defect = covering_defect(&charts, 40_000, 2);
        // independent route: union volume = Σ cube volumes - overlap, with the
        // overlap empty because each cube stays within distance
        // t√2 < π/2 - ... of its own pole only up to the equatorial band.
        let cube_vol: f64 = charts.iter().map(|c| c.region_volume(48).unwrap()).sum();
        let overlap_mc = {
            let mut rng = ChaCha8Rng::seed_from_u64(9);
            let n = 40_000;
            let hits = (0..n)
                .filter(|_| {
                    let z = random_point(1, &mut rng);
                    charts.iter().all(|c| c.contains_point(&z))
                })
                .count();
            PI * hits as f64 / n as f64
        };
        let union = cube_vol - overlap_mc;
        assert!(defect > 0.0);
        assert_relative_eq!(PI - union, defect, epsilon = 0.03);
    }

    #[test]
    fn sphere_areas() {
        assert_relative_eq!(sphere_area(1), 2.0 * PI, epsilon = 1e-14);
        assert_relative_eq!(sphere_area(2), 4.0 * PI, epsilon = 1e-14);
        assert_relative_eq!(sphere_area(3), 2.0 * PI * PI, epsilon = 1e-13);
    }
}
