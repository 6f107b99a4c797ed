//! Lattice point sets pushed through exponential charts, their lifts to the
//! sphere, and the resulting coherent-state frame.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::constants::{eta_lattice_limit_hex, solve_beta, solve_beta_prime};
use crate::error::{Error, Result};
use crate::geometry::{
    covering_defect, euclid, fs_distance, layout_centers, voronoi_cover, ChartLayout, ChartRegion, ChartSpec,
    ProjectivePoint, UnitLift,
};
use crate::multiindex::dimension;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LatticeKind {
    /// `ℤ^{2m}`.
    Cubic,
    /// `(ℤ + e^{iπ/3} ℤ)^m`.
    Hexagonal,
}

/// How the unit representative `y_μ` over a lattice point is chosen.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LiftPhase {
    /// First nonzero coordinate real and positive.
    #[default]
    Canonical,
    /// The phase carried by the chart's unitary frame along the geodesic.
    ChartTransported,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LatticeSpec {
    pub kind: LatticeKind,
    pub m: usize,
    /// Spacing constant: lattice step `a / √k` in tangent coordinates.
    pub a: f64,
    /// Halfwidth of the single cube chart.
    pub t: f64,
    pub gamma: f64,
    pub charts: Vec<ChartSpec>,
    /// Allowed uncovered volume in multi-chart mode.
    pub delta: f64,
    /// Target bound on the off-diagonal Gram row sums.
    pub eta: f64,
    /// Slack in `ã = a √(1 - ε) / γ`.
    pub epsilon: f64,
    /// Points closer than `dedup_factor · a / √k` to an accepted point of an
    /// earlier chart are dropped. Defaults to `1/(2γ)`.
    pub dedup_factor: Option<f64>,
    /// Target density fraction in multi-chart mode.
    pub beta: Option<f64>,
    pub lift_phase: LiftPhase,
    pub distortion_samples: usize,
    pub seed: u64,
}

impl LatticeSpec {
    /// One cube chart `C_t` centered at `[1 : 0 : ... : 0]`.
    pub fn single_chart(kind: LatticeKind, m: usize, a: f64, t: f64, gamma: f64, eta: f64) -> Result<Self> {
        let chart = ChartSpec::cube(ProjectivePoint::origin(m), t, gamma)?;
        Ok(Self {
            kind,
            m,
            a,
            t,
            gamma,
            charts: vec![chart],
            delta: 0.0,
            eta,
            epsilon: 0.05,
            dedup_factor: None,
            beta: None,
            lift_phase: LiftPhase::Canonical,
            distortion_samples: 10_000,
            seed: 0,
        })
    }

    /// Voronoi cells of the given chart centers.
    pub fn multi_chart(
        kind: LatticeKind,
        m: usize,
        layout: &ChartLayout,
        a: f64,
        gamma: f64,
        eta: f64,
        delta: f64,
    ) -> Result<Self> {
        let centers = layout_centers(m, layout)?;
        let charts = voronoi_cover(&centers, gamma, 0)?;
        let t = charts.iter().map(|c| c.halfwidth).fold(0.0, f64::max);
        Ok(Self {
            kind,
            m,
            a,
            t,
            gamma,
            charts,
            delta,
            eta,
            epsilon: 0.05,
            dedup_factor: None,
            beta: None,
            lift_phase: LiftPhase::Canonical,
            distortion_samples: 10_000,
            seed: 0,
        })
    }

    pub fn is_single_cube(&self) -> bool {
        self.charts.len() == 1 && self.charts[0].region == ChartRegion::Cube
    }

    /// `ã = a √(1 - ε) / γ`.
    pub fn a_tilde(&self) -> f64 {
        self.a * (1.0 - self.epsilon).sqrt() / self.gamma
    }

    pub fn dedup_radius(&self, k: usize) -> f64 {
        let f = self.dedup_factor.unwrap_or(1.0 / (2.0 * self.gamma));
        f * self.a / (k as f64).sqrt()
    }

    /// Structural and spacing checks, independent of `k`.
    ///
    /// Single-chart mode enforces the Poisson spacing bound (cubic) or the
    /// exact hexagonal theta bound. Multi-chart mode enforces `a > a_m`
    /// (or `α_m`), `β < π^m/a^{2m}` (scaled by `2/√3` per coordinate for the
    /// hexagonal lattice) and the matching bound on `δ`.
    pub fn validate(&self) -> Result<()> {
        if self.m == 0 || self.charts.is_empty() {
            return Err(Error::InvalidArgument("lattice needs m >= 1 and at least one chart".into()));
        }
        if !(self.a > 0.0) || !(self.t > 0.0) {
            return Err(Error::InvalidArgument("lattice spacing and halfwidth must be positive".into()));
        }
        if !(self.eta > 0.0 && self.eta < 1.0) {
            return Err(Error::InvalidArgument(format!("eta must lie in (0, 1), got {}", self.eta)));
        }
        if !(self.gamma > 1.0) {
            return Err(Error::InvalidArgument(format!("gamma must exceed 1, got {}", self.gamma)));
        }
        if !(self.epsilon > 0.0 && self.epsilon < 1.0) {
            return Err(Error::InvalidArgument(format!("epsilon must lie in (0, 1), got {}", self.epsilon)));
        }
        if self.charts.iter().any(|c| c.m() != self.m) {
            return Err(Error::InvalidArgument("chart dimension differs from lattice dimension".into()));
        }
        if self.is_single_cube() {
            match self.kind {
                LatticeKind::Cubic => {
                    let bound = spacing_bound(self.m, self.eta, self.gamma);
                    if self.a <= bound {
                        return Err(Error::Spacing {
                            a: self.a,
                            bound,
                            rule: "Poisson row-sum bound",
                        });
                    }
                }
                LatticeKind::Hexagonal => {
                    let lim = eta_lattice_limit_hex(self.a_tilde(), self.m)?;
                    if lim > self.eta {
                        return Err(Error::Spacing {
                            a: self.a,
                            bound: hex_spacing_bound(self.m, self.eta, self.gamma, self.epsilon)?,
                            rule: "hexagonal theta row-sum bound",
                        });
                    }
                }
            }
            return Ok(());
        }
        let m = self.m as i32;
        let (a_m, density) = match self.kind {
            LatticeKind::Cubic => (solve_beta(self.m)?.spacing, PI.powi(m) / self.a.powi(2 * m)),
            LatticeKind::Hexagonal => (
                solve_beta_prime(self.m)?.spacing,
                (2.0 * PI / (3f64.sqrt() * self.a * self.a)).powi(m),
            ),
        };
        if self.a <= a_m {
            return Err(Error::Spacing {
                a: self.a,
                bound: a_m,
                rule: "critical spacing of the universal constant",
            });
        }
        if let Some(beta) = self.beta {
            if beta >= density {
                return Err(Error::InvalidArgument(format!(
                    "beta {beta} must stay below the lattice density {density}"
                )));
            }
            let slack = density - beta;
            let factorial: f64 = (1..=self.m).map(|j| j as f64).product();
            let delta_max = self.a.powi(2 * m) * slack / (3.0 * factorial);
            if self.delta > delta_max {
                return Err(Error::InvalidArgument(format!(
                    "delta {} exceeds {delta_max} allowed by the density slack",
                    self.delta
                )));
            }
        }
        Ok(())
    }

    /// Sampled distortion of every chart; rejects any chart at or above `γ`.
    pub fn accept_charts(&self) -> Result<Vec<f64>> {
        self.charts
            .iter()
            .enumerate()
            .map(|(j, c)| c.accept(self.distortion_samples, self.seed.wrapping_add(j as u64)))
            .collect()
    }

    /// Monte Carlo check that the charts leave less than `δ` uncovered.
    pub fn check_covering(&self, nsamples: usize) -> Result<f64> {
        let defect = covering_defect(&self.charts, nsamples, self.seed);
        if self.charts.len() > 1 && defect >= self.delta.max(f64::MIN_POSITIVE) {
            return Err(Error::Covering {
                defect,
                delta: self.delta,
            });
        }
        Ok(defect)
    }
}

/// `γ √(2π) / ((1 + η)^{1/(2m)} - 1)`.
pub fn spacing_bound(m: usize, eta: f64, gamma: f64) -> f64 {
    gamma * (2.0 * PI).sqrt() / ((1.0 + eta).powf(1.0 / (2 * m) as f64) - 1.0)
}

/// Spacing bound times the safety factor `1.01`.
pub fn choose_spacing(m: usize, eta: f64, gamma: f64) -> f64 {
    1.01 * spacing_bound(m, eta, gamma)
}

/// Smallest `a` with `Θ(a √(1-ε)/γ)^m - 1 ≤ η` for the hexagonal lattice.
pub fn hex_spacing_bound(m: usize, eta: f64, gamma: f64, epsilon: f64) -> Result<f64> {
    let f = |a: f64| eta_lattice_limit_hex(a * (1.0 - epsilon).sqrt() / gamma, m).map(|v| v - eta);
    let (mut lo, mut hi) = (1e-3, 1.0);
    while f(hi)? > 0.0 {
        hi *= 2.0;
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if f(mid)? > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(hi)
}

/// Label of a frame point: chart index and lattice coordinates.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LatticeIndex {
    pub chart: usize,
    pub mu: Vec<i64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Frame {
    pub m: usize,
    pub k: usize,
    pub points: Vec<ProjectivePoint>,
    pub lifts: Vec<UnitLift>,
    /// The ordering `τ`: position `q` holds the lattice label of `Ψ_{τ^q}`.
    pub index: Vec<LatticeIndex>,
    pub tangent: Vec<Vec<f64>>,
    pub spec: LatticeSpec,
    /// Points removed by the cross-chart distance rule.
    pub dropped: usize,
}

impl Frame {
    pub fn n(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn d_k(&self) -> usize {
        dimension(self.m, self.k)
    }

    /// `n_k / d_k`.
    pub fn density(&self) -> f64 {
        self.n() as f64 / self.d_k() as f64
    }

    /// Smallest pairwise Fubini–Study distance.
    pub fn min_separation(&self) -> f64 {
        let mut best = f64::INFINITY;
        for i in 0..self.n() {
            for j in 0..i {
                best = best.min(fs_distance(&self.points[i], &self.points[j]));
            }
        }
        best
    }

    /// Distance from each point to its nearest neighbour.
    pub fn nearest_neighbor_distances(&self) -> Vec<f64> {
        (0..self.n())
            .map(|i| {
                (0..self.n())
                    .filter(|&j| j != i)
                    .map(|j| fs_distance(&self.points[i], &self.points[j]))
                    .fold(f64::INFINITY, f64::min)
            })
            .collect()
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}

/// Expected single-chart count `(2⌊t√k/a⌋ + 1)^{2m}`.
pub fn cubic_count(m: usize, t: f64, a: f64, k: usize) -> usize {
    let l = (t * (k as f64).sqrt() / a).floor() as usize;
    (2 * l + 1).pow(2 * m as u32)
}

/// Tangent vector of lattice coordinates `μ` at step `h = a/√k`.
fn lattice_vector(kind: LatticeKind, mu: &[i64], h: f64) -> Vec<f64> {
    match kind {
        LatticeKind::Cubic => mu.iter().map(|&x| h * x as f64).collect(),
        LatticeKind::Hexagonal => {
            let s = 3f64.sqrt() / 2.0;
            let mut v = Vec::with_capacity(mu.len());
            for pair in mu.chunks(2) {
                let (m1, m2) = (pair[0] as f64, pair[1] as f64);
                v.push(h * (m1 + 0.5 * m2));
                v.push(h * s * m2);
            }
            v
        }
    }
}

/// Every `μ ∈ ℤ^{dim}` with `|μ_i| ≤ bound[i]`, lexicographic.
fn box_points(bounds: &[i64]) -> Vec<Vec<i64>> {
    let mut out = vec![Vec::with_capacity(bounds.len())];
    for &b in bounds {
        let mut next = Vec::with_capacity(out.len() * (2 * b as usize + 1));
        for prefix in &out {
            for x in -b..=b {
                let mut p = prefix.clone();
                p.push(x);
                next.push(p);
            }
        }
        out = next;
    }
    out
}

/// Lattice coordinates whose tangent vectors could reach radius `r`.
fn candidate_box(kind: LatticeKind, m: usize, r: f64, h: f64) -> Vec<i64> {
    let base = (r / h).ceil() as i64;
    match kind {
        LatticeKind::Cubic => vec![base; 2 * m],
        // |m1 + m2/2| ≤ r/h and |m2| ≤ 2r/(√3 h) imply |m1| ≤ r/h + r/(√3 h)
        LatticeKind::Hexagonal => {
            let b2 = (2.0 * r / (3f64.sqrt() * h)).ceil() as i64;
            let b1 = base + (b2 + 1) / 2;
            (0..m).flat_map(|_| [b1, b2]).collect()
        }
    }
}

fn make_lift(spec: &LatticeSpec, chart: &ChartSpec, v: &[f64], z: &ProjectivePoint) -> UnitLift {
    match spec.lift_phase {
        LiftPhase::Canonical => z.lift(),
        LiftPhase::ChartTransported => chart.exp_lift(v),
    }
}

/// Cube lattice in a single chart: `z_μ = exp(a μ / √k)` with `a μ/√k ∈ C_t`.
pub fn build_cubic(spec: &LatticeSpec, k: usize) -> Result<Frame> {
    if spec.kind != LatticeKind::Cubic {
        return Err(Error::InvalidArgument("build_cubic needs a cubic lattice".into()));
    }
    build_single(spec, k)
}

/// Hexagonal lattice `a (μ₁ + e^{iπ/3} μ₂, ...) / √k` inside `C_t`, or in
/// every chart of a multi-chart spec.
pub fn build_hexagonal(spec: &LatticeSpec, k: usize) -> Result<Frame> {
    if spec.kind != LatticeKind::Hexagonal {
        return Err(Error::InvalidArgument("build_hexagonal needs a hexagonal lattice".into()));
    }
    if spec.is_single_cube() {
        build_single(spec, k)
    } else {
        build_multichart(spec, k)
    }
}

fn empty_frame(spec: &LatticeSpec, k: usize) -> Frame {
    Frame {
        m: spec.m,
        k,
        points: vec![],
        lifts: vec![],
        index: vec![],
        tangent: vec![],
        spec: spec.clone(),
        dropped: 0,
    }
}

fn build_single(spec: &LatticeSpec, k: usize) -> Result<Frame> {
    spec.validate()?;
    if !spec.is_single_cube() {
        return Err(Error::InvalidArgument("single-chart builder needs exactly one cube chart".into()));
    }
    if k == 0 {
        return Ok(empty_frame(spec, k));
    }
    let chart = &spec.charts[0];
    let h = spec.a / (k as f64).sqrt();
    let t = chart.halfwidth;
    let mut frame = empty_frame(spec, k);
    let candidates = match spec.kind {
        LatticeKind::Cubic => {
            let l = (t * (k as f64).sqrt() / spec.a).floor() as i64;
            box_points(&vec![l; 2 * spec.m])
        }
        LatticeKind::Hexagonal => box_points(&candidate_box(spec.kind, spec.m, t * 2f64.sqrt(), h)),
    };
    for mu in candidates {
        let v = lattice_vector(spec.kind, &mu, h);
        if !v.iter().all(|x| x.abs() <= t) {
            continue;
        }
        let z = chart.exp_map(&v)?;
        frame.lifts.push(make_lift(spec, chart, &v, &z));
        frame.points.push(z);
        frame.index.push(LatticeIndex { chart: 0, mu });
        frame.tangent.push(v);
    }
    Ok(frame)
}

/// Lattices in every chart of the cover, restricted to the chart cells, with
/// cross-chart duplicates removed.
pub fn build_multichart(spec: &LatticeSpec, k: usize) -> Result<Frame> {
    spec.validate()?;
    if spec.is_single_cube() {
        return build_single(spec, k);
    }
    if k == 0 {
        return Ok(empty_frame(spec, k));
    }
    let h = spec.a / (k as f64).sqrt();
    let rmin = spec.dedup_radius(k);
    let mut frame = empty_frame(spec, k);
    let mut first_of_chart = Vec::with_capacity(spec.charts.len());
    for (j, chart) in spec.charts.iter().enumerate() {
        first_of_chart.push(frame.points.len());
        let r = chart.halfwidth.min(PI / 2.0 - 1e-9);
        for mu in box_points(&candidate_box(spec.kind, spec.m, r, h)) {
            let v = lattice_vector(spec.kind, &mu, h);
            if euclid(&v) > r {
                continue;
            }
            if !chart.contains_tangent(&v) {
                continue;
            }
            let z = chart.exp_unchecked(&v);
            let earlier = first_of_chart[j];
            if frame.points[..earlier].iter().any(|p| fs_distance(p, &z) < rmin) {
                frame.dropped += 1;
                continue;
            }
            frame.lifts.push(make_lift(spec, chart, &v, &z));
            frame.points.push(z);
            frame.index.push(LatticeIndex { chart: j, mu });
            frame.tangent.push(v);
        }
    }
    Ok(frame)
}

/// Dispatch on lattice kind and chart layout.
pub fn build(spec: &LatticeSpec, k: usize) -> Result<Frame> {
    match (spec.kind, spec.is_single_cube()) {
        (LatticeKind::Cubic, true) => build_cubic(spec, k),
        (LatticeKind::Hexagonal, _) => build_hexagonal(spec, k),
        (LatticeKind::Cubic, false) => build_multichart(spec, k),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constants::eta_ceiling;
    use approx::assert_relative_eq;

    fn cubic(m: usize, a: f64, t: f64, gamma: f64) -> LatticeSpec {
        // eta chosen loose enough for the spacing check
        let eta = (1.0 + (2.0 * PI).sqrt() * gamma / a).powi(2 * m as i32) - 1.0 + 1e-9;
        LatticeSpec::single_chart(LatticeKind::Cubic, m, a, t, gamma, eta.min(0.999)).unwrap()
    }

    #[test]
    fn spacing_arithmetic() {
        let a = choose_spacing(1, 0.5, 1.0);
        let direct = (2.0 * PI).sqrt() / (1.5f64.sqrt() - 1.0) * 1.01;
        assert_relative_eq!(a, direct, max_relative = 1e-15);
        assert!((a - 11.26).abs() < 0.01);
        // at the bound itself the Poisson ceiling equals η exactly
        assert_relative_eq!(eta_ceiling(a / 1.01, 2), 0.5, max_relative = 1e-12);
        assert!(choose_spacing(1, 1e-6, 1.0) > 1e6);
    }

    #[test]
    fn count_matches_formula() {
        let spec = cubic(1, 15.0, 1.0, 1.5);
        for k in [1, 100, 225, 1000, 4000] {
            let f = build_cubic(&spec, k).unwrap();
            assert_eq!(f.n(), cubic_count(1, 1.0, 15.0, k), "k = {k}");
        }
        let spec = cubic(2, 40.0, 0.3, 1.5);
        let f = build_cubic(&spec, 90_000).unwrap();
        assert_eq!(f.n(), cubic_count(2, 0.3, 40.0, 90_000));
    }

    #[test]
    fn small_example_count() {
        // m = 1, t = 1, a = 2, k = 100: (2·5 + 1)² = 121
        assert_eq!(cubic_count(1, 1.0, 2.0, 100), 121);
        let mut spec = cubic(1, 12.0, 1.0, 1.5);
        spec.a = 2.0;
        spec.eta = 0.99;
        // the spacing rule rejects a = 2, the count formula still applies
        assert!(matches!(build_cubic(&spec, 100), Err(Error::Spacing { .. })));
    }

    #[test]
    fn count_asymptotics() {
        let (a, t) = (15.0, 1.0);
        let spec = cubic(1, a, t, 1.5);
        let ratio = |k: usize| {
            let n = build_cubic(&spec, k).unwrap().n() as f64;
            n * a * a / ((2.0 * t).powi(2) * k as f64)
        };
        assert!((ratio(1_000_000) - 1.0).abs() < 0.02);
    }

    #[test]
    fn neighbor_distances_within_distortion() {
        let gamma = 1.3;
        let spec = cubic(1, 12.0, 0.3, gamma);
        let k = 10_000;
        let f = build_cubic(&spec, k).unwrap();
        let step = 12.0 / (k as f64).sqrt();
        for d in f.nearest_neighbor_distances() {
            assert!(d >= step / gamma && d <= gamma * step, "{d} vs {step}");
        }
    }

    #[test]
    fn hexagonal_norm_identity_and_density() {
        for (m1, m2) in [(1i64, 0i64), (2, -1), (-3, 5)] {
            let v = lattice_vector(LatticeKind::Hexagonal, &[m1, m2], 1.0);
            let q = (m1 * m1 + m2 * m2 + m1 * m2) as f64;
            assert_relative_eq!(v[0] * v[0] + v[1] * v[1], q, epsilon = 1e-12);
        }
        // count lattice points in a big ball of the plane
        let r = 200.0;
        let count = |kind| {
            box_points(&candidate_box(kind, 1, r, 1.0))
                .into_iter()
                .filter(|mu| euclid(&lattice_vector(kind, mu, 1.0)) <= r)
                .count() as f64
        };
        let ratio = count(LatticeKind::Hexagonal) / count(LatticeKind::Cubic);
        assert!((ratio - 2.0 / 3f64.sqrt()).abs() < 2e-3, "{ratio}");
    }

    #[test]
    fn empty_cases() {
        let spec = cubic(1, 12.0, 1.0, 1.5);
        assert!(build_cubic(&spec, 0).unwrap().is_empty());
        let mut hex = spec.clone();
        hex.kind = LatticeKind::Hexagonal;
        assert!(build_hexagonal(&hex, 0).unwrap().is_empty());
    }

    #[test]
    fn multichart_single_chart_is_cubic() {
        let spec = cubic(1, 12.0, 0.8, 1.5);
        assert_eq!(build_multichart(&spec, 300).unwrap(), build_cubic(&spec, 300).unwrap());
    }

    #[test]
    fn multichart_points_in_cells() {
        let mut spec =
            LatticeSpec::multi_chart(LatticeKind::Cubic, 1, &ChartLayout::Icosahedral, 1.85, 1.1, 0.95, 1e-3)
                .unwrap();
        spec.dedup_factor = Some(0.9);
        let f = build_multichart(&spec, 200).unwrap();
        assert!(f.n() > 100);
        for (p, idx) in f.points.iter().zip(&f.index) {
            assert!(spec.charts[idx.chart].contains_point(p));
        }
        let cross_min = f
            .points
            .iter()
            .zip(&f.index)
            .flat_map(|(p, i)| {
                f.points
                    .iter()
                    .zip(&f.index)
                    .filter(move |(_, j)| j.chart != i.chart)
                    .map(move |(q, _)| fs_distance(p, q))
            })
            .fold(f64::INFINITY, f64::min);
        assert!(cross_min >= spec.dedup_radius(200) * (1.0 - 1e-12));
    }

    #[test]
    fn multichart_validation() {
        let spec =
            LatticeSpec::multi_chart(LatticeKind::Cubic, 1, &ChartLayout::Icosahedral, 1.5, 1.1, 0.9, 1e-3).unwrap();
        assert!(matches!(spec.validate(), Err(Error::Spacing { .. })));
        let mut spec =
            LatticeSpec::multi_chart(LatticeKind::Cubic, 1, &ChartLayout::Icosahedral, 1.95, 1.1, 0.9, 1e-3).unwrap();
        spec.beta = Some(0.8);
        spec.validate().unwrap();
        spec.beta = Some(0.83);
        assert!(spec.validate().is_err());
        assert_eq!(spec.check_covering(4000).unwrap(), 0.0);
    }

    #[test]
    fn pole_cover_defect_is_enforced() {
        let charts: Vec<ChartSpec> = layout_centers(1, &ChartLayout::Poles)
            .unwrap()
            .into_iter()
            .map(|c| ChartSpec::cube(c, PI / 5.0, 3.0).unwrap())
            .collect();
        let defect = covering_defect(&charts, 100_000, 3);
        assert!(defect > 0.0);
        let mut spec = LatticeSpec::single_chart(LatticeKind::Cubic, 1, 2.0, PI / 5.0, 3.0, 0.5).unwrap();
        spec.charts = charts;
        spec.delta = defect * 0.5;
        assert!(matches!(spec.check_covering(100_000), Err(Error::Covering { .. })));
        spec.delta = defect * 1.5;
        assert!(spec.check_covering(100_000).is_ok());
    }

    #[test]
    fn transported_lifts_project_to_points() {
        let mut spec = cubic(1, 12.0, 0.5, 1.5);
        spec.lift_phase = LiftPhase::ChartTransported;
        let f = build_cubic(&spec, 300).unwrap();
        for (p, l) in f.points.iter().zip(&f.lifts) {
            assert_eq!(&l.project(), p);
        }
    }

    #[test]
    fn frame_json_round_trip() {
        let f = build_cubic(&cubic(1, 12.0, 0.5, 1.5), 100).unwrap();
        let back: Frame = serde_json::from_str(&f.to_json().unwrap()).unwrap();
        assert_eq!(back, f);
    }
}
