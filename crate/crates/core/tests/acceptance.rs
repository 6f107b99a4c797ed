//! Acceptance criteria. Each test prints one PASS/FAIL line.

use std::f64::consts::PI;
use std::time::{Duration, Instant};

use num_complex::Complex64 as C64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use flatsec::constants::ConstantsTable;
use flatsec::flatten::dft_mix;
use flatsec::frame::{build, choose_spacing, LatticeKind, LatticeSpec};
use flatsec::geometry::{random_lift, ChartLayout};
use flatsec::kernel::{
    decay_samples, near_threshold, normalized_kernel, szego_kernel, verify_decay, KernelModel, SectionExpansion,
};
use flatsec::linalg::max_abs_diff;
use flatsec::multiindex::MonomialBasis;
use flatsec::pipeline::{emit_corollary, run, RunConfig};
use flatsec::whitening::{assemble_gram, inv_sqrt_eigen, inv_sqrt_neumann, whiten};

fn verdict(name: &str, ok: bool, detail: String) {
    println!("{} {name}: {detail}", if ok { "PASS" } else { "FAIL" });
    assert!(ok, "{name}: {detail}");
}

fn icosahedral(k: Vec<usize>) -> RunConfig {
    RunConfig {
        k,
        a: Some(1.85),
        gamma: 1.1,
        eta: 0.95,
        delta: 1e-3,
        layout: ChartLayout::Icosahedral,
        dedup_factor: Some(0.9),
        fk_samples: 500,
        ..RunConfig::default()
    }
}

fn farthest_m2(k: Vec<usize>) -> RunConfig {
    RunConfig {
        m: 2,
        k,
        a: Some(2.3),
        gamma: 1.2,
        eta: 0.95,
        delta: 1e-3,
        layout: ChartLayout::FarthestPoint { count: 60, seed: 0 },
        dedup_factor: Some(0.9),
        fk_samples: 500,
        ..RunConfig::default()
    }
}

#[test]
fn constants_reproduction() {
    let published: [(f64, f64); 6] = [
        (0.99220, 0.99564),
        (0.44342, 0.45867),
        (0.17782, 0.19254),
        (0.06630, 0.07572),
        (0.02345, 0.02838),
        (0.00796, 0.01024),
    ];
    let start = Instant::now();
    let table = ConstantsTable::compute(6).unwrap();
    let elapsed = start.elapsed();
    let mut mismatches = vec![];
    for (row, (b, bp)) in table.rows.iter().zip(published) {
        for (name, got, want) in [("beta", row.beta_m, b), ("beta'", row.beta_prime_m, bp)] {
            if format!("{got:.5}") != format!("{want:.5}") {
                mismatches.push(format!("{name}_{} = {got:.7} vs {want:.5}", row.m));
            }
        }
    }
    verdict(
        "constants_reproduction",
        mismatches.is_empty() && elapsed < Duration::from_secs(1),
        format!("12 values at 5 decimals, {mismatches:?}, {elapsed:?}"),
    );
}

/// `C(k + m, m)` in exact integer arithmetic.
fn binomial_exact(k: usize, m: usize) -> u128 {
    (1..=m as u128).fold(1u128, |acc, j| acc * (k as u128 + j) / j)
}

#[test]
fn kernel_exactness() {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let (mut worst, mut worst_diag) = (0.0f64, 0.0f64);
    for m in [1, 2] {
        let vol = PI.powi(m as i32) / (1..=m).product::<usize>() as f64;
        for k in [10, 100, 1000] {
            let model = KernelModel::new(m, k).unwrap();
            let d_k = binomial_exact(k, m) as f64;
            for _ in 0..10_000 {
                let x = random_lift(m, &mut rng);
                let y = random_lift(m, &mut rng);
                let p = normalized_kernel(&model, &x.project(), &y.project());
                let cos_d = x
                    .coords()
                    .iter()
                    .zip(y.coords())
                    .map(|(a, b)| a.conj() * b)
                    .sum::<C64>()
                    .norm();
                let oracle = cos_d.powi(k as i32);
                if p > 0.0 {
                    worst = worst.max((p - oracle).abs() / p);
                }
                let diag = szego_kernel(&model, &x, &x).unwrap().re * vol;
                worst_diag = worst_diag.max((diag - d_k).abs() / d_k);
            }
        }
    }
    let elapsed = start.elapsed();
    verdict(
        "kernel_exactness",
        worst <= 1e-10 && worst_diag <= 1e-12 && elapsed < Duration::from_secs(10),
        format!("max |P - cos^k d|/P = {worst:.2e}, diagonal rel defect {worst_diag:.2e}, {elapsed:?}"),
    );
}

#[test]
fn decay_regimes() {
    let m = 1;
    let mut near = vec![];
    let mut ok = true;
    let mut detail = String::new();
    for k in [100, 400, 1600] {
        let model = KernelModel::new(m, k).unwrap();
        let report = verify_decay(&model, &decay_samples(m, k, 2000, 5));
        let e = report.near().unwrap();
        let bound = report.b * report.b * (k as f64).ln() / (6.0 * k as f64) * 1.01;
        let d = near_threshold(m, k);
        ok &= e.max_deviation <= bound;
        near.push(e.max_deviation);
        let far = report.far().unwrap();
        if k >= 400 {
            ok &= far.max_deviation < 1.0;
        }
        detail += &format!(
            "k={k}: near {:.4e} vs {:.4e} (edge d={d:.3}), far P k^(m+1) {:.3e}; ",
            e.max_deviation, bound, far.max_deviation
        );
    }
    ok &= near.windows(2).all(|w| w[1] < w[0]);
    verdict("decay_regimes", ok, detail);
}

#[test]
fn whitening_bounds() {
    let gamma = 1.7;
    let a = choose_spacing(1, 0.5, gamma);
    let spec = LatticeSpec::single_chart(LatticeKind::Cubic, 1, a, 0.3, gamma, 0.5).unwrap();
    spec.accept_charts().unwrap();
    let ks = [50, 200, 1000, 5000, 20_000, 100_000, 400_000];
    let mut rows = vec![];
    let mut hard_ok = true;
    for k in ks {
        let frame = build(&spec, k).unwrap();
        let g = assemble_gram(&frame).unwrap();
        let b = inv_sqrt_neumann(&g, 1e-13).unwrap();
        let e = inv_sqrt_eigen(&g).unwrap();
        let diff = max_abs_diff(&b.entries, &e.entries);
        let ceiling = (1.0 - g.eta_hat).powf(-0.5) * (1.0 + 1e-6);
        hard_ok &= b.norm_inf <= ceiling && diff <= 1e-8;
        rows.push((k, frame.n(), g.eta_hat, b.norm_inf, diff));
    }
    let k0 = rows
        .iter()
        .rposition(|r| r.2 >= 0.5)
        .map(|i| ks.get(i + 1).copied())
        .unwrap_or(Some(ks[0]));
    let detail = format!(
        "a = {a:.4}, k0 = {k0:?}; (k, n, eta_hat, |B|, neumann-eigen) = {:?}",
        rows.iter()
            .map(|r| format!("({}, {}, {:.3e}, {:.6}, {:.1e})", r.0, r.1, r.2, r.3, r.4))
            .collect::<Vec<_>>()
    );
    verdict("whitening_bounds", hard_ok && k0.is_some_and(|k| k <= 200), detail);
}

/// `‖z^α‖² = π^m α! / (m + k)!` with factorials summed directly in the log
/// domain.
fn exact_weights(basis: &MonomialBasis) -> Vec<f64> {
    let ln_fact = |n: u32| (1..=n).map(|j| (j as f64).ln()).sum::<f64>();
    let (m, k) = (basis.m(), basis.k());
    let ln_total = ln_fact((m + k) as u32);
    basis
        .exponents()
        .iter()
        .map(|alpha| (m as f64 * PI.ln() + alpha.iter().map(|&x| ln_fact(x)).sum::<f64>() - ln_total).exp())
        .collect()
}

fn exact_inner(w: &[f64], a: &SectionExpansion, b: &SectionExpansion) -> C64 {
    w.iter()
        .zip(a.coeffs.iter().zip(&b.coeffs))
        .map(|(w, (x, y))| x * y.conj() * w)
        .sum()
}

#[test]
fn orthonormality() {
    let start = Instant::now();
    let cfg = icosahedral(vec![]);
    let spec = cfg.lattice_spec().unwrap();
    spec.validate().unwrap();
    spec.accept_charts().unwrap();
    let mut detail = vec![];
    let mut worst = 0.0f64;
    for k in [50, 100, 200, 400] {
        let frame = build(&spec, k).unwrap();
        let b = inv_sqrt_neumann(&assemble_gram(&frame).unwrap(), 1e-12).unwrap();
        let fam = dft_mix(&whiten(&frame, &b).unwrap()).unwrap();
        let w = exact_weights(&MonomialBasis::new(1, k));
        let mut dev = 0.0f64;
        for (i, si) in fam.sections.iter().enumerate() {
            for (j, sj) in fam.sections.iter().enumerate() {
                let expect = if i == j { 1.0 } else { 0.0 };
                dev = dev.max((exact_inner(&w, si, sj) - expect).norm());
            }
        }
        worst = worst.max(dev);
        detail.push(format!("k={k} n={} dev={dev:.2e}", frame.n()));
    }
    let elapsed = start.elapsed();
    verdict(
        "orthonormality",
        worst <= 1e-8 && elapsed < Duration::from_secs(120),
        format!("{detail:?}, {elapsed:?}"),
    );
}

#[test]
fn uniform_boundedness() {
    let cfg = RunConfig {
        beta: Some(0.8),
        ..icosahedral(vec![100, 200, 400])
    };
    let manifest = run(&cfg).unwrap();
    let mut ok = true;
    let mut detail = vec![];
    for r in &manifest.rows {
        let chain = r.max_sup <= r.chain_bound * (1.0 + 1e-9);
        let flat = r.max_sup <= 1.10 * r.flat_bound;
        ok &= chain && flat;
        detail.push(format!(
            "k={} max_sup={:.4} chain={:.4} flat_bound={:.4} (beta=n/d={:.3}, eta_hat={:.3})",
            r.k, r.max_sup, r.chain_bound, r.flat_bound, r.ratio, r.eta_hat
        ));
    }
    verdict("uniform_boundedness", ok, format!("{detail:?}"));
}

#[test]
fn density_fraction() {
    let ks = [100, 200, 400, 800, 1600, 3200, 6400];
    let mut ok = true;
    let mut detail = vec![];
    for (kind, a, beta) in [(LatticeKind::Cubic, 1.85, 0.8), (LatticeKind::Hexagonal, 1.95, 0.9)] {
        let cfg = RunConfig {
            lattice: kind,
            a: Some(a),
            beta: Some(beta),
            ..icosahedral(vec![])
        };
        let spec = cfg.lattice_spec().unwrap();
        spec.validate().unwrap();
        spec.accept_charts().unwrap();
        let ratios: Vec<f64> = ks
            .iter()
            .map(|&k| {
                let f = build(&spec, k).unwrap();
                f.n() as f64 / f.d_k() as f64
            })
            .collect();
        let k0 = match ratios.iter().rposition(|&r| r <= beta) {
            None => Some(ks[0]),
            Some(i) => ks.get(i + 1).copied(),
        };
        ok &= k0.is_some();
        detail.push(format!(
            "{kind:?} beta={beta}: k0={k0:?}, n/d={:?}",
            ratios.iter().map(|r| format!("{r:.4}")).collect::<Vec<_>>()
        ));
    }
    verdict("density_fraction", ok, format!("{detail:?}"));
}

#[test]
fn corollary_outputs() {
    let mut ok = true;
    let mut detail = vec![];
    for (cfg, from) in [
        (icosahedral(vec![50, 100, 150, 200]), 50),
        (farthest_m2(vec![10, 20, 30, 40]), 20),
    ] {
        let recs = emit_corollary(&cfg, 50).unwrap();
        let max = recs.iter().map(|r| r.polynomial.sphere_ratio).fold(0.0, f64::max);
        let min_tail = recs
            .iter()
            .filter(|r| r.k >= from)
            .map(|r| r.polynomial.sphere_ratio)
            .fold(f64::INFINITY, f64::min);
        let residual = recs.iter().map(|r| r.eigen.residual).fold(0.0, f64::max);
        ok &= max <= 1.25 * min_tail && residual <= 1e-4;
        detail.push(format!(
            "m={}: ratios {:?}, max/min(k>={from}) = {:.4}, worst eigen residual {residual:.2e}",
            cfg.m,
            recs.iter().map(|r| format!("{:.4}", r.polynomial.sphere_ratio)).collect::<Vec<_>>(),
            max / min_tail
        ));
    }
    verdict("corollary_outputs", ok, format!("{detail:?}"));
}

#[test]
fn m2_smoke_run() {
    let start = Instant::now();
    let manifest = run(&farthest_m2(vec![20, 40])).unwrap();
    let elapsed = start.elapsed();
    let hard: Vec<_> = manifest.checks().filter(|c| c.hard).collect();
    let green = hard.iter().all(|c| c.passed);
    let d40 = manifest.rows.iter().find(|r| r.k == 40).map(|r| r.d);
    verdict(
        "m2_smoke_run",
        green && d40 == Some(861) && elapsed < Duration::from_secs(300),
        format!(
            "{} hard checks green = {green}, d_40 = {d40:?}, n = {:?}, {elapsed:?}",
            hard.len(),
            manifest.rows.iter().map(|r| r.n).collect::<Vec<_>>()
        ),
    );
}
