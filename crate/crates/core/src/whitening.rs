//! Gram matrices of coherent frames and their inverse square roots.

use std::io::{Read, Write};
use std::path::Path;

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::frame::Frame;
use crate::geometry::inner;
use crate::kernel::{coherent_state, ln_cos_distance, KernelModel, SectionExpansion};
use crate::linalg::{hermitian_eigen, hermitian_function, inf_norm, matmul, CMatrix};
use crate::multiindex::MonomialBasis;

/// `Δ_{μν} = ⟨Φ_μ, Φ_ν⟩` for a coherent frame.
#[derive(Clone, Debug, PartialEq)]
pub struct GramMatrix {
    pub entries: CMatrix,
    pub offdiag_row_sums: Vec<f64>,
    pub eta_hat: f64,
}

impl GramMatrix {
    pub fn from_entries(entries: CMatrix) -> Result<Self> {
        if entries.nrows() != entries.ncols() {
            return Err(Error::Dimension {
                expected: entries.nrows(),
                got: entries.ncols(),
            });
        }
        let n = entries.nrows();
        let offdiag_row_sums: Vec<f64> = (0..n)
            .map(|i| (0..n).filter(|&j| j != i).map(|j| entries[(i, j)].norm()).sum::<f64>() + 0.0)
            .collect();
        let eta_hat = offdiag_row_sums.iter().cloned().fold(0.0, f64::max);
        Ok(Self {
            entries,
            offdiag_row_sums,
            eta_hat,
        })
    }

    pub fn n(&self) -> usize {
        self.entries.nrows()
    }

    /// `A = I - Δ`.
    pub fn off_diagonal(&self) -> CMatrix {
        CMatrix::identity(self.n(), self.n()) - &self.entries
    }
}

/// `Δ_{μν} = Π_k(y_ν, y_μ) / diag = ⟨y_ν, y_μ⟩^k`, with the modulus taken
/// through `ln cos dist`.
pub fn assemble_gram(frame: &Frame) -> Result<GramMatrix> {
    let n = frame.n();
    if n == 0 {
        return Err(Error::EmptyFrame);
    }
    let k = frame.k as f64;
    let mut g = CMatrix::identity(n, n);
    for mu in 0..n {
        let ym = frame.lifts[mu].coords();
        for nu in 0..mu {
            let yn = frame.lifts[nu].coords();
            let c = inner(yn, ym);
            let v = if c.norm() == 0.0 {
                C64::new(0.0, 0.0)
            } else {
                C64::from_polar((k * ln_cos_distance(ym, yn)).exp(), k * c.arg())
            };
            g[(mu, nu)] = v;
            g[(nu, mu)] = v.conj();
        }
    }
    GramMatrix::from_entries(g)
}

/// `η̂ = ‖A‖_{ℓ∞→ℓ∞} = max_μ Σ_{ν≠μ} |Δ_{μν}|`.
pub fn eta_measure(g: &GramMatrix) -> f64 {
    g.eta_hat
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WhiteningMethod {
    Neumann,
    Eigen,
}

/// `B = Δ^{-1/2}`.
#[derive(Clone, Debug, PartialEq)]
pub struct WhiteningOperator {
    pub entries: CMatrix,
    pub method: WhiteningMethod,
    /// `‖B‖_{ℓ∞→ℓ∞}`.
    pub norm_inf: f64,
    /// Number of powers of `A` summed (Neumann only).
    pub series_terms: Option<usize>,
    /// Smallest eigenvalue of `Δ` (eigen only).
    pub min_eigenvalue: Option<f64>,
}

const MAX_SERIES_TERMS: usize = 200_000;

/// `Δ^{-1/2} = Σ_j (2j)!/(4^j j!²) A^j`, summed until the `ℓ∞→ℓ∞` norm of the
/// next term drops below `tol`.
pub fn inv_sqrt_neumann(g: &GramMatrix, tol: f64) -> Result<WhiteningOperator> {
    if !(tol > 0.0) {
        return Err(Error::InvalidArgument(format!("tolerance must be positive, got {tol}")));
    }
    if g.eta_hat >= 1.0 {
        return Err(Error::Divergence { eta_hat: g.eta_hat });
    }
    let n = g.n();
    let a = g.off_diagonal();
    let mut b = CMatrix::identity(n, n);
    let mut power = CMatrix::identity(n, n);
    let mut coeff = 1.0;
    let mut terms = 0;
    for j in 1..=MAX_SERIES_TERMS {
        power = matmul(&power, &a);
        coeff *= (2 * j - 1) as f64 / (2 * j) as f64;
        if coeff * inf_norm(&power) < tol {
            break;
        }
        b += &power * C64::new(coeff, 0.0);
        terms = j;
    }
    Ok(WhiteningOperator {
        norm_inf: inf_norm(&b),
        entries: b,
        method: WhiteningMethod::Neumann,
        series_terms: Some(terms),
        min_eigenvalue: None,
    })
}

/// `Δ^{-1/2}` through the Hermitian eigendecomposition `λ ↦ λ^{-1/2}`.
pub fn inv_sqrt_eigen(g: &GramMatrix) -> Result<WhiteningOperator> {
    let (values, vectors) = hermitian_eigen(&g.entries)?;
    let min = values.first().copied().unwrap_or(1.0);
    if !(min > 0.0) {
        return Err(Error::NotPositiveDefinite { min_eigenvalue: min });
    }
    let b = hermitian_function(&values, &vectors, |x| x.powf(-0.5));
    Ok(WhiteningOperator {
        norm_inf: inf_norm(&b),
        entries: b,
        method: WhiteningMethod::Eigen,
        series_terms: None,
        min_eigenvalue: Some(min),
    })
}

/// Coefficient matrix of the coherent states: column `ν` holds `Φ_ν` in the
/// orthonormal monomial basis `χ_α`.
pub fn coherent_matrix(frame: &Frame, basis: &MonomialBasis) -> Result<CMatrix> {
    let model = KernelModel::new(frame.m, frame.k)?;
    let mut out = CMatrix::zeros(basis.len(), frame.n());
    for (nu, y) in frame.lifts.iter().enumerate() {
        let phi = coherent_state(&model, basis, y)?;
        for (i, c) in phi.orthonormal_coeffs(basis).into_iter().enumerate() {
            out[(i, nu)] = c;
        }
    }
    Ok(out)
}

/// Columns of `Φ Bᵀ`: `Ψ_μ = Σ_ν B_{μν} Φ_ν`, still in the `χ_α` basis.
pub fn whiten_matrix(phi: &CMatrix, b: &WhiteningOperator) -> CMatrix {
    matmul(phi, &b.entries.transpose())
}

/// The quasi-coherent states `Ψ_μ` as monomial expansions.
pub fn whiten(frame: &Frame, b: &WhiteningOperator) -> Result<Vec<SectionExpansion>> {
    let basis = MonomialBasis::new(frame.m, frame.k);
    let psi = whiten_matrix(&coherent_matrix(frame, &basis)?, b);
    Ok(columns_to_sections(&psi, &basis))
}

pub(crate) fn columns_to_sections(mat: &CMatrix, basis: &MonomialBasis) -> Vec<SectionExpansion> {
    (0..mat.ncols())
        .map(|j| {
            let col: Vec<C64> = mat.column(j).iter().copied().collect();
            SectionExpansion::from_orthonormal_coeffs(basis, &col)
        })
        .collect()
}

const DUMP_MAGIC: &[u8; 8] = b"FLATSEC1";

/// Header of a binary matrix dump.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DumpHeader {
    pub m: u64,
    pub k: u64,
    pub rows: u64,
    pub cols: u64,
    pub ordering: String,
}

/// Write a complex matrix row-major as little-endian `(re, im)` pairs after
/// a header holding `m`, `k`, the shape and an ordering tag.
pub fn write_dump(path: &Path, header: &DumpHeader, mat: &CMatrix) -> Result<()> {
    if header.rows as usize != mat.nrows() || header.cols as usize != mat.ncols() {
        return Err(Error::InvalidArgument("dump header does not match matrix shape".into()));
    }
    let mut w = std::io::BufWriter::new(std::fs::File::create(path)?);
    w.write_all(DUMP_MAGIC)?;
    for v in [header.m, header.k, header.rows, header.cols, header.ordering.len() as u64] {
        w.write_all(&v.to_le_bytes())?;
    }
    w.write_all(header.ordering.as_bytes())?;
    for i in 0..mat.nrows() {
        for j in 0..mat.ncols() {
            let c = mat[(i, j)];
            w.write_all(&c.re.to_le_bytes())?;
            w.write_all(&c.im.to_le_bytes())?;
        }
    }
    w.flush()?;
    Ok(())
}

pub fn read_dump(path: &Path) -> Result<(DumpHeader, CMatrix)> {
    let mut r = std::io::BufReader::new(std::fs::File::open(path)?);
    let mut magic = [0u8; 8];
    r.read_exact(&mut magic)?;
    if &magic != DUMP_MAGIC {
        return Err(Error::InvalidArgument("not a matrix dump".into()));
    }
    let mut word = [0u8; 8];
    let mut next = |r: &mut std::io::BufReader<std::fs::File>| -> Result<u64> {
        r.read_exact(&mut word)?;
        Ok(u64::from_le_bytes(word))
    };
    let (m, k, rows, cols, tag_len) = (next(&mut r)?, next(&mut r)?, next(&mut r)?, next(&mut r)?, next(&mut r)?);
    let mut tag = vec![0u8; tag_len as usize];
    r.read_exact(&mut tag)?;
    let ordering = String::from_utf8(tag).map_err(|e| Error::InvalidArgument(e.to_string()))?;
    let mut mat = CMatrix::zeros(rows as usize, cols as usize);
    let mut buf = [0u8; 8];
    for i in 0..rows as usize {
        for j in 0..cols as usize {
            r.read_exact(&mut buf)?;
            let re = f64::from_le_bytes(buf);
            r.read_exact(&mut buf)?;
            mat[(i, j)] = C64::new(re, f64::from_le_bytes(buf));
        }
    }
    Ok((
        DumpHeader {
            m,
            k,
            rows,
            cols,
            ordering,
        },
        mat,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::frame::{build_cubic, choose_spacing, LatticeKind, LatticeSpec};
    use crate::geometry::{fs_distance, ChartRegion, ChartSpec, ProjectivePoint};
    use crate::linalg::{identity_defect, max_abs_diff, rank};
    use approx::assert_relative_eq;

    fn gram(rows: &[[f64; 2]; 2]) -> GramMatrix {
        GramMatrix::from_entries(CMatrix::from_fn(2, 2, |i, j| C64::new(rows[i][j], 0.0))).unwrap()
    }

    fn frame(k: usize) -> Frame {
        let a = choose_spacing(1, 0.5, 1.2);
        let spec = LatticeSpec::single_chart(LatticeKind::Cubic, 1, a, 0.6, 1.2, 0.5).unwrap();
        build_cubic(&spec, k).unwrap()
    }

    #[test]
    fn row_sum_measure() {
        assert_eq!(eta_measure(&gram(&[[1.0, 0.0], [0.0, 1.0]])), 0.0);
        let g = GramMatrix::from_entries(CMatrix::from_fn(2, 2, |i, j| {
            C64::new([[1.0, 0.5], [0.25, 1.0]][i][j], 0.0)
        }))
        .unwrap();
        assert_eq!(eta_measure(&g), 0.5);
    }

    #[test]
    fn identity_whitening() {
        let g = gram(&[[1.0, 0.0], [0.0, 1.0]]);
        let b = inv_sqrt_neumann(&g, 1e-10).unwrap();
        assert_eq!(b.series_terms, Some(0));
        assert_eq!(identity_defect(&b.entries), 0.0);
        assert!(identity_defect(&inv_sqrt_eigen(&g).unwrap().entries) < 1e-15);
    }

    #[test]
    fn two_by_two_against_eigen_oracle() {
        let g = gram(&[[1.0, 0.3], [0.3, 1.0]]);
        let b = inv_sqrt_neumann(&g, 1e-14).unwrap();
        // eigenvectors (1, ±1)/√2 with eigenvalues 1.3 and 0.7
        let (p, q) = (1.3f64.powf(-0.5), 0.7f64.powf(-0.5));
        assert_relative_eq!(b.entries[(0, 0)].re, 0.5 * (p + q), epsilon = 1e-13);
        assert_relative_eq!(b.entries[(0, 1)].re, 0.5 * (p - q), epsilon = 1e-13);
        // ‖A^j‖ = 0.3^j, so the count follows the geometric rate
        let terms = b.series_terms.unwrap() as f64;
        let estimate = 1e-14f64.ln() / 0.3f64.ln();
        assert!((terms - estimate).abs() <= 3.0, "{terms} vs {estimate}");
    }

    #[test]
    fn divergence_is_reported() {
        let g = gram(&[[1.0, 1.0], [1.0, 1.0]]);
        assert!(matches!(inv_sqrt_neumann(&g, 1e-10), Err(Error::Divergence { .. })));
        assert!(matches!(inv_sqrt_eigen(&g), Err(Error::NotPositiveDefinite { .. })));
    }

    #[test]
    fn gram_entries_are_normalized_kernel() {
        let f = frame(150);
        let g = assemble_gram(&f).unwrap();
        assert!(crate::linalg::hermitian_defect(&g.entries) < 1e-12);
        for i in 0..f.n() {
            assert_eq!(g.entries[(i, i)], C64::new(1.0, 0.0));
            for j in 0..f.n() {
                let d = fs_distance(&f.points[i], &f.points[j]);
                assert!((g.entries[(i, j)].norm() - d.cos().powi(150)).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn two_point_gram_matches_inner_product() {
        let chart = ChartSpec::new(ProjectivePoint::origin(1), 1.0, ChartRegion::Ball, 2.0).unwrap();
        let mut f = frame(30);
        f.points = vec![chart.exp_map(&[0.0, 0.0]).unwrap(), chart.exp_map(&[0.3, 0.2]).unwrap()];
        f.lifts = f.points.iter().map(|p| p.lift()).collect();
        let g = assemble_gram(&f).unwrap();
        let basis = MonomialBasis::new(1, 30);
        let phi = coherent_matrix(&f, &basis).unwrap();
        let ip: C64 = (0..basis.len()).map(|i| phi[(i, 1)] * phi[(i, 0)].conj()).sum();
        assert!((g.entries[(1, 0)] - ip).norm() < 1e-13);
        let d = fs_distance(&f.points[0], &f.points[1]);
        assert_relative_eq!(g.entries[(0, 1)].norm(), d.cos().powi(30), max_relative = 1e-12);
    }

    #[test]
    fn neumann_matches_eigen_and_whitens() {
        let f = frame(100);
        let g = assemble_gram(&f).unwrap();
        let bn = inv_sqrt_neumann(&g, 1e-10).unwrap();
        let be = inv_sqrt_eigen(&g).unwrap();
        assert!(max_abs_diff(&bn.entries, &be.entries) < 1e-8);
        assert!(be.min_eigenvalue.unwrap() >= 1.0 - g.eta_hat - 1e-12);
        assert!(bn.norm_inf <= (1.0 - g.eta_hat).powf(-0.5) * (1.0 + 1e-6));
        for b in [&bn, &be] {
            let check = matmul(&matmul(&b.entries, &g.entries), &b.entries);
            assert!(identity_defect(&check) < 1e-8);
        }
        let basis = MonomialBasis::new(1, 100);
        let phi = coherent_matrix(&f, &basis).unwrap();
        let psi = whiten_matrix(&phi, &bn);
        let gram_psi = matmul(&psi.transpose(), &psi.map(|c| c.conj()));
        assert!(identity_defect(&gram_psi) < 1e-8);
        assert_eq!(rank(&psi, 1e-10), rank(&phi, 1e-10));
    }

    #[test]
    fn far_entries_are_small() {
        let k = 400;
        let f = frame(k);
        let g = assemble_gram(&f).unwrap();
        let thr = crate::kernel::near_threshold(1, k);
        let mut far_sum: f64 = 0.0;
        for i in 0..f.n() {
            let s: f64 = (0..f.n())
                .filter(|&j| fs_distance(&f.points[i], &f.points[j]) >= thr)
                .map(|j| g.entries[(i, j)].norm())
                .sum();
            far_sum = far_sum.max(s);
        }
        assert!(far_sum < 1.0 / k as f64, "{far_sum}");
    }

    #[test]
    fn dump_round_trip() {
        let g = assemble_gram(&frame(60)).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("gram.bin");
        let header = DumpHeader {
            m: 1,
            k: 60,
            rows: g.n() as u64,
            cols: g.n() as u64,
            ordering: "lex".into(),
        };
        write_dump(&path, &header, &g.entries).unwrap();
        let (h, mat) = read_dump(&path).unwrap();
        assert_eq!(h, header);
        assert_eq!(mat, g.entries);
    }
}
