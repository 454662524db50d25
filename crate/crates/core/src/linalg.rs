//! Dense complex linear algebra helpers on top of nalgebra.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

pub type C64 = Complex64;
pub type CMatrix = DMatrix<C64>;
pub type CVector = DVector<C64>;

pub const ZERO: C64 = C64::new(0.0, 0.0);
pub const ONE: C64 = C64::new(1.0, 0.0);

pub fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

/// Largest absolute entry; 0 for an empty matrix.
pub fn max_abs(m: &CMatrix) -> f64 {
    m.iter().fold(0.0, |acc, z| acc.max(z.norm()))
}

pub fn max_abs_diff(a: &CMatrix, b: &CMatrix) -> f64 {
    assert_eq!(a.shape(), b.shape());
    a.iter().zip(b.iter()).fold(0.0, |acc, (x, y)| acc.max((x - y).norm()))
}

pub fn identity(n: usize) -> CMatrix {
    CMatrix::identity(n, n)
}

pub fn kron(a: &CMatrix, b: &CMatrix) -> CMatrix {
    a.kronecker(b)
}

/// Matrix unit `E_ij` of size `n`.
pub fn matrix_unit(n: usize, i: usize, j: usize) -> CMatrix {
    let mut m = CMatrix::zeros(n, n);
    m[(i, j)] = ONE;
    m
}

pub fn hermitian_part(m: &CMatrix) -> CMatrix {
    (m + m.adjoint()).scale(0.5)
}

/// Eigen-decomposition of the Hermitian part of `m`, eigenvalues sorted in
/// descending order (stable for ties), eigenvectors as matching columns.
pub fn hermitian_eigen(m: &CMatrix) -> (Vec<f64>, CMatrix) {
    let n = m.nrows();
    if n == 0 {
        return (Vec::new(), CMatrix::zeros(0, 0));
    }
    let eig = SymmetricEigen::new(hermitian_part(m));
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let mut vectors = CMatrix::zeros(n, n);
    for (dst, &src) in order.iter().enumerate() {
        vectors.set_column(dst, &eig.eigenvectors.column(src));
    }
    (values, vectors)
}

/// Smallest and largest eigenvalue of the Hermitian part of `m`.
pub fn eigen_range(m: &CMatrix) -> (f64, f64) {
    let (vals, _) = hermitian_eigen(m);
    match (vals.last(), vals.first()) {
        (Some(&lo), Some(&hi)) => (lo, hi),
        _ => (0.0, 0.0),
    }
}

/// Operator norm of a Hermitian matrix.
pub fn hermitian_norm(m: &CMatrix) -> f64 {
    let (lo, hi) = eigen_range(m);
    lo.abs().max(hi.abs())
}

/// Spectral norm of an arbitrary matrix.
pub fn spectral_norm(m: &CMatrix) -> f64 {
    if m.is_empty() {
        return 0.0;
    }
    m.clone().svd(false, false).singular_values.max()
}

/// Hilbert-Schmidt inner product `tr(a† b)`.
pub fn hs_inner(a: &CMatrix, b: &CMatrix) -> C64 {
    a.iter().zip(b.iter()).map(|(x, y)| x.conj() * y).sum()
}

pub fn vectorize(m: &CMatrix) -> CVector {
    CVector::from_column_slice(m.as_slice())
}

pub fn unvectorize(v: &CVector, rows: usize, cols: usize) -> CMatrix {
    CMatrix::from_column_slice(rows, cols, v.as_slice())
}

/// Orthonormal basis (as columns) of the span of `columns`, keeping singular
/// directions above `rel_tol` times the largest singular value.
pub fn orthonormal_span(columns: &[CVector], rel_tol: f64) -> Vec<CVector> {
    let Some(first) = columns.first() else {
        return Vec::new();
    };
    let n = first.len();
    if n == 0 {
        return Vec::new();
    }
    let mut a = CMatrix::zeros(n, columns.len());
    for (j, col) in columns.iter().enumerate() {
        a.set_column(j, col);
    }
    let svd = a.svd(true, false);
    let smax = svd.singular_values.max();
    if smax == 0.0 {
        return Vec::new();
    }
    let u = svd.u.expect("u requested");
    let mut idx: Vec<usize> =
        (0..svd.singular_values.len()).filter(|&i| svd.singular_values[i] > rel_tol * smax).collect();
    idx.sort_by(|&a, &b| svd.singular_values[b].total_cmp(&svd.singular_values[a]));
    idx.into_iter().map(|i| u.column(i).into_owned()).collect()
}

/// Numerical rank of the span of `columns`.
pub fn span_rank(columns: &[CVector], rel_tol: f64) -> usize {
    orthonormal_span(columns, rel_tol).len()
}

/// Residual of projecting `v` onto the span of the orthonormal `basis`.
pub fn projection_residual(basis: &[CVector], v: &CVector) -> f64 {
    let mut r = v.clone();
    for b in basis {
        let coef = b.dotc(v);
        r -= b * coef;
    }
    r.norm()
}

/// Deterministic orthonormal basis of the range of an orthogonal projector:
/// project the standard basis vectors in order and Gram-Schmidt them,
/// stopping once `dim` vectors are collected.
pub fn canonical_range(projector: &CMatrix, dim: usize) -> Vec<CVector> {
    let n = projector.nrows();
    let mut basis: Vec<CVector> = Vec::with_capacity(dim);
    for i in 0..n {
        if basis.len() == dim {
            break;
        }
        let mut v = projector.column(i).into_owned();
        for _ in 0..2 {
            for b in &basis {
                let coef = b.dotc(&v);
                v -= b * coef;
            }
        }
        let norm = v.norm();
        if norm > 1e-6 {
            basis.push(v.unscale(norm));
        }
    }
    basis
}

/// Orthonormal basis (columns of the returned list) of the null space of a
/// real matrix, with singular values below `rel_tol * max(1, s_max)`
/// treated as zero.
pub fn real_null_space(a: &DMatrix<f64>, rel_tol: f64) -> Vec<DVector<f64>> {
    let n = a.ncols();
    if n == 0 {
        return Vec::new();
    }
    if a.nrows() == 0 {
        return (0..n).map(|i| DVector::from_fn(n, |k, _| if k == i { 1.0 } else { 0.0 })).collect();
    }
    let rows = a.nrows().max(n);
    let mut padded = DMatrix::<f64>::zeros(rows, n);
    padded.view_mut((0, 0), (a.nrows(), n)).copy_from(a);
    let svd = padded.svd(false, true);
    let v_t = svd.v_t.expect("v_t requested");
    let smax = svd.singular_values.max();
    let cut = rel_tol * smax.max(1.0);
    (0..svd.singular_values.len()).filter(|&i| svd.singular_values[i] <= cut).map(|i| v_t.row(i).transpose()).collect()
}

/// Matrix of standard complex Gaussian entries (`E|z|^2 = 1`).
pub fn complex_gaussian<R: Rng + ?Sized>(rng: &mut R, rows: usize, cols: usize) -> CMatrix {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    CMatrix::from_fn(rows, cols, |_, _| {
        let re: f64 = rng.sample(StandardNormal);
        let im: f64 = rng.sample(StandardNormal);
        c(re * s, im * s)
    })
}

/// Orthonormalize the columns of a full-column-rank matrix (QR with the
/// diagonal of R made real positive, so the result is unique).
pub fn orthonormalize_columns(m: &CMatrix) -> CMatrix {
    let cols = m.ncols();
    if cols == 0 {
        return m.clone();
    }
    let qr = m.clone().qr();
    let mut q = qr.q();
    let r = qr.r();
    for j in 0..cols {
        let d = r[(j, j)];
        if d.norm() > 0.0 {
            let phase = d / d.norm();
            let mut col = q.column_mut(j);
            col *= phase;
        }
    }
    q
}

/// Haar-random unitary of size `n`.
pub fn random_unitary<R: Rng + ?Sized>(rng: &mut R, n: usize) -> CMatrix {
    orthonormalize_columns(&complex_gaussian(rng, n, n))
}

/// Hermitian square root of a PSD matrix (negative eigenvalues clipped).
pub fn psd_sqrt(m: &CMatrix) -> CMatrix {
    psd_power(m, 0.5)
}

/// `m^p` on the support of a PSD matrix; eigenvalues `<= 0` map to 0.
pub fn psd_power(m: &CMatrix, p: f64) -> CMatrix {
    let (vals, vecs) = hermitian_eigen(m);
    let d = CMatrix::from_diagonal(&CVector::from_iterator(
        vals.len(),
        vals.iter().map(|&l| if l > 0.0 { c(l.powf(p), 0.0) } else { ZERO }),
    ));
    &vecs * d * vecs.adjoint()
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn eigen_sorted_descending() {
        let m = CMatrix::from_row_slice(2, 2, &[c(1.0, 0.0), c(0.0, 1.0), c(0.0, -1.0), c(1.0, 0.0)]);
        let (vals, vecs) = hermitian_eigen(&m);
        assert!((vals[0] - 2.0).abs() < 1e-12);
        assert!(vals[1].abs() < 1e-12);
        let recon = &vecs * CMatrix::from_diagonal(&CVector::from_vec(vec![c(2.0, 0.0), ZERO])) * vecs.adjoint();
        assert!(max_abs_diff(&recon, &m) < 1e-12);
    }

    #[test]
    fn null_space_of_wide_matrix() {
        let a = DMatrix::from_row_slice(1, 3, &[1.0, 1.0, 0.0]);
        let ns = real_null_space(&a, 1e-10);
        assert_eq!(ns.len(), 2);
        for v in ns {
            assert!((a.clone() * v).norm() < 1e-12);
        }
    }

    #[test]
    fn orthonormalize_gives_isometry() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let m = complex_gaussian(&mut rng, 5, 3);
        let q = orthonormalize_columns(&m);
        assert_eq!(q.shape(), (5, 3));
        assert!(max_abs_diff(&(q.adjoint() * &q), &identity(3)) < 1e-12);
        let u = random_unitary(&mut rng, 4);
        assert!(max_abs_diff(&(u.adjoint() * &u), &identity(4)) < 1e-12);
    }

    #[test]
    fn canonical_range_of_rank_one_projector() {
        let v = CVector::from_vec(vec![c(1.0, 0.0), c(1.0, 0.0)]).unscale(2f64.sqrt());
        let p = &v * v.adjoint();
        let basis = canonical_range(&p, 1);
        assert_eq!(basis.len(), 1);
        assert!((basis[0].clone() - v).norm() < 1e-12);
    }

    #[test]
    fn span_rank_detects_dependence() {
        let a = CVector::from_vec(vec![ONE, ZERO]);
        let b = CVector::from_vec(vec![c(2.0, 0.0), ZERO]);
        assert_eq!(span_rank(&[a.clone(), b], 1e-10), 1);
        let e = CVector::from_vec(vec![ZERO, ONE]);
        assert_eq!(span_rank(&[a, e], 1e-10), 2);
    }
}
