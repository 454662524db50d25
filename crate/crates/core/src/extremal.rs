//! Extremality of covariant kernels via their reproducing kernel Hilbert
//! space `H_K ≅ ℂʳ`.
//!
//! A kernel is factored as `K(ρ, π) = γ_ρ† γ_π` with `Γ = [γ_π]` of full row
//! rank `r`. The subgroup representation lifts to `Ũ(h) = Γ U(h) Γ⁺` on
//! `ℂʳ`, and `K` is extremal exactly when no nonzero Hermitian `B` commutes
//! with `Ũ` while being trace-orthogonal to every `γ_π (T ⊗ I) γ_π†`.

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::kernel::CovariantKernel;
use crate::linalg::{
    c, canonical_range, eigen_range, hermitian_eigen, hermitian_norm, hermitian_part, hs_inner, identity, kron,
    matrix_unit, max_abs, max_abs_diff, orthonormal_span, projection_residual, real_null_space, unvectorize, vectorize,
    CMatrix, CVector, C64,
};
use crate::tol::Tolerances;

/// Eigenvalues closer than this (relative to `λ_max`) share an eigenspace.
const CLUSTER_GAP: f64 = 1e-10;

/// `Γ` and the lifted representation `Ũ` of a kernel.
#[derive(Debug, Clone)]
pub struct RkhsFactorization {
    kernel: CovariantKernel,
    gamma: CMatrix,
    /// Aligned with `group.subgroup()`.
    u_tilde: Vec<CMatrix>,
}

impl RkhsFactorization {
    pub fn kernel(&self) -> &CovariantKernel {
        &self.kernel
    }

    pub fn rank(&self) -> usize {
        self.gamma.nrows()
    }

    /// The stacked `r × dim H` matrix `Γ`.
    pub fn gamma(&self) -> &CMatrix {
        &self.gamma
    }

    /// `γ_π`, the columns of `Γ` on the `π` block.
    pub fn gamma_pi(&self, pi: usize) -> CMatrix {
        let range = self.kernel.system().block_range(pi);
        self.gamma.columns(range.start, range.len()).into_owned()
    }

    /// `Ũ(h)`; panics if `h ∉ H`.
    pub fn u_tilde(&self, h: usize) -> &CMatrix {
        let pos = self.kernel.system().group().subgroup().binary_search(&h).expect("element not in subgroup");
        &self.u_tilde[pos]
    }

    pub fn u_tilde_all(&self) -> &[CMatrix] {
        &self.u_tilde
    }

    /// Builds the factorization from a supplied `Γ` (e.g. a gauge-rotated
    /// one), checking `Γ†Γ = K`, full row rank, and that the lift is a
    /// unitary representation intertwined by `Γ`.
    pub fn from_gamma(kernel: &CovariantKernel, gamma: CMatrix, tol: &Tolerances) -> Result<Self> {
        let system = kernel.system();
        let group = system.group();
        let gram = kernel.gram();
        let scale = max_abs(&gram);
        if gamma.ncols() != system.dim() {
            return Err(Error::ShapeMismatch(format!("Γ has {} columns, expected {}", gamma.ncols(), system.dim())));
        }
        let fact = max_abs_diff(&(gamma.adjoint() * &gamma), &gram);
        if fact > tol.lift * (1.0 + scale) {
            return Err(Error::InvalidKernel(format!("Γ†Γ differs from K by {fact:e}")));
        }
        let r = gamma.nrows();
        let ggt = &gamma * gamma.adjoint();
        let (lo, hi) = eigen_range(&ggt);
        let inv = ggt
            .try_inverse()
            .filter(|_| r == 0 || lo > tol.rank * hi)
            .ok_or_else(|| Error::InvalidKernel("Γ does not have full row rank".into()))?;
        let pinv = gamma.adjoint() * inv;

        let mut u_tilde = Vec::with_capacity(group.subgroup().len());
        let mut worst: f64 = 0.0;
        let gscale = 1.0 + max_abs(&gamma);
        for &h in group.subgroup() {
            let gu = &gamma * system.u_matrix(h);
            let ut = &gu * &pinv;
            worst = worst.max(max_abs_diff(&(&ut * ut.adjoint()), &identity(r)));
            worst = worst.max(max_abs_diff(&gu, &(&ut * &gamma)) / gscale);
            u_tilde.push(ut);
        }
        let pos = |h: usize| group.subgroup().binary_search(&h).expect("closed subgroup");
        for (i, &a) in group.subgroup().iter().enumerate() {
            for (j, &b) in group.subgroup().iter().enumerate() {
                let prod = &u_tilde[i] * &u_tilde[j];
                worst = worst.max(max_abs_diff(&prod, &u_tilde[pos(group.mul(a, b))]));
            }
        }
        if worst > tol.lift {
            return Err(Error::NonUnitaryLift(worst));
        }
        Ok(RkhsFactorization { kernel: kernel.clone(), gamma, u_tilde })
    }
}

/// Deterministic eigenbasis: degenerate clusters are replaced by the
/// projected standard basis, each vector's largest entry is made real
/// positive.
fn canonical_eigen(m: &CMatrix) -> (Vec<f64>, CMatrix) {
    let (vals, mut vecs) = hermitian_eigen(m);
    let n = vals.len();
    let lmax = vals.iter().fold(0.0_f64, |a, v| a.max(v.abs()));
    let mut start = 0;
    while start < n {
        let mut end = start + 1;
        while end < n && vals[end - 1] - vals[end] <= CLUSTER_GAP * lmax.max(1.0) {
            end += 1;
        }
        if end - start > 1 {
            let block = vecs.columns(start, end - start).into_owned();
            let proj = &block * block.adjoint();
            let basis = canonical_range(&proj, end - start);
            if basis.len() == end - start {
                for (k, v) in basis.iter().enumerate() {
                    vecs.set_column(start + k, v);
                }
            }
        }
        start = end;
    }
    for k in 0..n {
        let col = vecs.column(k).into_owned();
        let top = col.iter().fold(0.0_f64, |a, z| a.max(z.norm()));
        if let Some(z) = col.iter().find(|z| z.norm() >= top * (1.0 - 1e-9)) {
            let phase = z.conj() / z.norm();
            vecs.set_column(k, &(col * phase));
        }
    }
    (vals, vecs)
}

/// Factors a valid kernel, keeping eigenvalues above `tol.rank · λ_max`.
pub fn factorize_kernel(kernel: &CovariantKernel, tol: &Tolerances) -> Result<RkhsFactorization> {
    kernel.require_valid(tol)?;
    let gram = kernel.gram();
    let (vals, vecs) = canonical_eigen(&gram);
    let lmax = vals.first().copied().unwrap_or(0.0);
    let r = vals.iter().take_while(|&&v| v > tol.rank * lmax && v > 0.0).count();
    let n = gram.nrows();
    let mut gamma = CMatrix::zeros(r, n);
    for (k, v) in vals.iter().take(r).enumerate() {
        let row = vecs.column(k).adjoint().scale(v.sqrt());
        gamma.set_row(k, &row);
    }
    RkhsFactorization::from_gamma(kernel, gamma, tol)
}

/// `𝒫(T) = (1/|H|) Σ_h Ũ(h) T Ũ(h)†`.
pub fn averaging_projector(f: &RkhsFactorization, t: &CMatrix) -> CMatrix {
    let r = f.rank();
    let n = f.u_tilde.len() as f64;
    f.u_tilde.iter().fold(CMatrix::zeros(r, r), |acc, u| acc + u * t * u.adjoint()).unscale(n)
}

fn orthonormal_matrices(spanning: &[CMatrix], r: usize, rel_tol: f64) -> Vec<CMatrix> {
    let cols: Vec<CVector> = spanning.iter().map(vectorize).collect();
    orthonormal_span(&cols, rel_tol).iter().map(|v| unvectorize(v, r, r)).collect()
}

/// HS-orthonormal basis of the commutant of `Ũ`.
pub fn basis_t_utilde(f: &RkhsFactorization, tol: &Tolerances) -> Vec<CMatrix> {
    let r = f.rank();
    let images: Vec<CMatrix> = (0..r)
        .flat_map(|i| (0..r).map(move |j| (i, j)))
        .map(|(i, j)| averaging_projector(f, &matrix_unit(r, i, j)))
        .collect();
    orthonormal_matrices(&images, r, tol.rank)
}

/// HS-orthonormal basis of `span{γ_π (E_ij ⊗ I_{d_π}) γ_π†}`.
pub fn basis_t_tilde_u(f: &RkhsFactorization, tol: &Tolerances) -> Vec<CMatrix> {
    let system = f.kernel.system();
    let r = f.rank();
    let mut spanning = Vec::new();
    for &pi in system.support() {
        let (d, m) = (system.irrep_dim(pi), system.multiplicity(pi));
        let g = f.gamma_pi(pi);
        for i in 0..m {
            for j in 0..m {
                spanning.push(&g * kron(&matrix_unit(m, i, j), &identity(d)) * g.adjoint());
            }
        }
    }
    orthonormal_matrices(&spanning, r, tol.rank)
}

/// Largest residual of projecting the `𝒯̃_U` basis onto the commutant.
pub fn inclusion_residual(f: &RkhsFactorization, tol: &Tolerances) -> f64 {
    let comm: Vec<CVector> = basis_t_utilde(f, tol).iter().map(vectorize).collect();
    basis_t_tilde_u(f, tol).iter().map(|t| projection_residual(&comm, &vectorize(t))).fold(0.0, f64::max)
}

/// HS-orthonormal Hermitian basis of `r × r` matrices: `E_ii`, then
/// `(E_ij + E_ji)/√2` and `i(E_ij − E_ji)/√2` for `i < j`.
fn hermitian_basis(r: usize) -> Vec<CMatrix> {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let mut out: Vec<CMatrix> = (0..r).map(|i| matrix_unit(r, i, i)).collect();
    let pairs: Vec<(usize, usize)> = (0..r).flat_map(|i| (i + 1..r).map(move |j| (i, j))).collect();
    for &(i, j) in &pairs {
        out.push((matrix_unit(r, i, j) + matrix_unit(r, j, i)).scale(s));
    }
    for &(i, j) in &pairs {
        out.push((matrix_unit(r, i, j) - matrix_unit(r, j, i)) * c(0.0, s));
    }
    out
}

/// Hermitian perturbation directions `B` certifying non-extremality.
#[derive(Debug, Clone)]
pub struct PerturbationSpace {
    pub rank: usize,
    /// HS-orthonormal Hermitian `r × r` matrices.
    pub basis: Vec<CMatrix>,
}

impl PerturbationSpace {
    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn is_empty(&self) -> bool {
        self.basis.is_empty()
    }
}

/// Real null space of the commutation and trace constraints over the
/// Hermitian matrices, in a canonical basis.
pub fn perturbation_space(f: &RkhsFactorization, tol: &Tolerances) -> PerturbationSpace {
    let r = f.rank();
    let herm = hermitian_basis(r);
    let t_tilde = basis_t_tilde_u(f, tol);
    let mut rows: Vec<Vec<f64>> = Vec::new();
    let mut push_complex = |vals: Vec<C64>| {
        rows.push(vals.iter().map(|z| z.re).collect());
        rows.push(vals.iter().map(|z| z.im).collect());
    };
    for u in &f.u_tilde {
        let comms: Vec<CMatrix> = herm.iter().map(|hk| hk * u - u * hk).collect();
        for e in 0..r * r {
            push_complex(comms.iter().map(|m| m.as_slice()[e]).collect());
        }
    }
    for t in &t_tilde {
        // tr(H_k T) = <H_k, T> since H_k is Hermitian
        push_complex(herm.iter().map(|hk| hs_inner(hk, t)).collect());
    }
    let dim = herm.len();
    let a = DMatrix::from_fn(rows.len(), dim, |i, k| rows[i][k]);
    let null = real_null_space(&a, tol.rank);
    if null.is_empty() {
        return PerturbationSpace { rank: r, basis: Vec::new() };
    }
    let mut proj = CMatrix::zeros(dim, dim);
    for v in &null {
        let vc = v.map(|x| c(x, 0.0));
        proj += &vc * vc.transpose();
    }
    let coords = canonical_range(&proj, null.len());
    let basis = coords
        .iter()
        .map(|x| {
            let b = herm.iter().zip(x.iter()).fold(CMatrix::zeros(r, r), |acc, (hk, xk)| acc + hk.scale(xk.re));
            hermitian_part(&b)
        })
        .collect();
    PerturbationSpace { rank: r, basis }
}

/// Outcome of the extremality test with the data behind it.
#[derive(Debug, Clone)]
pub struct Verdict {
    pub extremal: bool,
    pub rank: usize,
    pub dim_t_tilde_u: usize,
    pub dim_commutant: usize,
    pub perturbation_dim: usize,
    /// First perturbation direction when not extremal.
    pub witness: Option<CMatrix>,
}

/// Decides extremality by both the perturbation space and the dimension
/// comparison, failing if they disagree.
pub fn is_extremal(kernel: &CovariantKernel, tol: &Tolerances) -> Result<Verdict> {
    let f = factorize_kernel(kernel, tol)?;
    verdict_for(&f, tol)
}

/// [`is_extremal`] on an existing factorization.
pub fn verdict_for(f: &RkhsFactorization, tol: &Tolerances) -> Result<Verdict> {
    let dim_t_tilde_u = basis_t_tilde_u(f, tol).len();
    let dim_commutant = basis_t_utilde(f, tol).len();
    let space = perturbation_space(f, tol);
    let by_space = space.is_empty();
    let by_dim = dim_t_tilde_u == dim_commutant;
    if dim_t_tilde_u > dim_commutant || by_space != by_dim {
        return Err(Error::InternalInconsistency(format!(
            "dim 𝒯̃_U = {dim_t_tilde_u}, dim commutant = {dim_commutant}, perturbation dim = {}",
            space.dim()
        )));
    }
    Ok(Verdict {
        extremal: by_space,
        rank: f.rank(),
        dim_t_tilde_u,
        dim_commutant,
        perturbation_dim: space.dim(),
        witness: space.basis.into_iter().next(),
    })
}

/// The split `K = ½(K₊ + K₋)`.
#[derive(Debug, Clone)]
pub struct Decomposition {
    pub plus: CovariantKernel,
    pub minus: CovariantKernel,
}

/// `K_± = Γ† (I ± B/‖B‖) Γ` for a perturbation `B` of `K`.
pub fn decompose_along(kernel: &CovariantKernel, b: &CMatrix, tol: &Tolerances) -> Result<Decomposition> {
    let f = factorize_kernel(kernel, tol)?;
    decompose_with(&f, b, tol)
}

/// [`decompose_along`] on an existing factorization.
pub fn decompose_with(f: &RkhsFactorization, b: &CMatrix, tol: &Tolerances) -> Result<Decomposition> {
    let r = f.rank();
    if b.shape() != (r, r) {
        return Err(Error::NotInPerturbationSpace(format!("B is {:?}, expected {r}x{r}", b.shape())));
    }
    let scale = max_abs(b);
    if scale == 0.0 {
        return Err(Error::ZeroPerturbation);
    }
    let thr = tol.rank * scale;
    let herm = max_abs_diff(b, &b.adjoint());
    if herm > thr {
        return Err(Error::NotInPerturbationSpace(format!("B is not Hermitian (residual {herm:e})")));
    }
    for (u, &h) in f.u_tilde.iter().zip(f.kernel.system().group().subgroup()) {
        let res = max_abs_diff(&(b * u), &(u * b));
        if res > thr {
            return Err(Error::NotInPerturbationSpace(format!("B does not commute with Ũ({h}) (residual {res:e})")));
        }
    }
    for t in basis_t_tilde_u(f, tol) {
        let tr = hs_inner(&t, b).norm();
        if tr > thr {
            return Err(Error::NotInPerturbationSpace(format!("tr(BT) = {tr:e} for some T in 𝒯̃_U")));
        }
    }
    let bh = hermitian_part(b);
    let norm = hermitian_norm(&bh);
    if norm == 0.0 {
        return Err(Error::ZeroPerturbation);
    }
    let step = bh.unscale(norm);
    let id = identity(r);
    let system = f.kernel.system().clone();
    let side = |sign: f64| {
        let mid = &id + step.scale(sign);
        CovariantKernel::from_gram(system.clone(), &hermitian_part(&(f.gamma.adjoint() * mid * &f.gamma)))
    };
    Ok(Decomposition { plus: side(1.0)?, minus: side(-1.0)? })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use crate::kernel::{kernel_from_isometries, mix_kernels, random_isometries, validate_kernel};
    use crate::linalg::{random_unitary, ONE, ZERO};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn tol() -> Tolerances {
        Tolerances::default()
    }

    #[test]
    fn z2_factorizations() {
        let f = factorize_kernel(&fixtures::z2_kernel(ONE), &tol()).unwrap();
        assert_eq!(f.rank(), 1);
        assert!((f.gamma_pi(0)[(0, 0)] - ONE).norm() < 1e-12);
        assert!((f.gamma_pi(1)[(0, 0)] - ONE).norm() < 1e-12);
        assert!(max_abs_diff(f.u_tilde(0), &identity(1)) < 1e-12);

        let f = factorize_kernel(&fixtures::z2_kernel(ZERO), &tol()).unwrap();
        assert_eq!(f.rank(), 2);
        assert!(max_abs_diff(f.gamma(), &identity(2)) < 1e-15);
    }

    #[test]
    fn z3_rank2() {
        let k = fixtures::z3_rank2_kernel();
        let f = factorize_kernel(&k, &tol()).unwrap();
        assert_eq!(f.rank(), 2);
        assert_eq!(basis_t_tilde_u(&f, &tol()).len(), 3);
        assert_eq!(basis_t_utilde(&f, &tol()).len(), 4);
        let space = perturbation_space(&f, &tol());
        assert_eq!(space.dim(), 1);
        // Γ†BΓ is gauge invariant; in the η gauge B ∝ [[0, i], [−i, 0]]
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let i = c(0.0, 1.0);
        let expected = CMatrix::from_row_slice(3, 3, &[ZERO, i, i * s, -i, ZERO, -i * s, -i * s, i * s, ZERO]);
        let got = f.gamma.adjoint() * &space.basis[0] * &f.gamma;
        let ratio = hs_inner(&expected, &got) / hs_inner(&expected, &expected);
        assert!(ratio.im.abs() < 1e-10 && ratio.re.abs() > 1e-3);
        assert!(max_abs_diff(&got, &expected.scale(ratio.re)) < 1e-10);

        let v = is_extremal(&k, &tol()).unwrap();
        assert!(!v.extremal);
        let d = decompose_along(&k, v.witness.as_ref().unwrap(), &tol()).unwrap();
        assert!(validate_kernel(&d.plus, &tol()).passed());
        assert!(validate_kernel(&d.minus, &tol()).passed());
        let mid = mix_kernels(&d.plus, &d.minus, 0.5).unwrap();
        assert!(max_abs_diff(&mid.gram(), &k.gram()) < 1e-12);
        assert!(max_abs_diff(&d.plus.gram(), &d.minus.gram()) > 1e-6);
    }

    #[test]
    fn z2_verdicts_and_split() {
        let v = is_extremal(&fixtures::z2_kernel(ONE), &tol()).unwrap();
        assert!(v.extremal && v.rank == 1 && v.dim_t_tilde_u == 1 && v.dim_commutant == 1);
        let v = is_extremal(&fixtures::z2_kernel(C64::from_polar(1.0, 0.7)), &tol()).unwrap();
        assert!(v.extremal);

        let k0 = fixtures::z2_kernel(ZERO);
        let v = is_extremal(&k0, &tol()).unwrap();
        assert!(!v.extremal);
        assert_eq!((v.rank, v.dim_t_tilde_u, v.dim_commutant, v.perturbation_dim), (2, 2, 4, 2));
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let w = v.witness.unwrap();
        assert!(max_abs_diff(&w, &CMatrix::from_row_slice(2, 2, &[ZERO, c(s, 0.0), c(s, 0.0), ZERO])) < 1e-12);

        let b = CMatrix::from_row_slice(2, 2, &[ZERO, ONE, ONE, ZERO]);
        let d = decompose_along(&k0, &b, &tol()).unwrap();
        assert!(max_abs_diff(&d.plus.gram(), &fixtures::z2_kernel(ONE).gram()) < 1e-15);
        assert!(max_abs_diff(&d.minus.gram(), &fixtures::z2_kernel(-ONE).gram()) < 1e-15);
    }

    #[test]
    fn decompose_errors() {
        let k0 = fixtures::z2_kernel(ZERO);
        assert!(matches!(decompose_along(&k0, &CMatrix::zeros(2, 2), &tol()), Err(Error::ZeroPerturbation)));
        let diag = CMatrix::from_row_slice(2, 2, &[ONE, ZERO, ZERO, -ONE]);
        assert!(matches!(decompose_along(&k0, &diag, &tol()), Err(Error::NotInPerturbationSpace(_))));
        let skew = CMatrix::from_row_slice(2, 2, &[ZERO, ONE, -ONE, ZERO]);
        assert!(matches!(decompose_along(&k0, &skew, &tol()), Err(Error::NotInPerturbationSpace(_))));
        assert!(matches!(decompose_along(&k0, &identity(3), &tol()), Err(Error::NotInPerturbationSpace(_))));
        let bad = fixtures::z2_kernel(c(2.0, 0.0));
        assert!(matches!(is_extremal(&bad, &tol()), Err(Error::InvalidKernel(_))));
    }

    #[test]
    fn commutant_with_two_characters() {
        // Z₄ with H = {0, 2}; χ₀ and χ₁ restrict to distinct characters of H
        let sys = fixtures::z4_system(&[0, 2], &[1, 1, 0, 0]);
        let k = crate::kernel::trivial_kernel(&sys);
        let f = factorize_kernel(&k, &tol()).unwrap();
        assert_eq!(f.rank(), 2);
        let comm = basis_t_utilde(&f, &tol());
        assert_eq!(comm.len(), 2);
        for m in comm {
            assert!(m[(0, 1)].norm() < 1e-12 && m[(1, 0)].norm() < 1e-12);
        }
        assert!(is_extremal(&k, &tol()).unwrap().extremal);
    }

    #[test]
    fn s3_pipeline_invariants() {
        let sys = fixtures::s3_system();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for seed in 0..6 {
            let k = kernel_from_isometries(&random_isometries(&sys, 1 + seed as usize % 3, seed).unwrap());
            let f = factorize_kernel(&k, &tol()).unwrap();
            assert!(inclusion_residual(&f, &tol()) < 1e-9);
            let t = crate::linalg::complex_gaussian(&mut rng, f.rank(), f.rank());
            let p = averaging_projector(&f, &t);
            assert!(max_abs_diff(&averaging_projector(&f, &p), &p) < 1e-10);
            let v = verdict_for(&f, &tol()).unwrap();
            let w = random_unitary(&mut rng, f.rank());
            let g = RkhsFactorization::from_gamma(&k, &w * f.gamma(), &tol()).unwrap();
            let v2 = verdict_for(&g, &tol()).unwrap();
            assert_eq!(
                (v.extremal, v.dim_t_tilde_u, v.dim_commutant),
                (v2.extremal, v2.dim_t_tilde_u, v2.dim_commutant)
            );
            for b in perturbation_space(&f, &tol()).basis {
                for u in f.u_tilde_all() {
                    assert!(max_abs_diff(&(&b * u), &(u * &b)) < 1e-9);
                }
            }
        }
    }
}
