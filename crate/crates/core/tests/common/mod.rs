//! Shared systems and small linear-algebra oracles for the integration tests.
//! The oracles use only dense matrices and SVD, not the library's subspace
//! routines.

#![allow(dead_code)]

use std::sync::Arc;

use covpovm_core::fixtures;
use covpovm_core::kernel::default_aux_dim;
use covpovm_core::linalg::{identity, kron};
use covpovm_core::{kernel_from_isometries, random_isometries, CMatrix, CovariantKernel, GroupData, RepSystem, C64};

/// The four systems the acceptance criteria range over.
pub fn systems() -> Vec<(&'static str, Arc<RepSystem>)> {
    vec![
        ("z2-std", fixtures::fixture("z2-std").unwrap().system),
        ("z3-std", fixtures::fixture("z3-std").unwrap().system),
        ("z4-h2", fixtures::fixture("z4-h2").unwrap().system),
        ("s3", fixtures::s3_system()),
    ]
}

/// Auxiliary dimension cycling through three admissible values, so that both
/// low-rank and full-rank kernels are drawn.
pub fn aux_for(sys: &RepSystem, seed: u64) -> usize {
    default_aux_dim(sys) + (seed % 3) as usize
}

pub fn random_kernel(sys: &Arc<RepSystem>, seed: u64) -> CovariantKernel {
    kernel_from_isometries(&random_isometries(sys, aux_for(sys, seed), seed).unwrap())
}

/// Numerical rank from singular values above `rel * max(1, s_max)`.
pub fn rank(a: &CMatrix, rel: f64) -> usize {
    if a.is_empty() {
        return 0;
    }
    let s = a.clone().svd(false, false).singular_values;
    let smax = s.max();
    s.iter().filter(|&&x| x > rel * smax.max(1.0)).count()
}

/// `dim {X : X A_k = B_k X for all k}` for `X` of shape `rows(B) × rows(A)`.
pub fn intertwiner_dim(a: &[CMatrix], b: &[CMatrix]) -> usize {
    let (p, q) = (b[0].nrows(), a[0].nrows());
    let n = p * q;
    let mut stacked = CMatrix::zeros(a.len() * n, n);
    for (k, (ak, bk)) in a.iter().zip(b).enumerate() {
        // column-major vec: vec(XA) = (Aᵀ ⊗ I) vec X, vec(BX) = (I ⊗ B) vec X
        let m = kron(&ak.transpose(), &identity(p)) - kron(&identity(q), bk);
        stacked.view_mut((k * n, 0), (n, n)).copy_from(&m);
    }
    n - rank(&stacked, 1e-10)
}

/// Every homomorphism `H → U(1)`, by backtracking over `|H|`-th roots of
/// unity with all products among assigned elements checked.
pub fn brute_force_characters(group: &GroupData) -> Vec<Vec<C64>> {
    let hs = group.subgroup().to_vec();
    let n = hs.len();
    let roots: Vec<C64> = (0..n).map(|k| C64::from_polar(1.0, std::f64::consts::TAU * k as f64 / n as f64)).collect();
    let pos = |g: usize| hs.iter().position(|&h| h == g).unwrap();
    let mut out = Vec::new();
    let mut vals: Vec<Option<C64>> = vec![None; n];
    fn consistent(group: &GroupData, hs: &[usize], vals: &[Option<C64>], pos: &dyn Fn(usize) -> usize) -> bool {
        for (i, &a) in hs.iter().enumerate() {
            for (j, &b) in hs.iter().enumerate() {
                if let (Some(x), Some(y), Some(z)) = (vals[i], vals[j], vals[pos(group.mul(a, b))]) {
                    if (x * y - z).norm() > 1e-9 {
                        return false;
                    }
                }
            }
        }
        true
    }
    fn go(
        k: usize,
        group: &GroupData,
        hs: &[usize],
        roots: &[C64],
        vals: &mut Vec<Option<C64>>,
        pos: &dyn Fn(usize) -> usize,
        out: &mut Vec<Vec<C64>>,
    ) {
        if k == hs.len() {
            out.push(vals.iter().map(|v| v.unwrap()).collect());
            return;
        }
        for &r in roots {
            vals[k] = Some(r);
            if consistent(group, hs, vals, pos) {
                go(k + 1, group, hs, roots, vals, pos, out);
            }
        }
        vals[k] = None;
    }
    go(0, group, &hs, &roots, &mut vals, &pos, &mut out);
    out
}

/// `dim {v : ρ(h) v = λ(h) v}` from the null space of the stacked equations.
pub fn isotypic_rank(sys: &RepSystem, rho: usize, lambda: &[C64]) -> usize {
    let d = sys.irrep_dim(rho);
    let hs = sys.group().subgroup();
    let mut stacked = CMatrix::zeros(hs.len() * d, d);
    for (k, &h) in hs.iter().enumerate() {
        let m = sys.irrep(rho).matrix(h) - identity(d) * lambda[k];
        stacked.view_mut((k * d, 0), (d, d)).copy_from(&m);
    }
    d - rank(&stacked, 1e-10)
}

pub fn oracle_admissible(sys: &RepSystem) -> usize {
    if sys.support().iter().any(|&r| sys.multiplicity(r) > sys.irrep_dim(r)) {
        return 0;
    }
    brute_force_characters(sys.group())
        .iter()
        .filter(|lam| sys.support().iter().all(|&r| isotypic_rank(sys, r, lam) >= sys.multiplicity(r)))
        .count()
}
