//! Positive-type kernels `K(ρ, π)` coordinatizing the convex set of
//! covariant POVMs.
//!
//! A kernel is stored as one block operator on `H` whose `(ρ, π)` block is
//! `K(ρ, π)` restricted to `H_ρ ⊗ K_ρ ← H_π ⊗ K_π`; outside that block
//! `K(ρ, π)` vanishes.

use std::collections::BTreeMap;
use std::sync::Arc;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::linalg::{
    complex_gaussian, hermitian_eigen, identity, max_abs, max_abs_diff, orthonormalize_columns, spectral_norm, CMatrix,
    ZERO,
};
use crate::rep::{contract_pi, partial_trace_block, BlockOperator, RepSystem};
use crate::report::{Check, ValidationReport, Witness, Worst};
use crate::tol::Tolerances;

/// Isometries `V_π : K_π → H_π* ⊗ K` for every supported irrep.
///
/// `V_π` is a `(d_π · aux) × m_π` matrix; row `k * d_π + b` is the
/// coordinate along `e_b* ⊗ k_k`.
#[derive(Debug, Clone, PartialEq)]
pub struct IsometryFamily {
    system: Arc<RepSystem>,
    aux: usize,
    maps: BTreeMap<usize, CMatrix>,
}

impl IsometryFamily {
    pub fn new(system: Arc<RepSystem>, aux: usize, maps: BTreeMap<usize, CMatrix>, tol: &Tolerances) -> Result<Self> {
        for &pi in system.support() {
            let (d, m) = (system.irrep_dim(pi), system.multiplicity(pi));
            let label = system.label(pi).to_string();
            if aux * d < m {
                return Err(Error::AuxTooSmall { label, aux, dim: d, mult: m });
            }
            let v = maps.get(&pi).ok_or_else(|| Error::ShapeMismatch(format!("missing isometry for {label}")))?;
            if v.shape() != (d * aux, m) {
                return Err(Error::ShapeMismatch(format!(
                    "V for {label} is {:?}, expected {:?}",
                    v.shape(),
                    (d * aux, m)
                )));
            }
            let residual = max_abs_diff(&(v.adjoint() * v), &identity(m));
            if residual > tol.eq_threshold(1.0) {
                return Err(Error::IsometryViolation { label, residual });
            }
        }
        if let Some(&extra) = maps.keys().find(|&&i| i >= system.irreps().len() || !system.is_supported(i)) {
            return Err(Error::ShapeMismatch(format!("isometry given for unsupported irrep index {extra}")));
        }
        Ok(IsometryFamily { system, aux, maps })
    }

    pub fn system(&self) -> &Arc<RepSystem> {
        &self.system
    }

    pub fn aux_dim(&self) -> usize {
        self.aux
    }

    pub fn map(&self, pi: usize) -> &CMatrix {
        &self.maps[&pi]
    }

    /// Replaces every `V_π` by `(I ⊗ W) V_π` for an `aux × aux` unitary `W`.
    pub fn gauge(&self, w: &CMatrix) -> IsometryFamily {
        let maps = self
            .maps
            .iter()
            .map(|(&pi, v)| {
                let d = self.system.irrep_dim(pi);
                (pi, crate::linalg::kron(w, &identity(d)) * v)
            })
            .collect();
        IsometryFamily { system: self.system.clone(), aux: self.aux, maps }
    }

    /// `aux × (d m)` matrix whose column `c` is `ctr_π((I ⊗ V_π) u e_c)`.
    pub(crate) fn contracted(&self, pi: usize, u: &CMatrix) -> CMatrix {
        let d = self.system.irrep_dim(pi);
        let m = self.system.multiplicity(pi);
        let v = &self.maps[&pi];
        let aux = self.aux;
        let mut out = CMatrix::zeros(aux, d * m);
        let mut x = vec![ZERO; d * d * aux];
        for col in 0..d * m {
            let w = u.column(col);
            for a in 0..d {
                for b in 0..d {
                    for k in 0..aux {
                        x[(a * d + b) * aux + k] = (0..m).map(|n| w[n * d + a] * v[(k * d + b, n)]).sum();
                    }
                }
            }
            let y = contract_pi(&self.system, pi, &x, aux).expect("shape by construction");
            out.set_column(col, &y);
        }
        out
    }
}

/// Smallest auxiliary dimension admitting isometries: `max ⌈m_π / d_π⌉`.
pub fn default_aux_dim(system: &RepSystem) -> usize {
    system.support().iter().map(|&pi| system.multiplicity(pi).div_ceil(system.irrep_dim(pi))).max().unwrap_or(1).max(1)
}

/// Orthonormalized complex Gaussian isometries, deterministic in `seed`.
pub fn random_isometries(system: &Arc<RepSystem>, aux: usize, seed: u64) -> Result<IsometryFamily> {
    for &pi in system.support() {
        let (d, m) = (system.irrep_dim(pi), system.multiplicity(pi));
        if aux * d < m {
            return Err(Error::AuxTooSmall { label: system.label(pi).to_string(), aux, dim: d, mult: m });
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let maps = system
        .support()
        .iter()
        .map(|&pi| {
            let (d, m) = (system.irrep_dim(pi), system.multiplicity(pi));
            (pi, orthonormalize_columns(&complex_gaussian(&mut rng, d * aux, m)))
        })
        .collect();
    Ok(IsometryFamily { system: system.clone(), aux, maps })
}

/// An element of the convex set of covariant kernels.
#[derive(Debug, Clone, PartialEq)]
pub struct CovariantKernel {
    op: BlockOperator,
}

impl CovariantKernel {
    pub fn from_blocks(op: BlockOperator) -> Self {
        CovariantKernel { op }
    }

    /// Kernel whose blocks are cut out of the full Gram matrix `[K(ρ, π)]`.
    pub fn from_gram(system: Arc<RepSystem>, gram: &CMatrix) -> Result<Self> {
        Ok(CovariantKernel { op: BlockOperator::from_dense(system, gram)? })
    }

    pub fn system(&self) -> &Arc<RepSystem> {
        self.op.system()
    }

    pub fn blocks(&self) -> &BlockOperator {
        &self.op
    }

    pub fn block(&self, rho: usize, pi: usize) -> CMatrix {
        self.op.block_or_zero(rho, pi)
    }

    /// The block Gram matrix `[K(ρ, π)]` over the support, as a dense
    /// operator on `H`.
    pub fn gram(&self) -> CMatrix {
        self.op.to_dense()
    }

    /// Errors with [`Error::InvalidKernel`] naming the failed conditions.
    pub fn require_valid(&self, tol: &Tolerances) -> Result<()> {
        let report = validate_kernel(self, tol);
        if report.passed() {
            Ok(())
        } else {
            Err(Error::InvalidKernel(report.failures().join(", ")))
        }
    }
}

pub(crate) fn same_system(a: &Arc<RepSystem>, b: &Arc<RepSystem>) -> bool {
    Arc::ptr_eq(a, b) || **a == **b
}

/// Averages `sqrt(d_ρ d_π) <ctr_ρ(V U(h) w), ctr_π(V U(h) v)>` over `H`.
pub fn kernel_from_isometries(fam: &IsometryFamily) -> CovariantKernel {
    let system = fam.system();
    let group = system.group();
    let hs = group.subgroup();
    let support = system.support();
    let mut sums: BTreeMap<(usize, usize), CMatrix> = BTreeMap::new();
    for &h in hs {
        let maps: Vec<CMatrix> = support.iter().map(|&pi| fam.contracted(pi, &system.u_block(pi, h))).collect();
        for (a, &rho) in support.iter().enumerate() {
            for (b, &pi) in support.iter().enumerate() {
                let term = maps[a].adjoint() * &maps[b];
                sums.entry((rho, pi)).and_modify(|s| *s += &term).or_insert(term);
            }
        }
    }
    let mut op = BlockOperator::zeros(system.clone());
    for ((rho, pi), s) in sums {
        let scale = ((system.irrep_dim(rho) * system.irrep_dim(pi)) as f64).sqrt() / hs.len() as f64;
        op.set_block(rho, pi, s.scale(scale)).expect("shape by construction");
    }
    CovariantKernel { op }
}

/// Checks the kernel conditions and reports a residual for each.
///
/// `h_invariant`: `K(ρ,π) U(h) = U(h) K(ρ,π)` for `h ∈ H`;
/// `positive`: the block Gram matrix is PSD;
/// `trace_normalized`: `Tr_{H_ρ} K(ρ,ρ) = d_ρ I`;
/// `hermitian`: `K(ρ,π)† = K(π,ρ)`; `norm_bound`: `‖K(ρ,π)‖ ≤ d_ρ d_π`.
/// Boundedness and the block support condition hold by construction.
pub fn validate_kernel(k: &CovariantKernel, tol: &Tolerances) -> ValidationReport {
    let system = k.system();
    let group = system.group();
    let support = system.support();
    let gram = k.gram();
    let scale = max_abs(&gram);
    let mut report = ValidationReport::default();

    report.push(Check::structural("bounded"));

    let mut worst = Worst::new();
    for &h in group.subgroup() {
        for &rho in support {
            for &pi in support {
                let block = k.block(rho, pi);
                let lhs = &block * system.u_block(pi, h);
                let rhs = system.u_block(rho, h) * &block;
                worst.offer(max_abs_diff(&lhs, &rhs), || Witness::ElementBlocks {
                    h,
                    rho: system.label(rho).to_string(),
                    pi: system.label(pi).to_string(),
                });
            }
        }
    }
    let threshold = tol.eq_threshold(scale);
    report.push(Check::new("h_invariant", worst.residual <= threshold, worst.residual, worst.witness));

    let (vals, vecs) = hermitian_eigen(&gram);
    let lmin = vals.last().copied().unwrap_or(0.0);
    let lmax = vals.first().copied().unwrap_or(0.0);
    let witness = (lmin < 0.0).then(|| Witness::Eigenvector(vecs.column(vals.len() - 1).iter().copied().collect()));
    report.push(Check::new("positive", lmin >= tol.psd_floor(lmax), -lmin, witness));

    let mut worst = Worst::new();
    for &pi in support {
        let (d, m) = (system.irrep_dim(pi), system.multiplicity(pi));
        let pt = partial_trace_block(d, m, &k.block(pi, pi));
        let target = identity(m).scale(d as f64);
        worst.offer(max_abs_diff(&pt, &target), || Witness::Irrep { label: system.label(pi).to_string() });
    }
    report.push(Check::new("trace_normalized", worst.residual <= threshold, worst.residual, worst.witness));

    report.push(Check::structural("block_support"));

    let mut worst = Worst::new();
    let mut norm_worst = Worst::new();
    for &rho in support {
        for &pi in support {
            let block = k.block(rho, pi);
            let pair = || Witness::Blocks { rho: system.label(rho).to_string(), pi: system.label(pi).to_string() };
            worst.offer(max_abs_diff(&block.adjoint(), &k.block(pi, rho)), pair);
            let bound = (system.irrep_dim(rho) * system.irrep_dim(pi)) as f64;
            norm_worst.offer(spectral_norm(&block) - bound, pair);
        }
    }
    report.push(Check::new("hermitian", worst.residual <= threshold, worst.residual, worst.witness));
    report.push(Check::new("norm_bound", norm_worst.residual <= threshold, norm_worst.residual, norm_worst.witness));
    report
}

/// Blockwise `t K₁ + (1 − t) K₂`.
pub fn mix_kernels(k1: &CovariantKernel, k2: &CovariantKernel, t: f64) -> Result<CovariantKernel> {
    if !(0.0..=1.0).contains(&t) {
        return Err(Error::BadWeight(t));
    }
    if !same_system(k1.system(), k2.system()) {
        return Err(Error::SystemMismatch);
    }
    let system = k1.system().clone();
    let mut op = BlockOperator::zeros(system.clone());
    for &rho in system.support() {
        for &pi in system.support() {
            let (a, b) = (k1.op.block(rho, pi), k2.op.block(rho, pi));
            if a.is_none() && b.is_none() {
                continue;
            }
            let mixed = k1.block(rho, pi).scale(t) + k2.block(rho, pi).scale(1.0 - t);
            op.set_block(rho, pi, mixed)?;
        }
    }
    Ok(CovariantKernel { op })
}

/// The kernel whose diagonal blocks are `I` and off-diagonal blocks vanish;
/// it corresponds to the trivial POVM `E({ω}) = I / |Ω|`.
pub fn trivial_kernel(system: &Arc<RepSystem>) -> CovariantKernel {
    CovariantKernel { op: BlockOperator::from_dense(system.clone(), &identity(system.dim())).expect("square") }
}
