//! Covariant POVMs on the finite outcome space `Ω = G/H`, stored by atoms.

use std::sync::Arc;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::kernel::{CovariantKernel, IsometryFamily};
use crate::linalg::{complex_gaussian, eigen_range, identity, kron, max_abs, max_abs_diff, psd_power, CMatrix};
use crate::rep::{partial_trace_block, BlockOperator, RepSystem};
use crate::report::{Check, ValidationReport, Witness, Worst};
use crate::tol::Tolerances;

/// Effects `E({ω})` for every `ω ∈ Ω`, as dense `dim H × dim H` matrices.
#[derive(Debug, Clone, PartialEq)]
pub struct CovariantPovm {
    system: Arc<RepSystem>,
    effects: Vec<CMatrix>,
}

impl CovariantPovm {
    /// Wraps effects without validating them; see [`validate_povm`].
    pub fn new(system: Arc<RepSystem>, effects: Vec<CMatrix>) -> Result<Self> {
        let n = system.dim();
        if effects.len() != system.group().num_cosets() {
            return Err(Error::ShapeMismatch(format!(
                "{} effects for {} outcomes",
                effects.len(),
                system.group().num_cosets()
            )));
        }
        if let Some(i) = effects.iter().position(|e| e.shape() != (n, n)) {
            return Err(Error::ShapeMismatch(format!("effect {i} is not {n}x{n}")));
        }
        Ok(CovariantPovm { system, effects })
    }

    pub fn system(&self) -> &Arc<RepSystem> {
        &self.system
    }

    pub fn effects(&self) -> &[CMatrix] {
        &self.effects
    }

    pub fn effect(&self, omega: usize) -> &CMatrix {
        &self.effects[omega]
    }

    /// `E(X) = Σ_{ω ∈ X} E({ω})`.
    pub fn effect_of_set(&self, outcomes: &[usize]) -> CMatrix {
        let n = self.system.dim();
        outcomes.iter().fold(CMatrix::zeros(n, n), |acc, &w| acc + &self.effects[w])
    }

    pub fn require_valid(&self, tol: &Tolerances) -> Result<()> {
        let report = validate_povm(self, tol);
        if report.passed() {
            Ok(())
        } else {
            Err(Error::InvalidPovm(report.failures().join(", ")))
        }
    }
}

/// Effects `E({ω}) = U(g) K U(g)† / |Ω|` using `reps[ω]` as the element
/// `g` of coset `ω`.
pub fn effects_from_kernel(k: &CovariantKernel, reps: &[usize]) -> Result<Vec<CMatrix>> {
    let system = k.system();
    let group = system.group();
    if reps.len() != group.num_cosets() {
        return Err(Error::ShapeMismatch(format!("{} representatives for {} cosets", reps.len(), group.num_cosets())));
    }
    if let Some(w) = (0..reps.len()).find(|&w| reps[w] >= group.order() || group.coset_of(reps[w]) != w) {
        return Err(Error::ShapeMismatch(format!("element {} does not lie in coset {w}", reps[w])));
    }
    let gram = k.gram();
    let scale = 1.0 / group.num_cosets() as f64;
    Ok(reps
        .iter()
        .map(|&g| {
            let u = system.u_matrix(g);
            (&u * &gram * u.adjoint()).scale(scale)
        })
        .collect())
}

/// The covariant POVM corresponding to a valid kernel.
pub fn povm_from_kernel(k: &CovariantKernel, tol: &Tolerances) -> Result<CovariantPovm> {
    k.require_valid(tol)?;
    let reps = k.system().group().coset_reps();
    let effects = effects_from_kernel(k, &reps)?;
    Ok(CovariantPovm { system: k.system().clone(), effects })
}

/// Inverse of [`povm_from_kernel`]: `K = |Ω| E({q(e)})` cut into blocks.
pub fn kernel_from_povm(p: &CovariantPovm, tol: &Tolerances) -> Result<CovariantKernel> {
    p.require_valid(tol)?;
    let group = p.system.group();
    let origin = group.coset_of(group.identity());
    let gram = p.effects[origin].scale(group.num_cosets() as f64);
    CovariantKernel::from_gram(p.system.clone(), &gram)
}

/// Direct evaluation of the isometry formula: the `(ρ, π)` block of
/// `E({ω})` is `sqrt(d_ρ d_π)/|G| Σ_{g ∈ q⁻¹(ω)} D_ρ(g)† D_π(g)` with
/// `D_π(g) = ctr_π((π(g)⁻¹ ⊗ V_π) ·)`.
pub fn povm_from_isometries(fam: &IsometryFamily) -> CovariantPovm {
    let system = fam.system().clone();
    let group = system.group();
    let support = system.support();
    let n = system.dim();
    let inv_order = 1.0 / group.order() as f64;
    let effects = group
        .cosets()
        .iter()
        .map(|coset| {
            let mut e = CMatrix::zeros(n, n);
            for &g in coset {
                let maps: Vec<CMatrix> =
                    support.iter().map(|&pi| fam.contracted(pi, &system.u_block(pi, g).adjoint())).collect();
                for (a, &rho) in support.iter().enumerate() {
                    for (b, &pi) in support.iter().enumerate() {
                        let (rr, rp) = (system.block_range(rho), system.block_range(pi));
                        let w = ((system.irrep_dim(rho) * system.irrep_dim(pi)) as f64).sqrt() * inv_order;
                        let term = (maps[a].adjoint() * &maps[b]).scale(w);
                        let mut view = e.view_mut((rr.start, rp.start), (rr.len(), rp.len()));
                        view += term;
                    }
                }
            }
            e
        })
        .collect();
    CovariantPovm { system, effects }
}

/// Averaging a positive `H`-commuting seed operator over each coset:
/// `E({ω}) = (1/|G|) Σ_{g ∈ q⁻¹(ω)} U(g) C U(g)†`.
pub fn davies_povm(c_op: &BlockOperator, tol: &Tolerances) -> Result<CovariantPovm> {
    let system = c_op.system().clone();
    let group = system.group();
    let cm = c_op.to_dense();
    let scale = max_abs(&cm);
    let herm = max_abs_diff(&cm, &cm.adjoint());
    let (lmin, lmax) = eigen_range(&cm);
    if herm > tol.eq_threshold(scale) || lmin < tol.psd_floor(lmax) {
        return Err(Error::NotPositive(lmin.min(-herm)));
    }
    for &h in group.subgroup() {
        let u = system.u_matrix(h);
        let residual = max_abs_diff(&(&cm * &u), &(&u * &cm));
        if residual > tol.eq_threshold(scale) {
            return Err(Error::NotHCommuting { element: h, residual });
        }
    }
    let inv_order = 1.0 / group.order() as f64;
    let conj = |g: usize| {
        let u = system.u_matrix(g);
        &u * &cm * u.adjoint()
    };
    let n = system.dim();
    let total = (0..group.order()).fold(CMatrix::zeros(n, n), |acc, g| acc + conj(g)).scale(inv_order);
    let defect = total - identity(n);
    let residual = max_abs(&defect);
    if residual > tol.eq_threshold(1.0) {
        return Err(Error::NotNormalized { residual, defect });
    }
    let effects = group
        .cosets()
        .iter()
        .map(|coset| coset.iter().fold(CMatrix::zeros(n, n), |acc, &g| acc + conj(g)).scale(inv_order))
        .collect();
    Ok(CovariantPovm { system, effects })
}

/// A random positive, `H`-commuting, normalized seed operator for
/// [`davies_povm`]: a Wishart matrix averaged over `H` and rescaled on each
/// isotypic block by `(I ⊗ N_π^{-1/2})` so that its `G`-average is `I`.
pub fn random_davies_seed(system: &Arc<RepSystem>, seed: u64) -> BlockOperator {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = system.dim();
    let x = complex_gaussian(&mut rng, n, n);
    let a = &x * x.adjoint();
    let hs = system.group().subgroup();
    let c0 = hs
        .iter()
        .fold(CMatrix::zeros(n, n), |acc, &h| {
            let u = system.u_matrix(h);
            acc + &u * &a * u.adjoint()
        })
        .scale(1.0 / hs.len() as f64);
    let mut s = CMatrix::zeros(n, n);
    for &pi in system.support() {
        let (d, m) = (system.irrep_dim(pi), system.multiplicity(pi));
        let r = system.block_range(pi);
        let block = c0.view((r.start, r.start), (r.len(), r.len())).into_owned();
        let norm = partial_trace_block(d, m, &block).scale(1.0 / d as f64);
        let inv_sqrt = kron(&psd_power(&norm, -0.5), &identity(d));
        s.view_mut((r.start, r.start), (r.len(), r.len())).copy_from(&inv_sqrt);
    }
    let c = &s * c0 * &s;
    BlockOperator::from_dense(system.clone(), &crate::linalg::hermitian_part(&c)).expect("square")
}

/// Positivity, `E ≤ I`, normalization and exhaustive covariance.
pub fn validate_povm(p: &CovariantPovm, tol: &Tolerances) -> ValidationReport {
    let system = &p.system;
    let group = system.group();
    let n = system.dim();
    let mut report = ValidationReport::default();

    let mut low = Worst::new();
    let mut high = Worst::new();
    let (mut pos_ok, mut bound_ok) = (true, true);
    for (omega, e) in p.effects.iter().enumerate() {
        let herm = max_abs_diff(e, &e.adjoint());
        let (lmin, lmax) = eigen_range(e);
        pos_ok &= lmin >= tol.psd_floor(lmax) && herm <= tol.eq_threshold(lmax.abs());
        bound_ok &= 1.0 - lmax >= tol.psd_floor(1.0);
        low.offer((-lmin).max(herm), || Witness::Outcome { omega });
        high.offer(lmax - 1.0, || Witness::Outcome { omega });
    }
    report.push(Check::new("positive", pos_ok, low.residual, low.witness));
    report.push(Check::new("bounded_by_identity", bound_ok, high.residual, high.witness));

    let sum = p.effects.iter().fold(CMatrix::zeros(n, n), |acc, e| acc + e);
    let residual = max_abs_diff(&sum, &identity(n));
    report.push(Check::new("normalized", residual <= tol.eq_threshold(1.0), residual, None));

    let mut worst = Worst::new();
    for g in 0..group.order() {
        let u = system.u_matrix(g);
        for omega in 0..group.num_cosets() {
            let moved = &u * &p.effects[omega] * u.adjoint();
            let r = max_abs_diff(&moved, &p.effects[group.act(g, omega)]);
            worst.offer(r, || Witness::ElementOutcome { g, omega });
        }
    }
    report.push(Check::new("covariant", worst.residual <= tol.eq_threshold(1.0), worst.residual, worst.witness));
    report.push(Check::structural("sigma_additive"));
    report
}

/// Outcome probabilities `p(ω) = tr(T E({ω}))` for a density matrix `T`.
pub fn outcome_distribution(p: &CovariantPovm, state: &CMatrix, tol: &Tolerances) -> Result<Vec<f64>> {
    let n = p.system.dim();
    if state.shape() != (n, n) {
        return Err(Error::NotAState(format!("state is {:?}, expected {n}x{n}", state.shape())));
    }
    let herm = max_abs_diff(state, &state.adjoint());
    if herm > tol.eq_threshold(max_abs(state)) {
        return Err(Error::NotAState(format!("not Hermitian (residual {herm:e})")));
    }
    let (lmin, lmax) = eigen_range(state);
    if lmin < tol.psd_floor(lmax) {
        return Err(Error::NotAState(format!("not positive (min eigenvalue {lmin:e})")));
    }
    let tr = state.trace();
    if (tr - 1.0).norm() > tol.eq_threshold(1.0) {
        return Err(Error::NotAState(format!("trace is {tr}")));
    }
    Ok(p.effects.iter().map(|e| (state * e).trace().re).collect())
}

/// Whether every effect is a projection and distinct effects are orthogonal.
pub fn is_projective(p: &CovariantPovm, tol: &Tolerances) -> bool {
    let thr = tol.eq_threshold(1.0);
    for (i, e) in p.effects.iter().enumerate() {
        if max_abs_diff(&(e * e), e) > thr {
            return false;
        }
        for f in &p.effects[i + 1..] {
            if max_abs(&(e * f)) > thr {
                return false;
            }
        }
    }
    true
}
