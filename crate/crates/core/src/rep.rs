//! The representation `U = ⊕ π ⊗ I` on `H = ⊕ H_π ⊗ K_π` and the block
//! calculus on it: contraction, partial trace, embedding and the commutant.
//!
//! Inside each block `H_π ⊗ K_π` the basis index of `e_a ⊗ k_n` is
//! `n * d_π + a`: the irrep index runs fast and the multiplicity index slow.
//! In this ordering `π(g) ⊗ I_m` is `kron(I_m, π(g))` and `I_d ⊗ T` is
//! `kron(T, I_d)`.

use std::collections::BTreeMap;
use std::ops::Range;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::group::{GroupData, Irrep, IrrepSet};
use crate::linalg::{identity, kron, matrix_unit, max_abs_diff, CMatrix, CVector, C64};

#[derive(Debug, Clone, PartialEq)]
pub struct RepSystem {
    group: GroupData,
    irreps: IrrepSet,
    mult: Vec<usize>,
    support: Vec<usize>,
    offsets: Vec<usize>,
    dim: usize,
}

impl RepSystem {
    /// Multiplicities are given by irrep label; unlisted irreps get 0.
    pub fn new(group: GroupData, irreps: IrrepSet, multiplicities: &BTreeMap<String, usize>) -> Result<Self> {
        if let Some(label) = multiplicities.keys().find(|l| irreps.index_of(l).is_none()) {
            return Err(Error::UnknownIrrep(label.clone()));
        }
        let mult: Vec<usize> =
            irreps.irreps().iter().map(|p| multiplicities.get(&p.label).copied().unwrap_or(0)).collect();
        let support: Vec<usize> = (0..mult.len()).filter(|&i| mult[i] > 0).collect();
        if support.is_empty() {
            return Err(Error::EmptySupport);
        }
        let mut offsets = Vec::with_capacity(mult.len());
        let mut dim = 0;
        for (i, p) in irreps.irreps().iter().enumerate() {
            offsets.push(dim);
            dim += p.dim * mult[i];
        }
        Ok(RepSystem { group, irreps, mult, support, offsets, dim })
    }

    pub fn group(&self) -> &GroupData {
        &self.group
    }

    pub fn irreps(&self) -> &IrrepSet {
        &self.irreps
    }

    pub fn irrep(&self, i: usize) -> &Irrep {
        self.irreps.get(i)
    }

    pub fn label(&self, i: usize) -> &str {
        &self.irreps.get(i).label
    }

    pub fn index_of(&self, label: &str) -> Result<usize> {
        self.irreps.index_of(label).ok_or_else(|| Error::UnknownIrrep(label.to_string()))
    }

    /// `dim H = Σ d_π m_π`.
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn multiplicity(&self, i: usize) -> usize {
        self.mult[i]
    }

    pub fn multiplicities(&self) -> BTreeMap<String, usize> {
        self.irreps.irreps().iter().zip(&self.mult).map(|(p, &m)| (p.label.clone(), m)).collect()
    }

    pub fn irrep_dim(&self, i: usize) -> usize {
        self.irreps.get(i).dim
    }

    /// Indices of irreps with nonzero multiplicity, in input order.
    pub fn support(&self) -> &[usize] {
        &self.support
    }

    pub fn is_supported(&self, i: usize) -> bool {
        self.mult[i] > 0
    }

    /// Index range of `H_π ⊗ K_π` inside `H`.
    pub fn block_range(&self, i: usize) -> Range<usize> {
        self.offsets[i]..self.offsets[i] + self.block_dim(i)
    }

    pub fn block_dim(&self, i: usize) -> usize {
        self.irrep_dim(i) * self.mult[i]
    }

    pub(crate) fn require_supported(&self, i: usize) -> Result<()> {
        if self.is_supported(i) {
            Ok(())
        } else {
            Err(Error::UnsupportedIrrep(self.label(i).to_string()))
        }
    }

    /// `π(g) ⊗ I_{m_π}` on the π-block.
    pub fn u_block(&self, i: usize, g: usize) -> CMatrix {
        kron(&identity(self.mult[i]), self.irrep(i).matrix(g))
    }

    /// Dense matrix of `U(g)` on `H`.
    pub fn u_matrix(&self, g: usize) -> CMatrix {
        let mut u = CMatrix::zeros(self.dim, self.dim);
        for &i in &self.support {
            let r = self.block_range(i);
            u.view_mut((r.start, r.start), (r.len(), r.len())).copy_from(&self.u_block(i, g));
        }
        u
    }
}

/// Operator on `H` stored as dense blocks indexed by pairs of supported
/// irreps; absent blocks are zero.
#[derive(Debug, Clone, PartialEq)]
pub struct BlockOperator {
    system: Arc<RepSystem>,
    blocks: BTreeMap<(usize, usize), CMatrix>,
}

impl BlockOperator {
    pub fn zeros(system: Arc<RepSystem>) -> Self {
        BlockOperator { system, blocks: BTreeMap::new() }
    }

    /// Splits a dense `dim H × dim H` matrix into its supported blocks.
    pub fn from_dense(system: Arc<RepSystem>, m: &CMatrix) -> Result<Self> {
        let n = system.dim();
        if m.shape() != (n, n) {
            return Err(Error::ShapeMismatch(format!("operator is {:?}, expected {n}x{n}", m.shape())));
        }
        let mut blocks = BTreeMap::new();
        for &i in system.support() {
            for &j in system.support() {
                let (ri, rj) = (system.block_range(i), system.block_range(j));
                blocks.insert((i, j), m.view((ri.start, rj.start), (ri.len(), rj.len())).into_owned());
            }
        }
        Ok(BlockOperator { system, blocks })
    }

    pub fn system(&self) -> &Arc<RepSystem> {
        &self.system
    }

    pub fn block(&self, i: usize, j: usize) -> Option<&CMatrix> {
        self.blocks.get(&(i, j))
    }

    /// Block `(i, j)`, materializing zeros when absent.
    pub fn block_or_zero(&self, i: usize, j: usize) -> CMatrix {
        self.blocks
            .get(&(i, j))
            .cloned()
            .unwrap_or_else(|| CMatrix::zeros(self.system.block_dim(i), self.system.block_dim(j)))
    }

    pub fn blocks(&self) -> impl Iterator<Item = (&(usize, usize), &CMatrix)> {
        self.blocks.iter()
    }

    pub fn set_block(&mut self, i: usize, j: usize, m: CMatrix) -> Result<()> {
        self.system.require_supported(i)?;
        self.system.require_supported(j)?;
        let shape = (self.system.block_dim(i), self.system.block_dim(j));
        if m.shape() != shape {
            return Err(Error::ShapeMismatch(format!(
                "block ({}, {}) is {:?}, expected {:?}",
                self.system.label(i),
                self.system.label(j),
                m.shape(),
                shape
            )));
        }
        self.blocks.insert((i, j), m);
        Ok(())
    }

    pub fn to_dense(&self) -> CMatrix {
        let n = self.system.dim();
        let mut m = CMatrix::zeros(n, n);
        for (&(i, j), b) in &self.blocks {
            let (ri, rj) = (self.system.block_range(i), self.system.block_range(j));
            m.view_mut((ri.start, rj.start), (ri.len(), rj.len())).copy_from(b);
        }
        m
    }
}

/// `U(g)` as a block-diagonal operator.
pub fn apply_u(system: &Arc<RepSystem>, g: usize) -> BlockOperator {
    let mut op = BlockOperator::zeros(system.clone());
    for &i in system.support() {
        op.blocks.insert((i, i), system.u_block(i, g));
    }
    op
}

/// Trace over the `H_π ⊗ H_π*` factor of `x ∈ H_π ⊗ H_π* ⊗ K_aux`.
///
/// `x` is laid out row-major as a `d × d × aux` array:
/// `x[(i * d + j) * aux + k]`.
pub fn contract_pi(system: &RepSystem, pi: usize, x: &[C64], aux: usize) -> Result<CVector> {
    let d = system.irrep_dim(pi);
    if x.len() != d * d * aux {
        return Err(Error::ShapeMismatch(format!("expected {d}x{d}x{aux} = {} entries, got {}", d * d * aux, x.len())));
    }
    Ok(CVector::from_fn(aux, |k, _| (0..d).map(|i| x[(i * d + i) * aux + k]).sum()))
}

/// Partial trace over `H_π` of an `(d m) × (d m)` block.
pub(crate) fn partial_trace_block(d: usize, m: usize, block: &CMatrix) -> CMatrix {
    CMatrix::from_fn(m, m, |n, l| (0..d).map(|a| block[(n * d + a, l * d + a)]).sum())
}

/// `Tr_{H_π}` of the `(π, π)` block of `a`, an `m_π × m_π` matrix.
pub fn partial_trace_pi(system: &RepSystem, pi: usize, a: &BlockOperator) -> Result<CMatrix> {
    system.require_supported(pi)?;
    let m = system.multiplicity(pi);
    Ok(match a.block(pi, pi) {
        Some(b) => partial_trace_block(system.irrep_dim(pi), m, b),
        None => CMatrix::zeros(m, m),
    })
}

/// `I_{H_π} ⊗ T` placed on the `(π, π)` block.
pub fn embed_pi(system: &Arc<RepSystem>, pi: usize, t: &CMatrix) -> Result<BlockOperator> {
    system.require_supported(pi)?;
    let m = system.multiplicity(pi);
    if t.shape() != (m, m) {
        return Err(Error::ShapeMismatch(format!("T is {:?}, expected {m}x{m}", t.shape())));
    }
    let mut op = BlockOperator::zeros(system.clone());
    op.blocks.insert((pi, pi), kron(t, &identity(system.irrep_dim(pi))));
    Ok(op)
}

/// Spanning set `{ I ⊗ E_ij }` of the commutant of `U`.
pub fn basis_tu(system: &Arc<RepSystem>) -> Vec<BlockOperator> {
    let mut out = Vec::new();
    for &pi in system.support() {
        let m = system.multiplicity(pi);
        for i in 0..m {
            for j in 0..m {
                out.push(embed_pi(system, pi, &matrix_unit(m, i, j)).expect("supported irrep"));
            }
        }
    }
    out
}

/// Max-entry residual of `[A, U(g)]` over all group elements.
pub fn commutator_residual(system: &RepSystem, a: &CMatrix) -> f64 {
    (0..system.group().order())
        .map(|g| {
            let u = system.u_matrix(g);
            max_abs_diff(&(a * &u), &(&u * a))
        })
        .fold(0.0, f64::max)
}
