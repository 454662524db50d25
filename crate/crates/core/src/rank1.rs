//! Rank-one kernels `K(ρ, π) = |f(ρ)⟩⟨f(π)|`, built from a character `λ`
//! of `H` and orthonormal frames inside the `λ`-isotypic parts of each `H_ρ`.

use std::collections::BTreeMap;
use std::sync::Arc;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::extremal::factorize_kernel;
use crate::group::{characters_of_subgroup, SubgroupCharacter};
use crate::kernel::CovariantKernel;
use crate::linalg::{canonical_range, hermitian_eigen, identity, max_abs_diff, random_unitary, CMatrix, CVector};
use crate::rep::RepSystem;
use crate::tol::Tolerances;

/// `λ` together with, per supported `ρ`, an orthonormal basis of the
/// isotypic subspace and the chosen frame `{f_n}`.
#[derive(Debug, Clone, PartialEq)]
pub struct Rank1Certificate {
    system: Arc<RepSystem>,
    lambda: SubgroupCharacter,
    isotypic: BTreeMap<usize, CMatrix>,
    frames: BTreeMap<usize, CMatrix>,
}

impl Rank1Certificate {
    /// Certificate with explicit frames (`d_ρ × m_ρ`, orthonormal columns in
    /// the `λ`-isotypic subspace).
    pub fn new(
        system: Arc<RepSystem>,
        lambda: SubgroupCharacter,
        frames: BTreeMap<usize, CMatrix>,
        tol: &Tolerances,
    ) -> Result<Self> {
        let mut isotypic = BTreeMap::new();
        for &rho in system.support() {
            let p = isotypic_projector(&system, rho, &lambda);
            isotypic.insert(rho, columns(&canonical_range(&p, projector_rank(&p)), system.irrep_dim(rho)));
        }
        let cert = Rank1Certificate { system, lambda, isotypic, frames };
        cert.check(tol)?;
        Ok(cert)
    }

    pub fn system(&self) -> &Arc<RepSystem> {
        &self.system
    }

    pub fn lambda(&self) -> &SubgroupCharacter {
        &self.lambda
    }

    /// Orthonormal basis of `H'_ρ` as columns.
    pub fn isotypic_basis(&self, rho: usize) -> &CMatrix {
        &self.isotypic[&rho]
    }

    /// `[f_1 … f_m]` for `ρ`.
    pub fn frame(&self, rho: usize) -> &CMatrix {
        &self.frames[&rho]
    }

    pub fn frames(&self) -> &BTreeMap<usize, CMatrix> {
        &self.frames
    }

    /// Same `λ`, frames rotated by a random unitary inside each isotypic
    /// subspace before truncating to `m_ρ` vectors.
    pub fn with_random_frames(&self, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let frames = self
            .isotypic
            .iter()
            .map(|(&rho, basis)| {
                let w = random_unitary(&mut rng, basis.ncols());
                let m = self.system.multiplicity(rho);
                (rho, (basis * w).columns(0, m).into_owned())
            })
            .collect();
        Rank1Certificate { frames, ..self.clone() }
    }

    fn check(&self, tol: &Tolerances) -> Result<()> {
        let group = self.system.group();
        let thr = tol.eq_threshold(1.0);
        for &rho in self.system.support() {
            let (d, m) = (self.system.irrep_dim(rho), self.system.multiplicity(rho));
            let label = self.system.label(rho);
            let f = self
                .frames
                .get(&rho)
                .ok_or_else(|| Error::CertificateViolation(format!("missing frame for {label}")))?;
            if m > d {
                return Err(Error::CertificateViolation(format!("multiplicity {m} of {label} exceeds dimension {d}")));
            }
            if f.shape() != (d, m) {
                return Err(Error::CertificateViolation(format!(
                    "frame for {label} is {:?}, expected {d}x{m}",
                    f.shape()
                )));
            }
            if max_abs_diff(&(f.adjoint() * f), &identity(m)) > thr {
                return Err(Error::CertificateViolation(format!("frame for {label} is not orthonormal")));
            }
            for &h in group.subgroup() {
                let moved = self.system.irrep(rho).matrix(h) * f;
                if max_abs_diff(&moved, &f.map(|z| z * self.lambda.at(group, h))) > thr {
                    return Err(Error::CertificateViolation(format!("frame for {label} is not λ-isotypic at {h}")));
                }
            }
        }
        Ok(())
    }

    /// `f(ρ) = √d_ρ Σ_n f_n ⊗ k_n`, stacked over the support.
    pub fn vector(&self) -> CVector {
        let mut v = CVector::zeros(self.system.dim());
        for &rho in self.system.support() {
            let d = self.system.irrep_dim(rho);
            let start = self.system.block_range(rho).start;
            let f = &self.frames[&rho];
            let s = (d as f64).sqrt();
            for n in 0..f.ncols() {
                for a in 0..d {
                    v[start + n * d + a] = f[(a, n)] * s;
                }
            }
        }
        v
    }
}

fn columns(vs: &[CVector], rows: usize) -> CMatrix {
    let mut m = CMatrix::zeros(rows, vs.len());
    for (j, v) in vs.iter().enumerate() {
        m.set_column(j, v);
    }
    m
}

fn projector_rank(p: &CMatrix) -> usize {
    hermitian_eigen(p).0.iter().filter(|&&v| v > 0.5).count()
}

/// `P = (1/|H|) Σ_h conj(λ(h)) ρ(h)`.
pub fn isotypic_projector(system: &RepSystem, rho: usize, lambda: &SubgroupCharacter) -> CMatrix {
    let group = system.group();
    let irrep = system.irrep(rho);
    let hs = group.subgroup();
    hs.iter()
        .zip(&lambda.0)
        .fold(CMatrix::zeros(irrep.dim, irrep.dim), |acc, (&h, l)| acc + irrep.matrix(h) * l.conj())
        .unscale(hs.len() as f64)
}

/// One certificate per character `λ` of `H` whose isotypic parts are large
/// enough on every supported irrep.
pub fn rank1_existence(system: &Arc<RepSystem>) -> Vec<Rank1Certificate> {
    if system.support().iter().any(|&rho| system.multiplicity(rho) > system.irrep_dim(rho)) {
        return Vec::new();
    }
    let mut out = Vec::new();
    'lambda: for lambda in characters_of_subgroup(system.group()) {
        let mut isotypic = BTreeMap::new();
        let mut frames = BTreeMap::new();
        for &rho in system.support() {
            let p = isotypic_projector(system, rho, &lambda);
            let rank = projector_rank(&p);
            let m = system.multiplicity(rho);
            if rank < m {
                continue 'lambda;
            }
            let basis = columns(&canonical_range(&p, rank), system.irrep_dim(rho));
            frames.insert(rho, basis.columns(0, m).into_owned());
            isotypic.insert(rho, basis);
        }
        out.push(Rank1Certificate { system: system.clone(), lambda, isotypic, frames });
    }
    out
}

/// Why no rank-one kernel exists, or `None` if one does.
pub fn rank1_obstruction(system: &Arc<RepSystem>) -> Option<String> {
    if system.support().iter().any(|&rho| system.multiplicity(rho) > system.irrep_dim(rho)) {
        return Some("multiplicity exceeds dimension".into());
    }
    if rank1_existence(system).is_empty() {
        return Some("no character of H has large enough isotypic subspaces".into());
    }
    None
}

/// `K = |f⟩⟨f|` for the certificate's vector `f`.
pub fn build_rank1(cert: &Rank1Certificate, tol: &Tolerances) -> Result<CovariantKernel> {
    cert.check(tol)?;
    let f = cert.vector();
    CovariantKernel::from_gram(cert.system.clone(), &(&f * f.adjoint()))
}

pub fn is_rank1(kernel: &CovariantKernel, tol: &Tolerances) -> Result<bool> {
    Ok(factorize_kernel(kernel, tol)?.rank() == 1)
}
