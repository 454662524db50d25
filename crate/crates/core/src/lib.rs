//! Covariant POVMs on finite homogeneous spaces `G/H`: kernels, effects,
//! extremality and rank-one constructions.

pub mod error;
pub mod extremal;
pub mod fixtures;
pub mod group;
pub mod io;
pub mod kernel;
pub mod linalg;
pub mod povm;
pub mod rank1;
pub mod rep;
pub mod report;
pub mod tol;

pub use error::{Error, Result};
pub use extremal::{
    decompose_along, decompose_with, factorize_kernel, is_extremal, perturbation_space, Decomposition,
    PerturbationSpace, RkhsFactorization, Verdict,
};
pub use group::{characters_of_subgroup, validate_irreps, GroupData, Irrep, IrrepSet, SubgroupCharacter};
pub use kernel::{
    kernel_from_isometries, mix_kernels, random_isometries, trivial_kernel, validate_kernel, CovariantKernel,
    IsometryFamily,
};
pub use linalg::{CMatrix, CVector, C64};
pub use povm::{
    davies_povm, kernel_from_povm, outcome_distribution, povm_from_isometries, povm_from_kernel, validate_povm,
    CovariantPovm,
};
pub use rank1::{build_rank1, is_rank1, rank1_existence, rank1_obstruction, Rank1Certificate};
pub use rep::{BlockOperator, RepSystem};
pub use report::{Check, ValidationReport, Witness};
pub use tol::Tolerances;
