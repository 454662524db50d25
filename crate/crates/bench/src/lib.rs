//! Inputs shared by the benchmarks: one random kernel per bench system.

use std::sync::Arc;

use covpovm_core::fixtures;
use covpovm_core::kernel::default_aux_dim;
use covpovm_core::{kernel_from_isometries, random_isometries, CovariantKernel, RepSystem};

/// Systems benchmarked, smallest first.
pub fn systems() -> Vec<(&'static str, Arc<RepSystem>)> {
    vec![
        ("z2-std", fixtures::z2_system(&[1, 1])),
        ("z3-std", fixtures::z3_system(&[1, 1, 1])),
        ("z4-h2", fixtures::z4_reference_family().system().clone()),
        ("s3", fixtures::s3_system()),
        ("s3-m3", fixtures::s3_system_with(&[("triv", 2), ("sign", 2), ("std", 3)])),
    ]
}

/// A full-rank random kernel, which is the slow case for the extremality test.
pub fn sample_kernel(sys: &Arc<RepSystem>) -> CovariantKernel {
    let aux = default_aux_dim(sys) + 2;
    kernel_from_isometries(&random_isometries(sys, aux, 7).expect("aux is large enough"))
}
