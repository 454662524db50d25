//! Small groups, representation systems and reference kernels with known
//! structure: cyclic groups with their characters, `S₃` with its three
//! irreps, and the named fixture bundles shipped by the CLI.

use std::collections::BTreeMap;
use std::f64::consts::{FRAC_1_SQRT_2, TAU};
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::group::{validate_irreps, GroupData, Irrep};
use crate::kernel::{kernel_from_isometries, CovariantKernel, IsometryFamily};
use crate::linalg::{c, CMatrix, C64, ONE, ZERO};
use crate::rep::RepSystem;
use crate::tol::Tolerances;

/// Multiplication table of `Z_n` (addition mod `n`).
pub fn cyclic_table(n: usize) -> Vec<Vec<usize>> {
    (0..n).map(|a| (0..n).map(|b| (a + b) % n).collect()).collect()
}

/// Characters `chi_k(g) = exp(2πi k g / n)` labelled `chi0 .. chi{n-1}`.
pub fn cyclic_characters(n: usize) -> Vec<Irrep> {
    (0..n)
        .map(|k| {
            let vals: Vec<C64> = (0..n).map(|g| root_of_unity(n, k * g)).collect();
            Irrep::character(format!("chi{k}"), &vals)
        })
        .collect()
}

fn root_of_unity(n: usize, k: usize) -> C64 {
    match (k % n) * 4 {
        0 => ONE,
        x if x == n => c(0.0, 1.0),
        x if x == 2 * n => c(-1.0, 0.0),
        x if x == 3 * n => c(0.0, -1.0),
        _ => C64::from_polar(1.0, TAU * (k % n) as f64 / n as f64),
    }
}

/// Table of a permutation group listed with the identity first; the product
/// `a · b` is the composition `a ∘ b`.
pub fn permutation_table(perms: &[Vec<usize>]) -> Vec<Vec<usize>> {
    let index: BTreeMap<&[usize], usize> = perms.iter().enumerate().map(|(i, p)| (p.as_slice(), i)).collect();
    perms
        .iter()
        .map(|a| {
            perms
                .iter()
                .map(|b| {
                    let comp: Vec<usize> = b.iter().map(|&x| a[x]).collect();
                    index[comp.as_slice()]
                })
                .collect()
        })
        .collect()
}

/// Elements of `S₃` as images of `(0, 1, 2)`: identity, the two 3-cycles,
/// then the transpositions `(0 1)`, `(0 2)`, `(1 2)`.
pub fn s3_perms() -> Vec<Vec<usize>> {
    vec![vec![0, 1, 2], vec![1, 2, 0], vec![2, 0, 1], vec![1, 0, 2], vec![2, 1, 0], vec![0, 2, 1]]
}

pub fn s3_table() -> Vec<Vec<usize>> {
    permutation_table(&s3_perms())
}

fn sign(p: &[usize]) -> f64 {
    let mut inv = 0;
    for i in 0..p.len() {
        for j in i + 1..p.len() {
            if p[i] > p[j] {
                inv += 1;
            }
        }
    }
    if inv % 2 == 0 {
        1.0
    } else {
        -1.0
    }
}

/// Trivial, sign and the two-dimensional standard irrep of `S₃` (labels
/// `triv`, `sign`, `std`), the latter realized on the sum-zero plane.
pub fn s3_irreps() -> Vec<Irrep> {
    let perms = s3_perms();
    let s2 = FRAC_1_SQRT_2;
    let s6 = 1.0 / 6f64.sqrt();
    let q = nalgebra::DMatrix::from_row_slice(3, 2, &[s2, s6, -s2, s6, 0.0, -2.0 * s6]);
    let std = perms
        .iter()
        .map(|p| {
            let mut perm = nalgebra::DMatrix::<f64>::zeros(3, 3);
            for (i, &pi) in p.iter().enumerate() {
                perm[(pi, i)] = 1.0;
            }
            (q.transpose() * perm * &q).map(|x| c(x, 0.0))
        })
        .collect();
    vec![
        Irrep::character("triv", &[ONE; 6]),
        Irrep::character("sign", &perms.iter().map(|p| c(sign(p), 0.0)).collect::<Vec<_>>()),
        Irrep::new("std", 2, std),
    ]
}

fn system(table: Vec<Vec<usize>>, sub: &[usize], irreps: Vec<Irrep>, mult: &[(&str, usize)]) -> Arc<RepSystem> {
    let tol = Tolerances::default();
    let group = GroupData::new(table, sub).expect("fixture group");
    let irreps = validate_irreps(&group, irreps, &tol).expect("fixture irreps");
    let mult = mult.iter().map(|&(l, m)| (l.to_string(), m)).collect();
    Arc::new(RepSystem::new(group, irreps, &mult).expect("fixture system"))
}

fn cyclic_system(n: usize, sub: &[usize], mult: &[usize]) -> Arc<RepSystem> {
    let labels: Vec<String> = (0..n).map(|k| format!("chi{k}")).collect();
    let pairs: Vec<(&str, usize)> = labels.iter().map(String::as_str).zip(mult.iter().copied()).collect();
    system(cyclic_table(n), sub, cyclic_characters(n), &pairs)
}

/// `Z₂` with trivial `H` and the given multiplicities of `chi0`, `chi1`.
pub fn z2_system(mult: &[usize]) -> Arc<RepSystem> {
    cyclic_system(2, &[0], mult)
}

/// `Z₃` with trivial `H`.
pub fn z3_system(mult: &[usize]) -> Arc<RepSystem> {
    cyclic_system(3, &[0], mult)
}

/// `Z₄` with the given subgroup.
pub fn z4_system(sub: &[usize], mult: &[usize]) -> Arc<RepSystem> {
    cyclic_system(4, sub, mult)
}

/// `S₃` with `H = {e, (0 1)}` and multiplicities `triv 1, sign 1, std 2`.
pub fn s3_system() -> Arc<RepSystem> {
    s3_system_with(&[("triv", 1), ("sign", 1), ("std", 2)])
}

pub fn s3_system_with(mult: &[(&str, usize)]) -> Arc<RepSystem> {
    system(s3_table(), &[0, 3], s3_irreps(), mult)
}

/// `S₃` acting on a single point (`H = G`).
pub fn s3_system_full_subgroup() -> Arc<RepSystem> {
    system(s3_table(), &[0, 1, 2, 3, 4, 5], s3_irreps(), &[("triv", 1), ("sign", 1), ("std", 2)])
}

/// The `Z₂` kernel `[[1, c], [c̄, 1]]` on `z2_system(&[1, 1])`.
pub fn z2_kernel(cc: C64) -> CovariantKernel {
    let gram = CMatrix::from_row_slice(2, 2, &[ONE, cc, cc.conj(), ONE]);
    CovariantKernel::from_gram(z2_system(&[1, 1]), &gram).expect("2x2")
}

/// Gram vectors `η₀ = (1, 0)`, `η₁ = (0, 1)`, `η₂ = (1, 1)/√2` of the
/// rank-two `Z₃` kernel.
pub fn z3_rank2_vectors() -> [[C64; 2]; 3] {
    let s = c(FRAC_1_SQRT_2, 0.0);
    [[ONE, ZERO], [ZERO, ONE], [s, s]]
}

fn gram_of(vectors: &[[C64; 2]]) -> CMatrix {
    let n = vectors.len();
    CMatrix::from_fn(n, n, |i, j| vectors[i].iter().zip(&vectors[j]).map(|(a, b)| a.conj() * b).sum())
}

/// `K(ρ, π) = <η_ρ|η_π>` on `Z₃` with trivial `H`.
pub fn z3_rank2_kernel() -> CovariantKernel {
    CovariantKernel::from_gram(z3_system(&[1, 1, 1]), &gram_of(&z3_rank2_vectors())).expect("3x3")
}

pub fn z3_identity_kernel() -> CovariantKernel {
    crate::kernel::trivial_kernel(&z3_system(&[1, 1, 1]))
}

/// Unit vectors `v_ρ` of the `z4-h2` reference family, one per character.
pub fn z4_reference_vectors() -> [[C64; 2]; 4] {
    let s = FRAC_1_SQRT_2;
    [[ONE, ZERO], [ZERO, ONE], [c(s, 0.0), c(s, 0.0)], [c(s, 0.0), c(0.0, s)]]
}

/// Isometries `V_π = |v_π><e_π|` for the `z4-h2` fixture.
pub fn z4_reference_family() -> IsometryFamily {
    let sys = z4_system(&[0, 2], &[1, 1, 1, 1]);
    let maps =
        z4_reference_vectors().iter().enumerate().map(|(i, v)| (i, CMatrix::from_column_slice(2, 1, v))).collect();
    IsometryFamily::new(sys, 2, maps, &Tolerances::default()).expect("unit vectors")
}

/// A named bundle: system plus reference kernels with known verdicts.
#[derive(Debug, Clone)]
pub struct Fixture {
    pub name: &'static str,
    pub system: Arc<RepSystem>,
    pub kernels: Vec<(String, CovariantKernel)>,
}

pub const FIXTURE_NAMES: [&str; 4] = ["z2-std", "z3-std", "z4-h2", "z2-m2"];

pub fn fixture(name: &str) -> Result<Fixture> {
    let (name, system, kernels) = match name {
        "z2-std" => {
            let sys = z2_system(&[1, 1]);
            let kernels = [("c0", 0.0), ("c05", 0.5), ("c1", 1.0)]
                .into_iter()
                .map(|(n, v)| (n.to_string(), z2_kernel(c(v, 0.0))))
                .collect();
            ("z2-std", sys, kernels)
        }
        "z3-std" => {
            let sys = z3_system(&[1, 1, 1]);
            let theta = [0.0, TAU / 3.0, 2.0 * TAU / 3.0];
            let phases = CMatrix::from_fn(3, 3, |i, j| C64::from_polar(1.0, theta[i] - theta[j]));
            let kernels = vec![
                ("identity".to_string(), z3_identity_kernel()),
                ("rank2".to_string(), z3_rank2_kernel()),
                ("phase".to_string(), CovariantKernel::from_gram(sys.clone(), &phases).expect("3x3")),
            ];
            ("z3-std", sys, kernels)
        }
        "z4-h2" => {
            let fam = z4_reference_family();
            let sys = fam.system().clone();
            ("z4-h2", sys, vec![("reference".to_string(), kernel_from_isometries(&fam))])
        }
        "z2-m2" => {
            let sys = z2_system(&[2, 1]);
            ("z2-m2", sys.clone(), vec![("identity".to_string(), crate::kernel::trivial_kernel(&sys))])
        }
        other => return Err(Error::UnknownFixture(other.to_string())),
    };
    Ok(Fixture { name, system, kernels })
}
