//! Finite groups given by multiplication tables, their distinguished
//! subgroup and coset space, and user-supplied unitary irreps.

use crate::error::{Error, Result};
use crate::linalg::{c, hermitian_eigen, identity, max_abs_diff, CMatrix, C64};
use crate::tol::Tolerances;

/// A finite group `G` with a subgroup `H` and the left coset space `G/H`.
///
/// Element `0` is the identity. Cosets are ordered by their representative,
/// which is the smallest element index of the coset.
#[derive(Debug, Clone, PartialEq)]
pub struct GroupData {
    mult: Vec<Vec<usize>>,
    inverse: Vec<usize>,
    subgroup: Vec<usize>,
    cosets: Vec<Vec<usize>>,
    coset_of: Vec<usize>,
    action: Vec<Vec<usize>>,
}

impl GroupData {
    /// Validates the table and subgroup and computes cosets and the action.
    pub fn new(mult: Vec<Vec<usize>>, subgroup: &[usize]) -> Result<Self> {
        let n = mult.len();
        if n == 0 {
            return Err(Error::NotAGroup("empty table".into()));
        }
        for (a, row) in mult.iter().enumerate() {
            if row.len() != n {
                return Err(Error::NotAGroup(format!("row {a} has {} entries, expected {n}", row.len())));
            }
            if let Some(&x) = row.iter().find(|&&x| x >= n) {
                return Err(Error::NotAGroup(format!("entry {x} in row {a} is out of range")));
            }
        }
        for (x, row) in mult.iter().enumerate() {
            if mult[0][x] != x || row[0] != x {
                return Err(Error::NotAGroup(format!("element 0 is not an identity for {x}")));
            }
        }
        let mut inverse = vec![usize::MAX; n];
        for x in 0..n {
            match (0..n).find(|&y| mult[x][y] == 0 && mult[y][x] == 0) {
                Some(y) => inverse[x] = y,
                None => return Err(Error::NotAGroup(format!("element {x} has no inverse"))),
            }
        }
        for a in 0..n {
            for b in 0..n {
                let ab = mult[a][b];
                for cc in 0..n {
                    if mult[ab][cc] != mult[a][mult[b][cc]] {
                        return Err(Error::NotAGroup(format!("associativity fails for ({a}, {b}, {cc})")));
                    }
                }
            }
        }

        let mut sub: Vec<usize> = subgroup.to_vec();
        sub.sort_unstable();
        sub.dedup();
        if let Some(&x) = sub.iter().find(|&&x| x >= n) {
            return Err(Error::NotASubgroup(format!("element {x} is out of range")));
        }
        if sub.first() != Some(&0) {
            return Err(Error::NotASubgroup("identity missing".into()));
        }
        let mut member = vec![false; n];
        for &h in &sub {
            member[h] = true;
        }
        for &a in &sub {
            if !member[inverse[a]] {
                return Err(Error::NotASubgroup(format!("inverse of {a} missing")));
            }
            for &b in &sub {
                if !member[mult[a][b]] {
                    return Err(Error::NotASubgroup(format!(
                        "product of {a} and {b} is {} which is missing",
                        mult[a][b]
                    )));
                }
            }
        }

        let mut coset_of = vec![usize::MAX; n];
        let mut cosets = Vec::new();
        for g in 0..n {
            if coset_of[g] != usize::MAX {
                continue;
            }
            let mut coset: Vec<usize> = sub.iter().map(|&h| mult[g][h]).collect();
            coset.sort_unstable();
            for &x in &coset {
                coset_of[x] = cosets.len();
            }
            cosets.push(coset);
        }
        let action = (0..n).map(|g| cosets.iter().map(|cs| coset_of[mult[g][cs[0]]]).collect()).collect();

        Ok(GroupData { mult, inverse, subgroup: sub, cosets, coset_of, action })
    }

    pub fn order(&self) -> usize {
        self.mult.len()
    }

    pub fn identity(&self) -> usize {
        0
    }

    pub fn mul(&self, a: usize, b: usize) -> usize {
        self.mult[a][b]
    }

    pub fn inv(&self, a: usize) -> usize {
        self.inverse[a]
    }

    pub fn table(&self) -> &[Vec<usize>] {
        &self.mult
    }

    /// Sorted element indices of `H`.
    pub fn subgroup(&self) -> &[usize] {
        &self.subgroup
    }

    /// Left cosets `gH`, each sorted, ordered by representative.
    pub fn cosets(&self) -> &[Vec<usize>] {
        &self.cosets
    }

    pub fn num_cosets(&self) -> usize {
        self.cosets.len()
    }

    /// Representative (smallest element) of coset `omega`.
    pub fn rep(&self, omega: usize) -> usize {
        self.cosets[omega][0]
    }

    pub fn coset_reps(&self) -> Vec<usize> {
        self.cosets.iter().map(|cs| cs[0]).collect()
    }

    /// Canonical projection `q: G -> G/H`.
    pub fn coset_of(&self, g: usize) -> usize {
        self.coset_of[g]
    }

    /// Left action `g . omega`.
    pub fn act(&self, g: usize, omega: usize) -> usize {
        self.action[g][omega]
    }

    pub fn in_subgroup(&self, g: usize) -> bool {
        self.subgroup.binary_search(&g).is_ok()
    }

    /// First non-commuting pair, if any.
    pub fn non_commuting_pair(&self) -> Option<(usize, usize)> {
        let n = self.order();
        (0..n).flat_map(|a| (a + 1..n).map(move |b| (a, b))).find(|&(a, b)| self.mult[a][b] != self.mult[b][a])
    }

    pub fn is_abelian(&self) -> bool {
        self.non_commuting_pair().is_none()
    }

    /// Normalized counting-measure average over `G`.
    pub fn average<F: Fn(usize) -> C64>(&self, f: F) -> C64 {
        (0..self.order()).map(f).sum::<C64>() / self.order() as f64
    }

    /// The same average computed as an average over `G/H` of subgroup
    /// averages along `rep(omega) H`.
    pub fn average_by_cosets<F: Fn(usize) -> C64>(&self, f: F) -> C64 {
        let h = self.subgroup.len() as f64;
        let inner = |omega: usize| {
            let r = self.rep(omega);
            self.subgroup.iter().map(|&x| f(self.mult[r][x])).sum::<C64>() / h
        };
        (0..self.num_cosets()).map(inner).sum::<C64>() / self.num_cosets() as f64
    }
}

/// A unitary representation given by one matrix per group element.
#[derive(Debug, Clone, PartialEq)]
pub struct Irrep {
    pub label: String,
    pub dim: usize,
    pub matrices: Vec<CMatrix>,
}

impl Irrep {
    pub fn new(label: impl Into<String>, dim: usize, matrices: Vec<CMatrix>) -> Self {
        Irrep { label: label.into(), dim, matrices }
    }

    /// One-dimensional representation from its values.
    pub fn character(label: impl Into<String>, values: &[C64]) -> Self {
        let matrices = values.iter().map(|&v| CMatrix::from_element(1, 1, v)).collect();
        Irrep { label: label.into(), dim: 1, matrices }
    }

    pub fn matrix(&self, g: usize) -> &CMatrix {
        &self.matrices[g]
    }

    pub fn chi(&self, g: usize) -> C64 {
        self.matrices[g].trace()
    }
}

/// Validated, pairwise-inequivalent irreps in input order.
#[derive(Debug, Clone, PartialEq)]
pub struct IrrepSet {
    irreps: Vec<Irrep>,
    complete: bool,
}

impl IrrepSet {
    pub fn irreps(&self) -> &[Irrep] {
        &self.irreps
    }

    pub fn len(&self) -> usize {
        self.irreps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.irreps.is_empty()
    }

    pub fn get(&self, i: usize) -> &Irrep {
        &self.irreps[i]
    }

    /// All irreps pairwise inequivalent (always true after validation).
    pub fn pairwise_inequivalent(&self) -> bool {
        true
    }

    /// `sum d^2 == |G|`.
    pub fn complete(&self) -> bool {
        self.complete
    }

    pub fn index_of(&self, label: &str) -> Option<usize> {
        self.irreps.iter().position(|p| p.label == label)
    }
}

fn character_inner(group: &GroupData, a: &Irrep, b: &Irrep) -> C64 {
    group.average(|g| a.chi(g).conj() * b.chi(g))
}

/// Checks unitarity, the homomorphism property, irreducibility and pairwise
/// inequivalence of user-supplied representations.
pub fn validate_irreps(group: &GroupData, raw: Vec<Irrep>, tol: &Tolerances) -> Result<IrrepSet> {
    let n = group.order();
    for (i, p) in raw.iter().enumerate() {
        if raw[..i].iter().any(|q| q.label == p.label) {
            return Err(Error::schema(format!("/irreps/{i}/label"), format!("duplicate label {}", p.label)));
        }
        if p.dim == 0 {
            return Err(Error::ShapeMismatch(format!("irrep {} has dimension 0", p.label)));
        }
        if p.matrices.len() != n {
            return Err(Error::ShapeMismatch(format!(
                "irrep {} has {} matrices for a group of order {n}",
                p.label,
                p.matrices.len()
            )));
        }
        if let Some(g) = p.matrices.iter().position(|m| m.shape() != (p.dim, p.dim)) {
            return Err(Error::ShapeMismatch(format!("irrep {} matrix {g} is not {0}x{0}", p.dim)));
        }
    }
    for p in &raw {
        let id = identity(p.dim);
        for (g, m) in p.matrices.iter().enumerate() {
            let residual = max_abs_diff(&(m * m.adjoint()), &id);
            if residual > tol.eq_threshold(1.0) {
                return Err(Error::NotUnitary { label: p.label.clone(), element: g, residual });
            }
        }
        let residual = max_abs_diff(&p.matrices[0], &id);
        if residual > tol.eq_threshold(1.0) {
            return Err(Error::NotHomomorphism { label: p.label.clone(), a: 0, b: 0, residual });
        }
        for a in 0..n {
            for b in 0..n {
                let lhs = &p.matrices[group.mul(a, b)];
                let rhs = &p.matrices[a] * &p.matrices[b];
                let residual = max_abs_diff(lhs, &rhs);
                if residual > tol.eq_threshold(1.0) {
                    return Err(Error::NotHomomorphism { label: p.label.clone(), a, b, residual });
                }
            }
        }
        let norm = character_inner(group, p, p).re;
        if (norm - 1.0).abs() > tol.eq_threshold(p.dim as f64) {
            return Err(Error::Reducible { label: p.label.clone(), norm });
        }
    }
    for i in 0..raw.len() {
        for j in i + 1..raw.len() {
            let overlap = character_inner(group, &raw[i], &raw[j]).norm();
            if overlap > tol.eq_threshold(1.0) {
                return Err(Error::EquivalentPair {
                    first: raw[i].label.clone(),
                    second: raw[j].label.clone(),
                    overlap,
                });
            }
        }
    }
    let complete = raw.iter().map(|p| p.dim * p.dim).sum::<usize>() == n;
    Ok(IrrepSet { irreps: raw, complete })
}

fn require_characters(group: &GroupData, irreps: &IrrepSet) -> Result<()> {
    if let Some((a, b)) = group.non_commuting_pair() {
        return Err(Error::NotAbelian(a, b));
    }
    if let Some(p) = irreps.irreps().iter().find(|p| p.dim != 1) {
        return Err(Error::ShapeMismatch(format!("irrep {} has dimension {}, expected a character", p.label, p.dim)));
    }
    Ok(())
}

fn trivial_on_subgroup(group: &GroupData, p: &Irrep, tol: &Tolerances) -> bool {
    group.subgroup().iter().all(|&h| (p.chi(h) - 1.0).norm() <= tol.eq_threshold(1.0))
}

/// Labels of the characters trivial on `H`, in input order.
pub fn annihilator(group: &GroupData, irreps: &IrrepSet, tol: &Tolerances) -> Result<Vec<String>> {
    require_characters(group, irreps)?;
    Ok(irreps.irreps().iter().filter(|p| trivial_on_subgroup(group, p, tol)).map(|p| p.label.clone()).collect())
}

/// `(1/|Omega|) sum_omega f(omega) pi(omega)^{-1}` for a character `pi`
/// trivial on `H`; `f` is indexed by coset.
pub fn fourier_on_quotient(
    group: &GroupData,
    irreps: &IrrepSet,
    f: &[C64],
    label: &str,
    tol: &Tolerances,
) -> Result<C64> {
    require_characters(group, irreps)?;
    let p = irreps.index_of(label).map(|i| irreps.get(i)).ok_or_else(|| Error::UnknownIrrep(label.to_string()))?;
    if !trivial_on_subgroup(group, p, tol) {
        return Err(Error::CharacterNotInAnnihilator(label.to_string()));
    }
    if f.len() != group.num_cosets() {
        return Err(Error::ShapeMismatch(format!("function has {} values for {} cosets", f.len(), group.num_cosets())));
    }
    let sum: C64 = f.iter().enumerate().map(|(omega, &v)| v / p.chi(group.rep(omega))).sum();
    Ok(sum / group.num_cosets() as f64)
}

/// A one-dimensional unitary character of `H`, with values aligned to
/// [`GroupData::subgroup`].
#[derive(Debug, Clone, PartialEq)]
pub struct SubgroupCharacter(pub Vec<C64>);

impl SubgroupCharacter {
    /// Value at group element `h`; panics if `h` is not in `H`.
    pub fn at(&self, group: &GroupData, h: usize) -> C64 {
        let pos = group.subgroup().binary_search(&h).expect("element not in subgroup");
        self.0[pos]
    }

    pub fn is_trivial(&self) -> bool {
        self.0.iter().all(|v| (v - 1.0).norm() < 1e-9)
    }
}

fn closure(group: &GroupData, seed: Vec<usize>) -> Vec<usize> {
    let mut set = vec![false; group.order()];
    let mut elems = Vec::new();
    for s in seed.into_iter().chain(std::iter::once(0)) {
        if !set[s] {
            set[s] = true;
            elems.push(s);
        }
    }
    let mut i = 0;
    while i < elems.len() {
        for j in 0..=i {
            for (a, b) in [(elems[i], elems[j]), (elems[j], elems[i])] {
                let p = group.mul(a, b);
                if !set[p] {
                    set[p] = true;
                    elems.push(p);
                }
            }
        }
        i += 1;
    }
    elems.sort_unstable();
    elems
}

/// Splits each subspace (columns of an isometry) by the eigenspaces of the
/// compression of the Hermitian operator `op`.
fn refine(subspaces: Vec<CMatrix>, op: &CMatrix) -> Vec<CMatrix> {
    let mut out = Vec::new();
    for q in subspaces {
        if q.ncols() == 1 {
            out.push(q);
            continue;
        }
        let m = q.adjoint() * op * &q;
        let (vals, vecs) = hermitian_eigen(&m);
        let mut start = 0;
        for i in 1..=vals.len() {
            if i == vals.len() || vals[i - 1] - vals[i] > 1e-6 {
                out.push(&q * vecs.columns(start, i - start));
                start = i;
            }
        }
    }
    out
}

/// All one-dimensional unitary characters of `H`, trivial character first.
///
/// These are the characters of the abelianization `H/[H,H]`, obtained by
/// simultaneously diagonalizing the translation operators of its regular
/// representation.
pub fn characters_of_subgroup(group: &GroupData) -> Vec<SubgroupCharacter> {
    let hs = group.subgroup();
    let seed = hs
        .iter()
        .flat_map(|&a| hs.iter().map(move |&b| (a, b)))
        .map(|(a, b)| group.mul(group.mul(a, b), group.mul(group.inv(a), group.inv(b))))
        .collect();
    let commutator = closure(group, seed);

    // classes of H modulo the commutator subgroup
    let mut class_of = vec![usize::MAX; group.order()];
    let mut reps = Vec::new();
    for &h in hs {
        if class_of[h] != usize::MAX {
            continue;
        }
        for &k in &commutator {
            class_of[group.mul(h, k)] = reps.len();
        }
        reps.push(h);
    }
    let n = reps.len();
    let translation = |a: usize| {
        let mut l = CMatrix::zeros(n, n);
        for b in 0..n {
            l[(class_of[group.mul(reps[a], reps[b])], b)] = c(1.0, 0.0);
        }
        l
    };
    let ops: Vec<CMatrix> = (0..n).map(translation).collect();

    let mut subspaces = vec![identity(n)];
    for l in &ops {
        let herm = l + l.adjoint();
        let anti = (l - l.adjoint()) * c(0.0, 1.0);
        subspaces = refine(subspaces, &herm);
        subspaces = refine(subspaces, &anti);
    }
    debug_assert!(subspaces.iter().all(|q| q.ncols() == 1));

    let mut chars: Vec<SubgroupCharacter> = subspaces
        .iter()
        .map(|q| {
            let v = q.column(0);
            let on_quotient: Vec<C64> = ops.iter().map(|l| v.dotc(&(l * v))).collect();
            let values = hs
                .iter()
                .map(|&h| {
                    let z = on_quotient[class_of[h]];
                    z / z.norm()
                })
                .collect();
            SubgroupCharacter(values)
        })
        .collect();
    let key = |ch: &SubgroupCharacter| -> Vec<i64> {
        ch.0.iter()
            .map(|z| {
                let a = z.arg().rem_euclid(std::f64::consts::TAU);
                let q = (a * 1e6).round() as i64;
                if q >= (std::f64::consts::TAU * 1e6).round() as i64 {
                    0
                } else {
                    q
                }
            })
            .collect()
    };
    chars.sort_by_key(key);
    chars
}
