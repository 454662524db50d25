//! JSON documents for groups, irreps, systems, kernels, POVMs and reports.
//!
//! Complex numbers are `[re, im]` pairs and matrices are arrays of rows.
//! Every top-level document carries `"format": 1`. A system document names
//! its group and irreps either inline or by a path relative to itself; kernel
//! and POVM documents do the same for their system. Output floats are
//! rounded to 12 significant digits and object keys come out sorted.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use serde::de::DeserializeOwned;
use serde::Deserialize;
use serde_json::{json, Map, Value};

use crate::error::{Error, Result};
use crate::extremal::Verdict;
use crate::fixtures::fixture;
use crate::group::{validate_irreps, GroupData, Irrep, IrrepSet};
use crate::kernel::CovariantKernel;
use crate::linalg::{c, CMatrix, C64};
use crate::povm::{povm_from_kernel, CovariantPovm};
use crate::rank1::Rank1Certificate;
use crate::rep::{BlockOperator, RepSystem};
use crate::report::{ValidationReport, Witness};
use crate::tol::Tolerances;

pub const FORMAT: u64 = 1;

type RawMatrix = Vec<Vec<[f64; 2]>>;

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct GroupDoc {
    format: Option<u64>,
    order: usize,
    mult: Vec<Vec<usize>>,
    subgroup: Vec<usize>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct IrrepDoc {
    label: String,
    dim: usize,
    matrices: Vec<RawMatrix>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct IrrepsDoc {
    format: Option<u64>,
    irreps: Vec<IrrepDoc>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct SystemDoc {
    format: Option<u64>,
    group: Value,
    irreps: Value,
    mult: BTreeMap<String, usize>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct OperatorDoc {
    format: Option<u64>,
    system: Option<Value>,
    blocks: BTreeMap<String, RawMatrix>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct PovmDoc {
    format: Option<u64>,
    system: Option<Value>,
    effects: BTreeMap<String, RawMatrix>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct MatrixDoc {
    format: Option<u64>,
    matrix: RawMatrix,
}

fn escape(key: &str) -> String {
    key.replace('~', "~0").replace('/', "~1")
}

fn parse<T: DeserializeOwned>(v: &Value, prefix: &str) -> Result<T> {
    serde_path_to_error::deserialize(v).map_err(|e| {
        use serde_path_to_error::Segment;
        let mut pointer = prefix.to_string();
        for seg in e.path().iter() {
            match seg {
                Segment::Seq { index } => pointer.push_str(&format!("/{index}")),
                Segment::Map { key } => pointer.push_str(&format!("/{}", escape(key))),
                Segment::Enum { variant } => pointer.push_str(&format!("/{}", escape(variant))),
                Segment::Unknown => {}
            }
        }
        Error::schema(if pointer.is_empty() { "/".to_string() } else { pointer }, e.inner().to_string())
    })
}

fn check_format(format: Option<u64>, prefix: &str, required: bool) -> Result<()> {
    match format {
        Some(FORMAT) => Ok(()),
        None if !required => Ok(()),
        None => Err(Error::schema(format!("{prefix}/format"), "missing format version")),
        Some(v) => Err(Error::schema(format!("{prefix}/format"), format!("unsupported format {v}"))),
    }
}

fn matrix_from_raw(raw: &RawMatrix, pointer: &str) -> Result<CMatrix> {
    let rows = raw.len();
    let cols = raw.first().map_or(0, Vec::len);
    if let Some(i) = raw.iter().position(|r| r.len() != cols) {
        return Err(Error::schema(
            format!("{pointer}/{i}"),
            format!("row has {} entries, expected {cols}", raw[i].len()),
        ));
    }
    Ok(CMatrix::from_fn(rows, cols, |i, j| c(raw[i][j][0], raw[i][j][1])))
}

/// Reads and parses a JSON file.
pub fn read_value(path: &Path) -> Result<Value> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::File { path: path.display().to_string(), message: e.to_string() })?;
    serde_json::from_str(&text).map_err(|e| Error::schema("/", format!("{}: {e}", path.display())))
}

fn base_dir(path: &Path) -> PathBuf {
    path.parent().map(Path::to_path_buf).unwrap_or_default()
}

/// Follows a path reference; inline objects are returned as they are.
fn resolve(v: &Value, base: &Path, pointer: &str) -> Result<(Value, PathBuf, String)> {
    match v {
        Value::String(rel) => {
            let path = base.join(rel);
            let value = read_value(&path)?;
            Ok((value, base_dir(&path), String::new()))
        }
        Value::Object(_) => Ok((v.clone(), base.to_path_buf(), pointer.to_string())),
        _ => Err(Error::schema(pointer, "expected a path or an object")),
    }
}

pub fn group_from_value(v: &Value, prefix: &str, required_format: bool) -> Result<GroupData> {
    let doc: GroupDoc = parse(v, prefix)?;
    check_format(doc.format, prefix, required_format)?;
    if doc.order != doc.mult.len() {
        return Err(Error::schema(
            format!("{prefix}/order"),
            format!("order {} but table has {} rows", doc.order, doc.mult.len()),
        ));
    }
    GroupData::new(doc.mult, &doc.subgroup)
}

pub fn irreps_from_value(
    v: &Value,
    group: &GroupData,
    prefix: &str,
    required_format: bool,
    tol: &Tolerances,
) -> Result<IrrepSet> {
    let doc: IrrepsDoc = parse(v, prefix)?;
    check_format(doc.format, prefix, required_format)?;
    let mut raw = Vec::with_capacity(doc.irreps.len());
    for (i, p) in doc.irreps.iter().enumerate() {
        let matrices = p
            .matrices
            .iter()
            .enumerate()
            .map(|(g, m)| matrix_from_raw(m, &format!("{prefix}/irreps/{i}/matrices/{g}")))
            .collect::<Result<Vec<_>>>()?;
        raw.push(Irrep::new(p.label.clone(), p.dim, matrices));
    }
    validate_irreps(group, raw, tol).map_err(|e| match e {
        Error::Schema { pointer, message } => Error::Schema { pointer: format!("{prefix}{pointer}"), message },
        other => other,
    })
}

pub fn system_from_value(
    v: &Value,
    base: &Path,
    prefix: &str,
    required_format: bool,
    tol: &Tolerances,
) -> Result<Arc<RepSystem>> {
    let doc: SystemDoc = parse(v, prefix)?;
    check_format(doc.format, prefix, required_format)?;
    let (gv, _, gp) = resolve(&doc.group, base, &format!("{prefix}/group"))?;
    let group = group_from_value(&gv, &gp, gp.is_empty())?;
    let (iv, _, ip) = resolve(&doc.irreps, base, &format!("{prefix}/irreps"))?;
    let irreps = irreps_from_value(&iv, &group, &ip, ip.is_empty(), tol)?;
    Ok(Arc::new(RepSystem::new(group, irreps, &doc.mult)?))
}

pub fn load_group(path: &Path) -> Result<GroupData> {
    group_from_value(&read_value(path)?, "", true)
}

pub fn load_irreps(path: &Path, group: &GroupData, tol: &Tolerances) -> Result<IrrepSet> {
    irreps_from_value(&read_value(path)?, group, "", true, tol)
}

pub fn load_system(path: &Path, tol: &Tolerances) -> Result<Arc<RepSystem>> {
    system_from_value(&read_value(path)?, &base_dir(path), "", true, tol)
}

fn pick_system(
    embedded: Option<&Value>,
    base: &Path,
    given: Option<&Arc<RepSystem>>,
    tol: &Tolerances,
) -> Result<Arc<RepSystem>> {
    let own = match embedded {
        Some(v) => {
            let (sv, sbase, sp) = resolve(v, base, "/system")?;
            Some(system_from_value(&sv, &sbase, &sp, sp.is_empty(), tol)?)
        }
        None => None,
    };
    match (own, given) {
        (Some(a), Some(b)) if *a != **b => Err(Error::SystemMismatch),
        (_, Some(b)) => Ok(b.clone()),
        (Some(a), None) => Ok(a),
        (None, None) => Err(Error::schema("/system", "no system given")),
    }
}

/// Block operator document `{format, system?, blocks: {"ρ,π": matrix}}`
/// with irrep labels as keys. `system` may be omitted when supplied here.
pub fn operator_from_value(
    v: &Value,
    base: &Path,
    system: Option<&Arc<RepSystem>>,
    tol: &Tolerances,
) -> Result<BlockOperator> {
    let doc: OperatorDoc = parse(v, "")?;
    check_format(doc.format, "", true)?;
    let system = pick_system(doc.system.as_ref(), base, system, tol)?;
    let mut op = BlockOperator::zeros(system.clone());
    for (key, raw) in &doc.blocks {
        let pointer = format!("/blocks/{}", escape(key));
        let (a, b) = key.split_once(',').ok_or_else(|| Error::schema(&pointer, "expected key \"rho,pi\""))?;
        let idx = |l: &str| system.index_of(l.trim()).map_err(|e| Error::schema(&pointer, e.to_string()));
        let (rho, pi) = (idx(a)?, idx(b)?);
        let m = matrix_from_raw(raw, &pointer)?;
        op.set_block(rho, pi, m).map_err(|e| Error::schema(&pointer, e.to_string()))?;
    }
    Ok(op)
}

pub fn load_operator(path: &Path, system: Option<&Arc<RepSystem>>, tol: &Tolerances) -> Result<BlockOperator> {
    operator_from_value(&read_value(path)?, &base_dir(path), system, tol)
}

/// Loads a kernel document; validity is left to the caller.
pub fn load_kernel(path: &Path, system: Option<&Arc<RepSystem>>, tol: &Tolerances) -> Result<CovariantKernel> {
    Ok(CovariantKernel::from_blocks(load_operator(path, system, tol)?))
}

/// POVM document `{format, system?, effects: {"ω": matrix}}`.
pub fn povm_from_value(
    v: &Value,
    base: &Path,
    system: Option<&Arc<RepSystem>>,
    tol: &Tolerances,
) -> Result<CovariantPovm> {
    let doc: PovmDoc = parse(v, "")?;
    check_format(doc.format, "", true)?;
    let system = pick_system(doc.system.as_ref(), base, system, tol)?;
    let n = system.group().num_cosets();
    let mut effects = vec![None; n];
    for (key, raw) in &doc.effects {
        let pointer = format!("/effects/{}", escape(key));
        let omega: usize = key
            .parse()
            .ok()
            .filter(|&w| w < n)
            .ok_or_else(|| Error::schema(&pointer, format!("expected an outcome index below {n}")))?;
        effects[omega] = Some(matrix_from_raw(raw, &pointer)?);
    }
    let effects = effects
        .into_iter()
        .enumerate()
        .map(|(w, e)| e.ok_or_else(|| Error::schema("/effects", format!("missing effect {w}"))))
        .collect::<Result<Vec<_>>>()?;
    CovariantPovm::new(system, effects).map_err(|e| Error::schema("/effects", e.to_string()))
}

pub fn load_povm(path: &Path, system: Option<&Arc<RepSystem>>, tol: &Tolerances) -> Result<CovariantPovm> {
    povm_from_value(&read_value(path)?, &base_dir(path), system, tol)
}

/// Matrix document `{format, matrix}`, used for states and perturbations.
pub fn load_matrix(path: &Path) -> Result<CMatrix> {
    let doc: MatrixDoc = parse(&read_value(path)?, "")?;
    check_format(doc.format, "", true)?;
    matrix_from_raw(&doc.matrix, "/matrix")
}

/// `x` rounded to 12 significant digits, with `-0` folded to `0`.
pub fn num(x: f64) -> Value {
    if !x.is_finite() {
        return Value::Null;
    }
    let r: f64 = format!("{x:.11e}").parse().expect("formatted float");
    json!(if r == 0.0 { 0.0 } else { r })
}

pub fn complex_value(z: C64) -> Value {
    json!([num(z.re), num(z.im)])
}

pub fn matrix_value(m: &CMatrix) -> Value {
    Value::Array(
        (0..m.nrows()).map(|i| Value::Array((0..m.ncols()).map(|j| complex_value(m[(i, j)])).collect())).collect(),
    )
}

pub fn group_value(group: &GroupData) -> Value {
    json!({
        "format": FORMAT,
        "order": group.order(),
        "mult": group.table(),
        "subgroup": group.subgroup(),
    })
}

pub fn irreps_value(irreps: &IrrepSet) -> Value {
    let list: Vec<Value> = irreps
        .irreps()
        .iter()
        .map(|p| json!({"label": p.label, "dim": p.dim, "matrices": p.matrices.iter().map(matrix_value).collect::<Vec<_>>()}))
        .collect();
    json!({"format": FORMAT, "irreps": list})
}

/// How a document points at its parts: by relative path or inline.
#[derive(Debug, Clone, Copy)]
pub enum Embed<'a> {
    Inline,
    Path(&'a str),
}

/// System document; `group` and `irreps` are embedded or referenced.
pub fn system_value(system: &RepSystem, group: Embed, irreps: Embed) -> Value {
    let part = |e: Embed, inline: fn(&RepSystem) -> Value| match e {
        Embed::Inline => inline(system),
        Embed::Path(p) => json!(p),
    };
    let mult: Map<String, Value> =
        system.support().iter().map(|&i| (system.label(i).to_string(), json!(system.multiplicity(i)))).collect();
    json!({
        "format": FORMAT,
        "group": part(group, |s| group_value(s.group())),
        "irreps": part(irreps, |s| irreps_value(s.irreps())),
        "mult": mult,
    })
}

fn system_ref(system: &RepSystem, e: Embed) -> Value {
    match e {
        Embed::Inline => system_value(system, Embed::Inline, Embed::Inline),
        Embed::Path(p) => json!(p),
    }
}

/// Block operator document listing every supported `(ρ, π)` block.
pub fn operator_value(op: &BlockOperator, system: Embed) -> Value {
    let sys = op.system();
    let mut blocks = Map::new();
    for &rho in sys.support() {
        for &pi in sys.support() {
            blocks.insert(format!("{},{}", sys.label(rho), sys.label(pi)), matrix_value(&op.block_or_zero(rho, pi)));
        }
    }
    json!({"format": FORMAT, "system": system_ref(sys, system), "blocks": blocks})
}

pub fn kernel_value(k: &CovariantKernel, system: Embed) -> Value {
    operator_value(k.blocks(), system)
}

pub fn povm_value(p: &CovariantPovm, system: Embed) -> Value {
    let effects: Map<String, Value> =
        p.effects().iter().enumerate().map(|(w, e)| (w.to_string(), matrix_value(e))).collect();
    json!({"format": FORMAT, "system": system_ref(p.system(), system), "effects": effects})
}

pub fn matrix_doc(m: &CMatrix) -> Value {
    json!({"format": FORMAT, "matrix": matrix_value(m)})
}

fn witness_value(w: &Witness) -> Value {
    match w {
        Witness::Element { g } => json!({"g": g}),
        Witness::ElementOutcome { g, omega } => json!({"g": g, "omega": omega}),
        Witness::Outcome { omega } => json!({"omega": omega}),
        Witness::Irrep { label } => json!({"irrep": label}),
        Witness::Blocks { rho, pi } => json!({"rho": rho, "pi": pi}),
        Witness::ElementBlocks { h, rho, pi } => json!({"h": h, "rho": rho, "pi": pi}),
        Witness::Eigenvector(v) => json!({"eigenvector": v.iter().map(|&z| complex_value(z)).collect::<Vec<_>>()}),
    }
}

pub fn report_value(kind: &str, report: &ValidationReport) -> Value {
    let checks: Vec<Value> = report
        .checks
        .iter()
        .map(|ch| {
            let mut m = Map::new();
            m.insert("name".into(), json!(ch.name));
            m.insert("passed".into(), json!(ch.passed));
            m.insert("residual".into(), num(ch.residual));
            m.insert("structural".into(), json!(ch.structural));
            if let Some(w) = &ch.witness {
                m.insert("witness".into(), witness_value(w));
            }
            Value::Object(m)
        })
        .collect();
    json!({"format": FORMAT, "kind": kind, "passed": report.passed(), "checks": checks})
}

pub fn verdict_value(v: &Verdict) -> Value {
    let mut m = Map::new();
    m.insert("format".into(), json!(FORMAT));
    m.insert("extremal".into(), json!(v.extremal));
    m.insert("rank".into(), json!(v.rank));
    m.insert("dim_T_tilde_U".into(), json!(v.dim_t_tilde_u));
    m.insert("dim_commutant".into(), json!(v.dim_commutant));
    m.insert("perturbation_dim".into(), json!(v.perturbation_dim));
    if let Some(w) = &v.witness {
        m.insert("witness".into(), matrix_value(w));
    }
    Value::Object(m)
}

pub fn certificate_value(cert: &Rank1Certificate) -> Value {
    let sys = cert.system();
    let group = sys.group();
    let lambda: Map<String, Value> =
        group.subgroup().iter().map(|&h| (h.to_string(), complex_value(cert.lambda().at(group, h)))).collect();
    let vectors: Map<String, Value> =
        cert.frames().iter().map(|(&rho, f)| (sys.label(rho).to_string(), matrix_value(f))).collect();
    json!({"lambda": lambda, "vectors": vectors})
}

/// Certificate list with an optional reason when it is empty.
pub fn certificates_value(certs: &[Rank1Certificate], reason: Option<&str>) -> Value {
    let mut m = Map::new();
    m.insert("format".into(), json!(FORMAT));
    m.insert("certificates".into(), Value::Array(certs.iter().map(certificate_value).collect()));
    if let Some(r) = reason {
        m.insert("reason".into(), json!(r));
    }
    Value::Object(m)
}

/// Pretty JSON with a trailing newline.
pub fn render(v: &Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("JSON values serialize");
    s.push('\n');
    s
}

/// Documents for a named fixture as `(file name, document)` pairs: group,
/// irreps and system, then one kernel and one POVM per reference kernel.
pub fn fixture_documents(name: &str, tol: &Tolerances) -> Result<Vec<(String, Value)>> {
    let f = fixture(name)?;
    let mut out = vec![
        ("group.json".to_string(), group_value(f.system.group())),
        ("irreps.json".to_string(), irreps_value(f.system.irreps())),
        ("system.json".to_string(), system_value(&f.system, Embed::Path("group.json"), Embed::Path("irreps.json"))),
    ];
    for (kname, k) in &f.kernels {
        out.push((format!("kernel-{kname}.json"), kernel_value(k, Embed::Path("system.json"))));
        let p = povm_from_kernel(k, tol)?;
        out.push((format!("povm-{kname}.json"), povm_value(&p, Embed::Path("system.json"))));
    }
    Ok(out)
}
