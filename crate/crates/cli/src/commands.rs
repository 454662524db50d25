use std::path::{Path, PathBuf};
use std::sync::Arc;

use covpovm_core::io::{self, Embed};
use covpovm_core::kernel::default_aux_dim;
use covpovm_core::povm::{is_projective, random_davies_seed};
use covpovm_core::rank1::rank1_obstruction;
use covpovm_core::{
    build_rank1, davies_povm, decompose_along, is_extremal, kernel_from_isometries, kernel_from_povm,
    outcome_distribution, povm_from_kernel, random_isometries, rank1_existence, validate_kernel, validate_povm,
    CovariantKernel, CovariantPovm, Error, GroupData, RepSystem, Tolerances,
};
use serde_json::{json, Map, Value};
use thiserror::Error;

/// How a command failed, which decides the exit code.
#[derive(Debug, Error)]
pub enum CliError {
    /// Input could not be read or parsed.
    #[error("{0}")]
    Malformed(String),
    /// Input was read but did not pass validation; the document explains.
    #[error("{message}")]
    Invalid { message: String, document: Value },
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        match e {
            Error::Schema { .. } | Error::File { .. } | Error::UnknownFixture(_) => CliError::Malformed(e.to_string()),
            other => CliError::Invalid { message: other.to_string(), document: error_doc(&other) },
        }
    }
}

fn error_doc(e: &Error) -> Value {
    let mut m = Map::new();
    m.insert("format".into(), json!(io::FORMAT));
    m.insert("passed".into(), json!(false));
    m.insert("error".into(), json!(e.to_string()));
    if let Error::NotNormalized { defect, .. } = e {
        m.insert("defect".into(), io::matrix_value(defect));
    }
    Value::Object(m)
}

pub type CliResult = Result<Value, CliError>;

/// Tolerances plus the system named on the command line, if any; every
/// object handed out has passed its loader's checks.
pub struct Workspace {
    pub tol: Tolerances,
    system: Option<Arc<RepSystem>>,
}

impl Workspace {
    pub fn new(tol: Tolerances, system: Option<&Path>) -> Result<Self, CliError> {
        let system = system.map(|p| io::load_system(p, &tol)).transpose()?;
        Ok(Workspace { tol, system })
    }

    fn system(&self) -> Result<&Arc<RepSystem>, CliError> {
        self.system.as_ref().ok_or_else(|| CliError::Malformed("--system is required".into()))
    }

    fn kernel(&self, path: &Path) -> Result<CovariantKernel, CliError> {
        Ok(io::load_kernel(path, self.system.as_ref(), &self.tol)?)
    }

    /// Loads a kernel and fails with its validation report if invalid.
    fn valid_kernel(&self, path: &Path) -> Result<CovariantKernel, CliError> {
        let k = self.kernel(path)?;
        let report = validate_kernel(&k, &self.tol);
        if !report.passed() {
            return Err(CliError::Invalid {
                message: format!("invalid kernel: {}", report.failures().join(", ")),
                document: io::report_value("kernel", &report),
            });
        }
        Ok(k)
    }

    fn povm(&self, path: &Path) -> Result<CovariantPovm, CliError> {
        Ok(io::load_povm(path, self.system.as_ref(), &self.tol)?)
    }
}

pub fn validate(tol: &Tolerances, group: Option<&Path>, irreps: Option<&Path>, system: Option<&Path>) -> CliResult {
    let mut out = Map::new();
    out.insert("format".into(), json!(io::FORMAT));
    if let Some(sp) = system {
        let sys = io::load_system(sp, tol)?;
        out.insert("system".into(), system_summary(&sys));
    }
    if let Some(gp) = group {
        let g = io::load_group(gp)?;
        out.insert("group".into(), group_summary(&g));
        if let Some(ip) = irreps {
            let set = io::load_irreps(ip, &g, tol)?;
            let labels: Vec<&str> = set.irreps().iter().map(|p| p.label.as_str()).collect();
            out.insert("irreps".into(), json!({"labels": labels, "complete": set.complete()}));
        }
    } else if irreps.is_some() {
        return Err(CliError::Malformed("--irreps needs --group".into()));
    }
    if out.len() == 1 {
        return Err(CliError::Malformed("nothing to validate: pass --group, --irreps or --system".into()));
    }
    out.insert("passed".into(), json!(true));
    Ok(Value::Object(out))
}

fn group_summary(g: &GroupData) -> Value {
    json!({
        "order": g.order(),
        "subgroup": g.subgroup(),
        "num_cosets": g.num_cosets(),
        "abelian": g.is_abelian(),
    })
}

fn system_summary(s: &RepSystem) -> Value {
    let support: Vec<&str> = s.support().iter().map(|&i| s.label(i)).collect();
    json!({"group": group_summary(s.group()), "dim": s.dim(), "support": support, "complete": s.irreps().complete()})
}

pub fn kernel_random(ws: &Workspace, seed: u64, aux: Option<usize>) -> CliResult {
    let sys = ws.system()?;
    let aux = aux.unwrap_or_else(|| default_aux_dim(sys));
    let fam = random_isometries(sys, aux, seed)?;
    Ok(io::kernel_value(&kernel_from_isometries(&fam), Embed::Inline))
}

pub fn kernel_check(ws: &Workspace, kernel: &Path) -> CliResult {
    let k = ws.kernel(kernel)?;
    let report = validate_kernel(&k, &ws.tol);
    let doc = io::report_value("kernel", &report);
    if report.passed() {
        Ok(doc)
    } else {
        Err(CliError::Invalid { message: format!("invalid kernel: {}", report.failures().join(", ")), document: doc })
    }
}

pub fn to_povm(ws: &Workspace, kernel: &Path) -> CliResult {
    let k = ws.valid_kernel(kernel)?;
    Ok(io::povm_value(&povm_from_kernel(&k, &ws.tol)?, Embed::Inline))
}

fn povm_report(ws: &Workspace, p: &CovariantPovm) -> (bool, Value) {
    let report = validate_povm(p, &ws.tol);
    let mut doc = io::report_value("povm", &report);
    doc["is_projective"] = json!(is_projective(p, &ws.tol));
    (report.passed(), doc)
}

pub fn from_povm(ws: &Workspace, povm: &Path) -> CliResult {
    let p = ws.povm(povm)?;
    let (passed, doc) = povm_report(ws, &p);
    if !passed {
        return Err(CliError::Invalid { message: "invalid POVM".into(), document: doc });
    }
    Ok(io::kernel_value(&kernel_from_povm(&p, &ws.tol)?, Embed::Inline))
}

pub fn povm_check(ws: &Workspace, povm: &Path) -> CliResult {
    let p = ws.povm(povm)?;
    let (passed, doc) = povm_report(ws, &p);
    if passed {
        Ok(doc)
    } else {
        Err(CliError::Invalid { message: "invalid POVM".into(), document: doc })
    }
}

pub fn davies(ws: &Workspace, seed_op: Option<&Path>, random: Option<u64>) -> CliResult {
    let op = match (seed_op, random) {
        (Some(path), None) => io::load_operator(path, ws.system.as_ref(), &ws.tol)?,
        (None, Some(seed)) => random_davies_seed(ws.system()?, seed),
        _ => return Err(CliError::Malformed("pass exactly one of --seed-op and --seed".into())),
    };
    Ok(io::povm_value(&davies_povm(&op, &ws.tol)?, Embed::Inline))
}

pub fn extremal(ws: &Workspace, kernel: &Path) -> CliResult {
    let k = ws.valid_kernel(kernel)?;
    Ok(io::verdict_value(&is_extremal(&k, &ws.tol)?))
}

pub fn decompose(ws: &Workspace, kernel: &Path, witness: Option<&Path>, iterate: Option<usize>) -> CliResult {
    let k = ws.valid_kernel(kernel)?;
    let Some(steps) = iterate else {
        let b = match witness {
            Some(p) => io::load_matrix(p)?,
            None => match is_extremal(&k, &ws.tol)?.witness {
                Some(b) => b,
                None => return Err(extremal_error()),
            },
        };
        let d = decompose_along(&k, &b, &ws.tol)?;
        return Ok(json!({
            "format": io::FORMAT,
            "witness": io::matrix_value(&b),
            "plus": io::kernel_value(&d.plus, Embed::Inline),
            "minus": io::kernel_value(&d.minus, Embed::Inline),
        }));
    };
    if witness.is_some() {
        return Err(CliError::Malformed("--witness and --iterate are exclusive".into()));
    }
    // follow the plus branch until an extremal kernel or the step budget
    let mut current = k;
    let mut chain = Vec::new();
    let mut reached = false;
    for _ in 0..steps {
        let verdict = is_extremal(&current, &ws.tol)?;
        let Some(b) = verdict.witness else {
            reached = true;
            break;
        };
        let d = decompose_along(&current, &b, &ws.tol)?;
        chain.push(json!({
            "witness": io::matrix_value(&b),
            "rank": verdict.rank,
            "minus": io::kernel_value(&d.minus, Embed::Inline),
        }));
        current = d.plus;
    }
    if !reached {
        reached = is_extremal(&current, &ws.tol)?.extremal;
    }
    if chain.is_empty() && reached {
        return Err(extremal_error());
    }
    Ok(json!({
        "format": io::FORMAT,
        "experimental": true,
        "steps": chain,
        "final": io::kernel_value(&current, Embed::Inline),
        "final_extremal": reached,
    }))
}

fn extremal_error() -> CliError {
    CliError::Invalid {
        message: "kernel is extremal; there is no perturbation to decompose along".into(),
        document: json!({"format": io::FORMAT, "passed": false, "extremal": true}),
    }
}

pub fn rank1(ws: &Workspace, build: bool) -> CliResult {
    let sys = ws.system()?;
    let certs = rank1_existence(sys);
    let reason = rank1_obstruction(sys);
    let mut doc = io::certificates_value(&certs, reason.as_deref());
    if build {
        let kernels = certs
            .iter()
            .map(|c| build_rank1(c, &ws.tol).map(|k| io::kernel_value(&k, Embed::Inline)))
            .collect::<Result<Vec<_>, _>>()?;
        doc["kernels"] = Value::Array(kernels);
    }
    Ok(doc)
}

pub fn prob(ws: &Workspace, povm: &Path, state: &Path) -> CliResult {
    let p = ws.povm(povm)?;
    let (passed, doc) = povm_report(ws, &p);
    if !passed {
        return Err(CliError::Invalid { message: "invalid POVM".into(), document: doc });
    }
    let t = io::load_matrix(state)?;
    let probs = outcome_distribution(&p, &t, &ws.tol)?;
    Ok(json!({"format": io::FORMAT, "probabilities": probs.into_iter().map(io::num).collect::<Vec<_>>()}))
}

pub fn fixture(tol: &Tolerances, name: &str, dir: &Path) -> CliResult {
    let docs = io::fixture_documents(name, tol)?;
    std::fs::create_dir_all(dir).map_err(|e| CliError::Malformed(format!("cannot create {}: {e}", dir.display())))?;
    let mut files = Vec::new();
    for (file, v) in &docs {
        let path: PathBuf = dir.join(file);
        std::fs::write(&path, io::render(v))
            .map_err(|e| CliError::Malformed(format!("cannot write {}: {e}", path.display())))?;
        files.push(file.clone());
    }
    Ok(json!({"format": io::FORMAT, "fixture": name, "files": files}))
}
