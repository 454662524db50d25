use crate::linalg::C64;

/// Where a condition was violated worst.
#[derive(Debug, Clone, PartialEq)]
pub enum Witness {
    Element { g: usize },
    ElementOutcome { g: usize, omega: usize },
    Outcome { omega: usize },
    Irrep { label: String },
    Blocks { rho: String, pi: String },
    ElementBlocks { h: usize, rho: String, pi: String },
    Eigenvector(Vec<C64>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    /// Non-negative size of the violation (0 when exactly satisfied).
    pub residual: f64,
    pub witness: Option<Witness>,
    /// Set for conditions that hold by construction of the data model.
    pub structural: bool,
}

impl Check {
    pub fn new(name: &str, passed: bool, residual: f64, witness: Option<Witness>) -> Self {
        Check { name: name.to_string(), passed, residual: residual.max(0.0), witness, structural: false }
    }

    pub fn structural(name: &str) -> Self {
        Check { name: name.to_string(), passed: true, residual: 0.0, witness: None, structural: true }
    }
}

/// Per-condition outcome of a validation pass.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct ValidationReport {
    pub checks: Vec<Check>,
}

impl ValidationReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn get(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }

    pub fn failures(&self) -> Vec<&str> {
        self.checks.iter().filter(|c| !c.passed).map(|c| c.name.as_str()).collect()
    }

    pub(crate) fn push(&mut self, check: Check) {
        self.checks.push(check);
    }
}

/// Tracks the maximum residual and the first place it was attained.
pub(crate) struct Worst {
    pub residual: f64,
    pub witness: Option<Witness>,
}

impl Worst {
    pub fn new() -> Self {
        Worst { residual: 0.0, witness: None }
    }

    pub fn offer(&mut self, residual: f64, witness: impl FnOnce() -> Witness) {
        if residual > self.residual || residual.is_nan() {
            self.residual = residual;
            self.witness = Some(witness());
        }
    }
}
