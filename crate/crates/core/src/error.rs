use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("not a group: {0}")]
    NotAGroup(String),
    #[error("not a subgroup: {0}")]
    NotASubgroup(String),
    #[error("irrep {label} is not unitary at element {element} (residual {residual:e})")]
    NotUnitary { label: String, element: usize, residual: f64 },
    #[error("irrep {label} is not a homomorphism at ({a}, {b}) (residual {residual:e})")]
    NotHomomorphism { label: String, a: usize, b: usize, residual: f64 },
    #[error("irrep {label} is reducible (character norm {norm})")]
    Reducible { label: String, norm: f64 },
    #[error("irreps {first} and {second} are equivalent (character overlap {overlap})")]
    EquivalentPair { first: String, second: String, overlap: f64 },
    #[error("group is not abelian: {0} and {1} do not commute")]
    NotAbelian(usize, usize),
    #[error("character {0} is not trivial on the subgroup")]
    CharacterNotInAnnihilator(String),
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),
    #[error("irrep {0} is not supported by the representation (multiplicity 0)")]
    UnsupportedIrrep(String),
    #[error("unknown irrep label {0}")]
    UnknownIrrep(String),
    #[error("representation has no supported irreps")]
    EmptySupport,
    #[error("V for irrep {label} is not an isometry (residual {residual:e})")]
    IsometryViolation { label: String, residual: f64 },
    #[error("auxiliary dimension {aux} too small for irrep {label}: {aux}*{dim} < {mult}")]
    AuxTooSmall { label: String, aux: usize, dim: usize, mult: usize },
    #[error("objects belong to different representation systems")]
    SystemMismatch,
    #[error("mixing weight {0} outside [0, 1]")]
    BadWeight(f64),
    #[error("invalid kernel: {0}")]
    InvalidKernel(String),
    #[error("invalid POVM: {0}")]
    InvalidPovm(String),
    #[error("seed operator is not positive (min eigenvalue {0:e})")]
    NotPositive(f64),
    #[error("seed operator does not commute with U(h) for h = {element} (residual {residual:e})")]
    NotHCommuting { element: usize, residual: f64 },
    #[error("seed operator is not normalized (defect max entry {residual:e})")]
    NotNormalized { residual: f64, defect: crate::linalg::CMatrix },
    #[error("not a state: {0}")]
    NotAState(String),
    #[error("lifted representation is not unitary (residual {0:e})")]
    NonUnitaryLift(f64),
    #[error("extremality criteria disagree: {0}")]
    InternalInconsistency(String),
    #[error("perturbation operator is zero")]
    ZeroPerturbation,
    #[error("operator is not in the perturbation space: {0}")]
    NotInPerturbationSpace(String),
    #[error("rank-one certificate violated: {0}")]
    CertificateViolation(String),
    #[error("unknown fixture {0}")]
    UnknownFixture(String),
    #[error("cannot read {path}: {message}")]
    File { path: String, message: String },
    #[error("schema error at {pointer}: {message}")]
    Schema { pointer: String, message: String },
}

impl Error {
    pub(crate) fn schema(pointer: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Schema { pointer: pointer.into(), message: message.into() }
    }
}
