use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

/// The singular forms the Glauber-Sudarshan density can take on the
/// classical boundary.  In the canonical frame the degenerate axis is
/// always y (the second quadrature), since alpha >= beta.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MarginalForm {
    /// beta = 1 with alpha > 1: a delta line along y times a Gaussian in x.
    DeltaLine,
    /// alpha = beta = 1 (vacuum): a two-dimensional delta at the origin.
    DeltaPoint,
}

impl std::fmt::Display for MarginalForm {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            MarginalForm::DeltaLine => write!(f, "delta(y) times a Gaussian in x (beta = 1)"),
            MarginalForm::DeltaPoint => write!(f, "2*pi*delta(x)*delta(y) (vacuum)"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("non-finite input: {0}")]
    NonFinite(&'static str),
    #[error("positivity: A+C must be > 0 and det G > 0")]
    NotPositive,
    #[error("uncertainty: det G must be ≤ 1 (got {0})")]
    UncertaintyViolated(f64),
    #[error("phi is distribution-valued for beta < 1 (beta = {0})")]
    DistributionValued(f64),
    #[error("phi is singular on the marginal boundary: {0}")]
    Marginal(MarginalForm),
    #[error("vacuum-degenerate: Q undefined at alpha^2 + beta^2 = 2")]
    VacuumDegenerate,
    #[error("overflow in {0}")]
    Overflow(&'static str),
    #[error("series did not converge within the term budget: {0}")]
    SeriesNotConverged(&'static str),
    #[error("2F1 argument within boundary eps of z = 1 with a+b-c >= 0")]
    HypergeomAtUnitArgument,
    #[error("quadrature did not converge: {0}")]
    QuadratureNotConverged(&'static str),
    #[error("divergence test inconclusive: beta within boundary eps of 1")]
    BoundaryInconclusive,
    #[error("precondition violated: {0}")]
    Precondition(&'static str),
    #[error("tail bound could not be certified by n = {0}")]
    TailNotCertified(usize),
    #[error("negative probability beyond the rounding floor: p({n}) = {value}")]
    NegativeProbability { n: usize, value: f64 },
    #[error("Fock cutoff would exceed {0} states")]
    CutoffExceeded(usize),
    #[error("generating-function cancellation risk: K exceeds 4 * n_max")]
    GeneratingCancellation,
    #[error("displaced tail mass exceeds 1e-8; the Fock cutoff is insufficient")]
    CutoffInsufficient,
}
