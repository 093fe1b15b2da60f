use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("{0} is not prime")]
    NotPrime(u64),
    #[error("moduli not coprime: gcd({0}, {1}) > 1")]
    NotCoprime(u64, u64),
    #[error("element is not a unit")]
    NotUnit,
    #[error("p-adic logarithm does not converge: v(x-1) = {0} <= 1/(p-1)")]
    LogDiverges(String),
    #[error("precision collapsed to zero in {0}")]
    PrecisionCollapse(&'static str),
    #[error("precision {have} insufficient, need at least {need} (in {what})")]
    PrecisionExhausted {
        what: &'static str,
        have: i64,
        need: i64,
    },
    #[error("series is zero at the certified precision")]
    ZeroSeries,
    #[error("mu/lambda undetermined at current precision")]
    Undetermined,
    #[error("singular matrix")]
    Singular,
    #[error("quotient group is not cyclic")]
    NonCyclicQuotient,
    #[error("Hensel separation failed at precision {0}, retry larger")]
    HenselSeparation(u32),
    #[error("no Stickelberger convention matched the interpolation oracle for p = {0}")]
    CalibrationFailed(u64),
    #[error("valuation at index {0} is uncertified at a hull vertex")]
    UncertifiedValuation(usize),
    #[error("root search needs escalation: derivative valuation {m} >= M/2 = {half_m}")]
    RootEscalation { m: i64, half_m: i64 },
    #[error("pole of L_p at s = 1 for the trivial character")]
    PoleAtOne,
    #[error("{0}")]
    Invalid(String),
}

impl Error {
    pub fn invalid<S: Into<String>>(s: S) -> Self {
        Error::Invalid(s.into())
    }
}
