use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("unknown offspring spec `{0}`")]
    UnknownSpec(String),
    #[error("offspring weight p_{index} = {value} is negative")]
    NegativeWeight { index: usize, value: f64 },
    #[error("offspring law is not critical: mean = {0}")]
    NotCritical(f64),
    #[error("offspring law is degenerate (needs p_0 > 0 and p_1 < 1)")]
    Degenerate,
    #[error("pgf argument outside the closed unit disc: |w| = {0}")]
    OutsideUnitDisc(f64),
    #[error("invalid Lukasiewicz sequence: {0}")]
    BadLukasiewicz(String),
    #[error("size {n} incompatible with span {span}: need n = 1 (mod span)")]
    SpanMismatch { n: usize, span: usize },
    #[error("conditioned sampler exceeded {0} rejection attempts")]
    RejectionCap(u64),
    #[error("unconditioned tree exceeded size cap {0}")]
    Truncated(usize),
    #[error("vertex {vertex} out of range for tree of {n} vertices")]
    BadVertex { vertex: usize, n: usize },
    #[error("{what} limited to n <= {max}, got {n}")]
    SizeGuard {
        what: &'static str,
        n: usize,
        max: usize,
    },
    #[error("invalid displacement spec: {0}")]
    BadDisplacement(String),
    #[error("total conditioned weight is zero for n = {0}")]
    ZeroWeight(usize),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}
