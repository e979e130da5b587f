use thiserror::Error;

/// Errors raised by the model, solver and propagation code.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("singular detuning: |{quantity}| = {value:e} is below {epsilon:e}; the cavity cannot be eliminated perturbatively here")]
    SingularDetuning {
        quantity: &'static str,
        value: f64,
        epsilon: f64,
    },

    #[error("mode mixing undefined: the qubit-ensemble coupling vector vanishes")]
    DegenerateMixing,

    #[error("resonance solver did not converge after {iterations} iterations (last residual {residual:e} MHz)")]
    NoConvergence { iterations: usize, residual: f64 },

    #[error("no resonant root for the cavity-qubit detuning in ({lo}, {hi}) MHz")]
    RootOutOfBracket { lo: f64, hi: f64 },

    #[error("adiabaticity metric undefined: {0}")]
    UndefinedMetric(&'static str),

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("state has zero norm")]
    ZeroNorm,

    #[error("frequency matching violated: omega_a = {omega_a} but omega_c + omega_f = {sum}")]
    FrequencyMismatch { omega_a: f64, sum: f64 },

    #[error("mixing angle undefined: g_m and Omega_d both vanish")]
    UndefinedAngle,

    #[error("bright modes degenerate: Theta equals |Delta|")]
    DegenerateBrightModes,

    #[error("microscopic model limited to {max} molecules, got {requested}")]
    SizeLimit { requested: usize, max: usize },

    #[error("step size underflow at t = {t} (h = {h:e})")]
    StepSizeUnderflow { t: f64, h: f64 },

    #[error("empty grid")]
    EmptyGrid,

    #[error("i/o error: {0}")]
    Io(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
}

pub type Result<T> = std::result::Result<T, Error>;
