use thiserror::Error;

/// Errors shared by every module in the crate.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid grid: x_max ({x_max}) must exceed x_min ({x_min}) and both must be finite")]
    GridBounds { x_min: f64, x_max: f64 },

    #[error("invalid grid: n_points must be at least 2, got {n_points}")]
    GridTooSmall { n_points: usize },

    #[error("grids differ; operands must share the same lattice")]
    GridMismatch,

    #[error("invalid time interval: t_b ({t_b}) must exceed t_a ({t_a})")]
    TimeOrder { t_a: f64, t_b: f64 },

    #[error("time ranges do not chain: earlier propagator ends at {expected}, later one starts at {found}")]
    TimeMismatch { expected: f64, found: f64 },

    #[error("physical constants differ between operands")]
    ConstantsMismatch,

    #[error("{name} must be positive and finite, got {value}")]
    NonPositive { name: &'static str, value: f64 },

    #[error("node index {index} out of range for grid of {len} points")]
    IndexOutOfRange { index: usize, len: usize },

    #[error("x = {x} outside tabulated potential domain [{lo}, {hi}]")]
    OutOfDomain { x: f64, lo: f64, hi: f64 },

    #[error(
        "packet tail at grid edge is {ratio:.3e} of the peak, above the {bound:.1e} bound; \
         enlarge the grid or narrow the packet"
    )]
    EdgeAmplitude { ratio: f64, bound: f64 },

    #[error(
        "stability guard violated: m*dx^2/(hbar*epsilon) = {coupling:.6e} must be < pi \
         (dx = {dx:.6e}, epsilon = {epsilon:.6e}); refine the time step or coarsen the grid"
    )]
    StabilityGuard {
        coupling: f64,
        dx: f64,
        epsilon: f64,
    },

    #[error(
        "degenerate harmonic boundary-value problem: omega*(t_b - t_a) = {omega_t:.6e} is a \
         multiple of pi, no unique classical path exists"
    )]
    DegenerateInterval { omega_t: f64 },

    #[error("{op} supports only the {required} potential families")]
    UnsupportedPotential {
        op: &'static str,
        required: &'static str,
    },

    #[error("oscillatory-integral extrapolation did not converge for {what}")]
    NonConvergence { what: &'static str },

    #[error("invalid slit geometry: {reason}")]
    Geometry { reason: String },

    #[error("degenerate window: {reason}")]
    DegenerateWindow { reason: String },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
