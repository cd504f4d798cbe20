use std::io;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("matrix {0:?} is not hyperbolic: need |det| = 1 and |trace| > 2")]
    NotHyperbolic([[i64; 2]; 2]),

    #[error("integer overflow computing M^{period}; largest safe period is {max_safe}")]
    PowerOverflow { period: usize, max_safe: usize },

    #[error("period-{period} set has {count} points, above the enumeration limit {limit}")]
    TooManyPoints { period: usize, count: u128, limit: u128 },

    #[error("invalid shear profile: {0}")]
    InvalidShear(String),

    #[error(
        "Newton refinement from seed {seed} at ({:.12}, {:.12}) failed after {iterations} iterations \
         (residual {residual:.3e}); the perturbation is too large for continuation from the linear map",
        x[0], x[1]
    )]
    NewtonDiverged {
        seed: usize,
        x: [f64; 2],
        iterations: usize,
        residual: f64,
    },

    #[error("refined points from seeds {first} and {second} collide (distance {distance:.3e})")]
    PointCollision {
        first: usize,
        second: usize,
        distance: f64,
    },

    #[error("unstable direction at point {index} did not settle within {iterations} iterations")]
    FrameNotConverged { index: usize, iterations: usize },

    #[error("unstable jacobian {value} at point {index} is not expanding")]
    NotExpanding { index: usize, value: f64 },

    #[error("empty periodic orbit set")]
    EmptyOrbitSet,

    #[error("grid size {grid} is below the oversampling requirement {required}")]
    GridTooSmall { grid: usize, required: usize },

    #[error("aliasing tail {tail:.3e} exceeds {threshold:.1e} on a {grid}x{grid} grid; use a larger grid")]
    Aliasing {
        tail: f64,
        threshold: f64,
        grid: usize,
    },

    #[error("weights overflow double precision: {0}")]
    WeightOverflow(String),

    #[error("multiplier radius {radius} must exceed {required} = C(M)·r")]
    RadiusTooSmall { radius: f64, required: f64 },

    #[error("eigensolver failed: {0}")]
    Eigen(String),

    #[error("bump grid with {nodes} nodes is too coarse: transform {value:.3e} at ξ = {xi}")]
    BumpGridTooCoarse { nodes: usize, xi: f64, value: f64 },

    #[error("no n in [{start}, {end}] satisfies the box condition; this contradicts the pigeonhole bound")]
    DirichletExhausted { start: u64, end: u64 },

    #[error("degenerate variance form: both Birkhoff vectors vanish")]
    DegenerateVariance,

    #[error("K-stability gate failed: top eigenvalue moduli moved by {change:.3e} between K={k1} and K={k2} (limit {limit:.1e})")]
    Unstable {
        k1: usize,
        k2: usize,
        change: f64,
        limit: f64,
    },

    #[error("trace of T^{n} disagrees between eigenvalue power sum {power_sum} and matrix power {matrix_power}")]
    TraceMismatch {
        n: usize,
        power_sum: num_complex::Complex64,
        matrix_power: num_complex::Complex64,
    },

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error(transparent)]
    Io(#[from] io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}
