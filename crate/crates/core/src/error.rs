use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Coordinate that fell outside a surface's declared domain.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Coordinate {
    R,
    Theta,
}

impl std::fmt::Display for Coordinate {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Coordinate::R => f.write_str("R"),
            Coordinate::Theta => f.write_str("theta"),
        }
    }
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("{coord} = {value} outside domain [{min}, {max}]")]
    Domain {
        coord: Coordinate,
        value: f64,
        min: f64,
        max: f64,
    },

    #[error("coefficient file line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("no bracketed radial minimum at theta = {theta}")]
    Path { theta: f64 },

    #[error("contract violated: {0}")]
    Contract(String),

    #[error("energetically forbidden: kinetic energy {kinetic} < 0 at psi = {psi}")]
    Forbidden { psi: f64, kinetic: f64 },

    #[error("no section crossing within time budget {budget} a.u.")]
    Escape { budget: f64 },

    #[error("left the surface domain at t = {t} ({coord} = {value})")]
    DomainExit { t: f64, coord: Coordinate, value: f64 },

    #[error("no convergence after {iterations} iterations; residuals {residuals:?}")]
    NoConvergence {
        iterations: usize,
        residuals: Vec<f64>,
    },

    #[error("resolution: {0}")]
    Resolution(String),

    #[error("grid too small: {0}")]
    GridTooSmall(String),

    #[error("width undefined: every row of the field is below the weight floor")]
    WidthUndefined,

    #[error("invalid data: {0}")]
    Data(String),

    #[error("pipeline: {0}")]
    Pipeline(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
