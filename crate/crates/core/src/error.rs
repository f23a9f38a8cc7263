use alloc::string::String;

/// Errors raised by mesh construction and the numerical operators.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("resolution level {level} outside supported range 0..={max}")]
    LevelOutOfRange { level: u32, max: u32 },

    #[error("grid cell (component {comp}, row {row}, col {col}) out of bounds for level {level}")]
    CellOutOfBounds { level: u32, comp: usize, row: usize, col: usize },

    #[error("vertex {0} is a pole and has no grid cell or neighbourhood")]
    PoleVertex(u32),

    #[error("vertex {0} does not exist")]
    NoSuchVertex(u32),

    #[error("degenerate geometry at vertex {vertex}: |v x a| = {norm:e}")]
    DegenerateGeometry { vertex: u32, norm: f64 },

    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("level mismatch: expected {expected}, found {found}")]
    LevelMismatch { expected: u32, found: u32 },

    #[error("layer {layer}: {detail}")]
    Layer { layer: usize, detail: String },

    #[error("missing parameter `{0}`")]
    MissingParam(String),
}

pub type Result<T, E = Error> = core::result::Result<T, E>;

macro_rules! shape_err {
    ($($arg:tt)*) => {
        $crate::Error::Shape(alloc::format!($($arg)*))
    };
}
pub(crate) use shape_err;
