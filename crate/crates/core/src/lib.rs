//! Cycle packing on unit disk graphs via weighted cycle separators,
//! surface-cut decompositions and a signature dynamic program.

pub mod bench;
pub mod cac;
pub mod cli;
pub mod dp;
pub mod gen;
pub mod geom;
pub mod grid;
pub mod oracle;
pub mod parity;
pub mod plane;
pub mod sc;
pub mod separator;
pub mod solve;
pub mod sparsifier;
pub mod structure;
pub mod surface;

pub use geom::{Point, UnitDiskGraph};
pub use grid::{CellId, GridMap, MapConstants};

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("input error: {0}")]
    Input(String),
    #[error("duplicate points at indices {0} and {1}")]
    DuplicatePoint(usize, usize),
    #[error("instance too large for the exhaustive oracle ({n} > {limit} vertices)")]
    OracleLimit { n: usize, limit: usize },
    #[error("graph is disconnected")]
    Disconnected,
    #[error("separator audit failed: {0}")]
    Audit(String),
    #[error("decomposition invalid: {0}")]
    Decomposition(String),
    #[error("refined mode disagrees with standard mode (z = {z} too small): refined {refined}, standard {standard}")]
    ZTooSmall { z: usize, refined: usize, standard: usize },
    #[error("dynamic program exceeded its state budget ({0} signatures)")]
    Budget(usize),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
