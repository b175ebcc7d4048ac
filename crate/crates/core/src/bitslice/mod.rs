//! Bit-plane data layout and word-parallel execution of bitslice programs.

mod block;
mod exec;

use thiserror::Error;

pub use block::{broadcast, from_bitslice, to_bitslice, BitsliceBlock, LaneWidth};
pub use exec::{exec_program, ExecStats, Executor};

#[derive(Debug, Error)]
pub enum RtError {
    #[error("lane {lane}: value {value:#x} does not fit in {nbits} bits")]
    ValueOutOfRange { lane: usize, value: u64, nbits: u32 },
    #[error("expected {expected} entries, got {got}")]
    Length { expected: usize, got: usize },
    #[error("a block needs at least one lane")]
    NoLanes,
    #[error("at most 64 bit planes are supported, got {0}")]
    TooManyBits(u32),
    #[error("word {word} has bits above the last lane")]
    StrayBits { word: usize },
    #[error("lanes {start}..{} out of range for {lanes} lanes", start + len)]
    LaneRange { start: usize, len: usize, lanes: usize },
    #[error("no block for input `{0}`")]
    MissingInput(String),
    #[error("block `{bus}` has no plane {plane}")]
    MissingPlane { bus: String, plane: usize },
    #[error("block `{bus}` has {got} lanes, expected {expected}")]
    LaneMismatch { bus: String, expected: usize, got: usize },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}
