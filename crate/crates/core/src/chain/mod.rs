//! Greedy elimination and preconditioning chains.

pub mod build;
pub mod elimination;
pub mod io;
pub mod verify;

pub use build::{build_chain, ChainConfig, ChainLevel, LevelKind, PreconChain};
pub use elimination::{greedy_elimination, Elimination, EliminationRecord, EliminationStep};
pub use verify::{verify_chain, ChainReport, ConditionResult, LevelSpectral, SpectralMethod};
pub use io::{decode_chain, encode_chain, read_chain, write_chain};
