//! Bi-directed de Bruijn graph construction and compaction.

pub mod compact;
pub mod edgegen;
pub mod error;
pub mod extsort;
pub mod graph;
pub mod io;
pub mod kmer;
pub mod parsim;
pub mod record;
pub mod sortdedup;

pub use edgegen::{make_canonical_edge, BiEdge, Orientation, ReadSet};
pub use error::{Error, Result};
pub use graph::{BiGraph, Edge, NodeLabel, Walk};
pub use kmer::{Kmer, Strand};
pub use sortdedup::biconstruct;
