//! Library side of the CLI: the merge-scaling benchmark harness.

pub mod bench;
