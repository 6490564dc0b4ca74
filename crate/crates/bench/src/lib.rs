//! Empty library target; this crate exists for its criterion benchmarks.
