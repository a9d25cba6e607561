//! File formats, MPS, run manifests and the command-line front end.

pub mod cli;
pub mod clock;
pub mod io;
pub mod manifest;
pub mod mps;
