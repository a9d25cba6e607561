//! Integrated train blocking and shipment path optimization.
//!
//! The crate is `no_std` and only needs `alloc`.

#![cfg_attr(not(test), no_std)]

extern crate alloc;

pub mod builders;
pub mod instance;
pub mod milp;
pub mod oracle;
pub mod pathgen;
pub mod sample;
pub mod sequential;
pub mod solution;
pub mod solver;
pub mod validate;
