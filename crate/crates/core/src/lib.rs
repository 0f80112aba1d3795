//! Leakage reduction units for singlet–triplet spin qubits.
//!
//! * [`spin`]: dense states and operators on small spin registers.
//! * [`gates`]: phase, exchange and entangling gates of a data/ancilla DQD
//!   pair, logical operators and the long-range SINL construction.
//! * [`lru`]: SIL / SINL truth tables and the verifier.
//! * [`search`]: numerical synthesis of LRU gate sequences; [`templates`]
//!   holds the named templates and [`appendix`] the published SINL sets.
//! * [`lattice`]: Monte Carlo of leakage on a surface-code layout.

pub mod appendix;
pub mod error;
pub mod exec;
pub mod gates;
pub mod lattice;
pub mod lru;
pub mod optim;
pub mod search;
pub mod spin;
pub mod templates;

pub use error::{Error, Result};
