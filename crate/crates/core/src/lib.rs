//! HAETAE lattice signatures with two interchangeable execution paths.
//!
//! Every operation (key generation, signing, verification) exists as a
//! buffered reference implementation and as a streamed implementation that
//! regenerates seed-derived objects on demand. The streamed paths draw all
//! of their large buffers from a [`WorkArena`], whose high-watermark report
//! makes the working-set structure of each operation observable.
//!
//! Both paths produce byte-identical keys and signatures and identical
//! verification decisions.

pub mod codec;
pub mod error;
pub mod hashing;
pub mod kat;
pub mod keygen;
pub mod params;
pub mod ring;
pub mod sampler;
pub mod selftest;
pub mod sign;
pub mod verify;
pub mod workspace;

pub use error::{Error, Result};
pub use keygen::KeyPair;
pub use params::{param_set, Level, ParamSet};
pub use verify::Decision;
pub use workspace::WorkArena;

/// Which implementation of an operation to run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ExecPath {
    /// Buffered implementation; full vectors live simultaneously.
    Reference,
    /// Low-working-set implementation backed by a [`WorkArena`].
    Streamed,
}

impl std::str::FromStr for ExecPath {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "reference" => Ok(ExecPath::Reference),
            "streamed" => Ok(ExecPath::Streamed),
            other => Err(Error::Usage(format!("unknown path `{other}`"))),
        }
    }
}
