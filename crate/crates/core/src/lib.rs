pub mod coarse;
pub mod decomposition;
pub mod elliptic;
pub mod error;
pub mod harness;
pub mod mesh;
pub mod numerics;
pub mod pcg;
pub mod pou;
pub mod pwls;
pub mod scalar;
pub mod schwarz;
pub mod system;

pub use error::{Error, Result};
pub use scalar::Scalar;
