pub mod density;
pub mod diagram;
pub mod error;
pub mod exactnf;
pub mod inference;
pub mod kernel;
pub mod laws;
pub mod maybecat;
pub mod object;
pub mod random;

pub use error::{Error, Result};
pub use kernel::{SubKernel, Tolerances};
pub use object::{Atom, FinObject, Label};
