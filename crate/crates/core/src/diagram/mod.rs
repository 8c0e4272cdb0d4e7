//! Terms for string diagrams, the models they are evaluated in, and the
//! textual model format.

pub mod model;
pub mod parse;
pub mod term;

pub use model::{Diagram, Model, ModelError};
pub use parse::{parse, parse_term, ParseErrors, SyntaxError};
pub use term::{evaluate, typecheck, Term, TypeError};
