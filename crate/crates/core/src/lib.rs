pub mod cli;
pub mod decide;
pub mod error;
pub mod exact_algebra;
pub mod formulas;
pub mod function_fields;
pub mod io;
pub mod measure;
pub mod padic;
pub mod structures;
pub mod par;
pub mod trees;
pub mod valued;

pub use error::{Error, Result};
