//! Reversible interpreter for a while-language with blocks, procedures and
//! interleaving parallel composition.
//!
//! Programs run forward while recording reversal data and an identifier
//! trace; the executed program can then be inverted and run to restore the
//! initial state.

pub mod checker;
pub mod engine;
pub mod env;
pub mod error;
pub mod scheduler;
pub mod syntax;
pub mod transform;

pub use error::{Error, Result};

/// Parse `src` and reject it unless it is a valid source program.
pub fn parse_and_validate(src: &str) -> Result<syntax::Program> {
    let p = syntax::parse_program(src)?;
    let diags = syntax::validate::validate(&p);
    if diags.is_empty() {
        Ok(p)
    } else {
        let msgs: Vec<String> = diags.iter().map(ToString::to_string).collect();
        Err(Error::Invalid(msgs.join("; ")))
    }
}
