//! Concrete and abstract syntax of the language.

pub mod ast;
pub mod json;
pub mod lexer;
pub mod parser;
pub mod render;
pub mod validate;
pub mod visit;

pub use ast::*;
pub use parser::parse_program;
pub use render::{render, render_annotated};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("{line}:{col}: {message}")]
pub struct SyntaxError {
    pub line: usize,
    pub col: usize,
    pub message: String,
}
