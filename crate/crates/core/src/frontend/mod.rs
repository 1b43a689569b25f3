//! Lexing, parsing, typechecking, printing and concrete evaluation of mini-C.

pub mod ast;
pub mod interp;
pub mod lexer;
pub mod loc;
pub mod parser;
pub mod printer;
pub mod semantics;
pub mod typecheck;

pub use ast::*;
pub use interp::{evaluate_concrete, EvalError, Outcome, Program, RuntimeError, DEFAULT_FUEL};
pub use loc::{count_loc, LineCounts};
pub use parser::{parse, parse_bytes};
pub use printer::{pretty_print, print_expr, print_function, render};
pub use typecheck::{has_errors, typecheck};

/// Parses and typechecks, returning every error diagnostic on failure.
pub fn parse_checked(source_name: &str, src: &str) -> Result<SourceUnit, Vec<Diagnostic>> {
    let unit = parse(source_name, src)?;
    let diags = typecheck(&unit);
    if has_errors(&diags) {
        return Err(diags.into_iter().filter(Diagnostic::is_error).collect());
    }
    Ok(unit)
}
