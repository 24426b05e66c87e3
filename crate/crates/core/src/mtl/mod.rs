//! The transformation language: AST, parser and pretty-printer.

mod ast;
mod parser;
mod printer;

pub use ast::*;
pub use parser::{
    parse_binding, parse_expr, parse_identifier, parse_qualified, parse_transformation, parse_type_expr, ParseError,
};
pub use printer::pretty_print;
