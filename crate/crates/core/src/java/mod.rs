//! Java lexing and error-tolerant parsing of code fragments.

pub mod lexer;
pub mod parser;
pub mod tree;

pub use lexer::{is_keyword, tokenize, Token, TokenKind, KEYWORDS};
pub use parser::{parse_in, parse_snippet};
pub use tree::{Node, NodeId, ParseContext, SyntaxTree, ERROR};
