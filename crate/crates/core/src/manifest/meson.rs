//! `meson.build`: the first string argument of every `dependency(...)` call.

use super::lexer::{first_string_arg, tokenize, Syntax};
use super::DeclSink;

pub(crate) fn parse(content: &str, sink: &mut DeclSink) {
    let tokens = tokenize(content, Syntax::Python);
    for (i, tok) in tokens.iter().enumerate() {
        if tok.as_ident() != Some("dependency") {
            continue;
        }
        // `obj.dependency(` is a method on some other object
        if i > 0 && tokens[i - 1].is_punct('.') {
            continue;
        }
        if !tokens.get(i + 1).is_some_and(|t| t.is_punct('(')) {
            continue;
        }
        if let Some(arg) = first_string_arg(&tokens, i + 1) {
            if let Some(name) = arg.as_str_lit() {
                sink.push(name, "dependency", arg.line);
            }
        }
    }
}
