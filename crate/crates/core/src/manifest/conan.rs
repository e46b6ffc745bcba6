//! Conan manifests: `conanfile.txt` sections and `conanfile.py` recipes.
//!
//! Recipes are scanned lexically. Any identifier containing `requires` that
//! is assigned to, called, or `.add(...)`-ed contributes its string literals.

use super::lexer::{first_string_arg, matching_close, tokenize, Syntax, Token, TokenKind};
use super::{strip_reference_version, DeclSink};

const TEXT_SECTIONS: &[(&str, &str)] = &[
    ("requires", "requires"),
    ("build_requires", "build_requires"),
    ("tool_requires", "build_requires"),
    ("test_requires", "requires"),
];

pub(crate) fn looks_like_text(content: &str) -> bool {
    content.lines().any(|l| {
        let l = l.trim();
        l.starts_with('[') && l.ends_with(']') && !l.contains(['"', '\''])
    })
}

pub(crate) fn parse_text(content: &str, sink: &mut DeclSink) {
    let mut field: Option<&'static str> = None;
    for (idx, raw_line) in content.lines().enumerate() {
        let line = raw_line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        if line.starts_with('[') && line.ends_with(']') {
            let section = line[1..line.len() - 1].trim().to_ascii_lowercase();
            field = TEXT_SECTIONS
                .iter()
                .find(|(name, _)| *name == section)
                .map(|(_, f)| *f);
            continue;
        }
        if let Some(field) = field {
            push_reference(line, field, idx + 1, sink);
        }
    }
}

pub(crate) fn parse_python(content: &str, sink: &mut DeclSink) {
    let tokens = tokenize(content, Syntax::Python);
    for (i, tok) in tokens.iter().enumerate() {
        let Some(ident) = tok.as_ident() else {
            continue;
        };
        let lower = ident.to_ascii_lowercase();
        // python_requires pulls in recipe code, not a library
        if !lower.contains("requires") || lower == "python_requires" {
            continue;
        }
        let field = field_for(&lower);
        match tokens.get(i + 1).map(|t| &t.kind) {
            Some(TokenKind::Punct('=')) if !tokens.get(i + 2).is_some_and(|t| t.is_punct('=')) => {
                for lit in assigned_strings(&tokens, i + 2) {
                    push_reference(lit.as_str_lit().unwrap_or_default(), field, lit.line, sink);
                }
            }
            Some(TokenKind::Punct('(')) => push_first_arg(&tokens, i + 1, field, sink),
            Some(TokenKind::Punct('.'))
                if tokens.get(i + 2).and_then(Token::as_ident) == Some("add")
                    && tokens.get(i + 3).is_some_and(|t| t.is_punct('(')) =>
            {
                push_first_arg(&tokens, i + 3, field, sink)
            }
            _ => {}
        }
    }
}

fn field_for(ident: &str) -> &'static str {
    if ident.contains("build") || ident.contains("tool") {
        "build_requires"
    } else {
        "requires"
    }
}

fn push_first_arg(tokens: &[Token], open: usize, field: &'static str, sink: &mut DeclSink) {
    if let Some(arg) = first_string_arg(tokens, open) {
        push_reference(arg.as_str_lit().unwrap_or_default(), field, arg.line, sink);
    }
}

/// String literals of the expression starting at `start`, up to the end of
/// the logical line.
fn assigned_strings(tokens: &[Token], start: usize) -> Vec<&Token> {
    let mut out = Vec::new();
    let mut i = start;
    while i < tokens.len() {
        match &tokens[i].kind {
            TokenKind::Newline => break,
            TokenKind::Punct('(') | TokenKind::Punct('[') | TokenKind::Punct('{') => {
                let close = matching_close(tokens, i);
                out.extend(
                    tokens[i..close.min(tokens.len())]
                        .iter()
                        .filter(|t| t.as_str_lit().is_some()),
                );
                i = close + 1;
            }
            TokenKind::Str(_) => {
                out.push(&tokens[i]);
                i += 1;
            }
            _ => i += 1,
        }
    }
    out
}

fn push_reference(reference: &str, field: &'static str, line: usize, sink: &mut DeclSink) {
    let name = strip_reference_version(reference);
    if name.is_empty() || name.contains(['{', '$']) {
        return;
    }
    sink.push(name, field, line);
}
