//! `xmake.lua`: string arguments of `add_requires(...)`.
//!
//! A requirement string is `"[repo::]name[/version] [range]"`; only the name is kept.

use super::lexer::{tokenize, top_level_strings, Syntax, TokenKind};
use super::DeclSink;

pub(crate) fn parse(content: &str, sink: &mut DeclSink) {
    let tokens = tokenize(content, Syntax::Lua);
    for (i, tok) in tokens.iter().enumerate() {
        if tok.as_ident() != Some("add_requires") {
            continue;
        }
        match tokens.get(i + 1).map(|t| &t.kind) {
            Some(TokenKind::Punct('(')) => {
                for arg in top_level_strings(&tokens, i + 1) {
                    push_requirement(arg.as_str_lit().unwrap_or_default(), arg.line, sink);
                }
            }
            // Lua call sugar: add_requires "zlib"
            Some(TokenKind::Str(s)) => push_requirement(s, tokens[i + 1].line, sink),
            _ => {}
        }
    }
}

fn push_requirement(spec: &str, line: usize, sink: &mut DeclSink) {
    let Some(first) = spec.split_whitespace().next() else {
        return;
    };
    let name = first.rsplit("::").next().unwrap_or(first);
    let name = super::strip_reference_version(name);
    if name.contains(['$', '{']) {
        return;
    }
    sink.push(name, "add_requires", line);
}

#[cfg(test)]
mod tests {
    use crate::manifest::{parse_manifest, PmtKind};

    fn names(src: &str) -> Vec<String> {
        parse_manifest(PmtKind::Xmake, src)
            .names()
            .map(String::from)
            .collect()
    }

    #[test]
    fn strips_versions_and_repo_prefix() {
        let src = r#"add_requires("zlib 1.2.11", "conan::openssl/1.1.1", {optional = true})"#;
        assert_eq!(names(src), vec!["openssl", "zlib"]);
    }

    #[test]
    fn ignores_strings_inside_option_tables() {
        let src = r#"add_requires("fmt", {configs = {header_only = "true"}})"#;
        assert_eq!(names(src), vec!["fmt"]);
    }

    #[test]
    fn lua_comments_are_skipped() {
        let src = "-- add_requires(\"boost\")\nadd_requires \"spdlog\"\n";
        assert_eq!(names(src), vec!["spdlog"]);
    }
}
