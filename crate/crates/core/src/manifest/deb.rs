//! `debian/control`: `Build-Depends` and `Depends` of every stanza.
//!
//! Relations are split on `,` and `|`. Version constraints `(...)`,
//! architecture lists `[...]`, build profiles `<...>` and substitution
//! variables `${...}` are dropped.

use super::DeclSink;

pub(crate) fn parse(content: &str, sink: &mut DeclSink) {
    let mut field: Option<&'static str> = None;
    for (idx, line) in content.lines().enumerate() {
        let lineno = idx + 1;
        if line.starts_with('#') {
            continue;
        }
        if line.trim().is_empty() {
            field = None;
            continue;
        }
        let value = if line.starts_with([' ', '\t']) {
            match field {
                Some(_) => line,
                None => continue,
            }
        } else {
            let Some((name, rest)) = line.split_once(':') else {
                field = None;
                continue;
            };
            field = match name.trim().to_ascii_lowercase().as_str() {
                "build-depends" => Some("build-depends"),
                "depends" => Some("depends"),
                _ => None,
            };
            rest
        };
        if let Some(field) = field {
            for name in relation_names(value) {
                sink.push(name, field, lineno);
            }
        }
    }
}

fn relation_names(value: &str) -> Vec<&str> {
    let mut out = Vec::new();
    for relation in value.split([',', '|']) {
        let name = relation
            .trim()
            .split(|c: char| c.is_whitespace() || matches!(c, '(' | '[' | '<'))
            .next()
            .unwrap_or("");
        if name.is_empty() || name.starts_with("${") || name.contains([')', ']', '>']) {
            continue;
        }
        out.push(name);
    }
    out
}
