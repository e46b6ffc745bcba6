//! `*.pc`: tokens of the `Requires:` line, without version constraints.

use super::DeclSink;

pub(crate) fn parse(content: &str, sink: &mut DeclSink) {
    for (idx, line) in content.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("");
        let Some((key, value)) = line.split_once(':') else {
            continue;
        };
        if key.trim() != "Requires" {
            continue;
        }
        for name in requirement_names(value) {
            sink.push(name, "requires", idx + 1);
        }
    }
}

fn is_operator(c: char) -> bool {
    matches!(c, '<' | '>' | '=' | '!')
}

fn is_separator(c: char) -> bool {
    c.is_whitespace() || c == ','
}

/// `glib-2.0 >= 2.50, gio-2.0` yields `glib-2.0` and `gio-2.0`.
fn requirement_names(value: &str) -> Vec<&str> {
    let bytes: Vec<(usize, char)> = value.char_indices().collect();
    let mut out = Vec::new();
    let mut i = 0;
    let end_of = |i: usize| bytes.get(i).map_or(value.len(), |&(pos, _)| pos);
    while i < bytes.len() {
        while i < bytes.len() && is_separator(bytes[i].1) {
            i += 1;
        }
        let start = i;
        while i < bytes.len() && !is_separator(bytes[i].1) && !is_operator(bytes[i].1) {
            i += 1;
        }
        let name = &value[end_of(start)..end_of(i)];
        if !name.is_empty() && !name.contains('$') {
            out.push(name);
        }
        let mut j = i;
        while j < bytes.len() && bytes[j].1.is_whitespace() {
            j += 1;
        }
        if j < bytes.len() && is_operator(bytes[j].1) {
            while j < bytes.len() && is_operator(bytes[j].1) {
                j += 1;
            }
            while j < bytes.len() && bytes[j].1.is_whitespace() {
                j += 1;
            }
            while j < bytes.len() && !is_separator(bytes[j].1) {
                j += 1;
            }
            i = j;
        } else if start == i {
            i += 1;
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use crate::manifest::{parse_manifest, PmtKind};

    fn names(src: &str) -> Vec<String> {
        parse_manifest(PmtKind::Pkgconfig, src)
            .names()
            .map(String::from)
            .collect()
    }

    #[test]
    fn whitespace_separated_requires() {
        assert_eq!(
            names("Requires: actionlib_msgs std_msgs trajectory_msgs"),
            vec!["actionlib_msgs", "std_msgs", "trajectory_msgs"]
        );
    }

    #[test]
    fn version_constraints_are_dropped() {
        assert_eq!(
            names("Requires: glib-2.0 >= 2.50, gobject-2.0,gio-2.0>=2.1 x11"),
            vec!["gio-2.0", "glib-2.0", "gobject-2.0", "x11"]
        );
    }

    #[test]
    fn only_the_requires_field_counts() {
        let src = "prefix=/usr\nName: foo\nRequires.private: zlib\nLibs: -lfoo\n# Requires: nope\n";
        assert!(names(src).is_empty());
    }
}
