//! `.gitmodules`: the `url` of every `[submodule "..."]` section.

use super::DeclSink;

pub(crate) fn parse(content: &str, sink: &mut DeclSink) {
    let mut in_submodule = false;
    for (idx, line) in content.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with(['#', ';']) {
            continue;
        }
        if line.starts_with('[') {
            let header = line.trim_start_matches('[');
            in_submodule = header
                .trim_start()
                .to_ascii_lowercase()
                .starts_with("submodule");
            continue;
        }
        if !in_submodule {
            continue;
        }
        let Some((key, value)) = line.split_once('=') else {
            continue;
        };
        if key.trim().eq_ignore_ascii_case("url") {
            let value = value.trim().trim_matches('"').trim();
            sink.push(value, "submodule", idx + 1);
        }
    }
}

#[cfg(test)]
mod tests {
    use crate::manifest::{parse_manifest, PmtKind};

    #[test]
    fn urls_of_each_section() {
        let src = "[submodule \"json\"]\n\tpath = third_party/json\n\turl = https://github.com/nlohmann/json.git\n[core]\n\turl = nope\n[submodule \"fmt\"]\n\tpath = fmt\n\turl = \"git@github.com:fmtlib/fmt.git\"\n";
        let parsed = parse_manifest(PmtKind::Gitsubmodule, src);
        let got: Vec<_> = parsed
            .decls
            .iter()
            .map(|d| (d.raw_name.as_str(), d.line))
            .collect();
        assert_eq!(
            got,
            vec![
                ("git@github.com:fmtlib/fmt.git", 8),
                ("https://github.com/nlohmann/json.git", 3)
            ]
        );
    }
}
