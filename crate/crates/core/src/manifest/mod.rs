//! Detection and parsing of the seven supported dependency-manifest formats.
//!
//! Every parser is purely lexical: no manifest is ever evaluated, and the
//! output depends only on the format and the text handed in.

mod conan;
mod deb;
mod gitmodules;
mod lexer;
mod meson;
mod pkgconfig;
mod vcpkg;
mod xmake;

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

/// A package-management tool whose manifests we understand.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PmtKind {
    Meson,
    Xmake,
    Deb,
    Conan,
    Vcpkg,
    Pkgconfig,
    Gitsubmodule,
}

impl PmtKind {
    pub const ALL: [PmtKind; 7] = [
        PmtKind::Meson,
        PmtKind::Xmake,
        PmtKind::Deb,
        PmtKind::Conan,
        PmtKind::Vcpkg,
        PmtKind::Pkgconfig,
        PmtKind::Gitsubmodule,
    ];

    /// Row order used by the dataset statistics table.
    pub const REPORT_ORDER: [PmtKind; 7] = [
        PmtKind::Conan,
        PmtKind::Vcpkg,
        PmtKind::Meson,
        PmtKind::Xmake,
        PmtKind::Pkgconfig,
        PmtKind::Gitsubmodule,
        PmtKind::Deb,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            PmtKind::Meson => "meson",
            PmtKind::Xmake => "xmake",
            PmtKind::Deb => "deb",
            PmtKind::Conan => "conan",
            PmtKind::Vcpkg => "vcpkg",
            PmtKind::Pkgconfig => "pkgconfig",
            PmtKind::Gitsubmodule => "gitsubmodule",
        }
    }

    /// Manifest fields that can carry a dependency declaration for this tool.
    pub fn dependency_fields(self) -> &'static [&'static str] {
        match self {
            PmtKind::Meson => &["dependency"],
            PmtKind::Xmake => &["add_requires"],
            PmtKind::Deb => &["build-depends", "depends"],
            PmtKind::Conan => &["build_requires", "requires"],
            PmtKind::Vcpkg => &["dependencies"],
            PmtKind::Pkgconfig => &["requires"],
            PmtKind::Gitsubmodule => &["submodule"],
        }
    }
}

impl fmt::Display for PmtKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for PmtKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        PmtKind::ALL
            .into_iter()
            .find(|k| k.as_str() == s.trim().to_ascii_lowercase())
            .ok_or_else(|| format!("unknown package-management tool {s:?}"))
    }
}

/// One dependency as declared in a manifest.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct DependencyDecl {
    pub raw_name: String,
    pub pmt: PmtKind,
    pub field: String,
    /// 1-based source line.
    pub line: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ParsedManifest {
    pub pmt: PmtKind,
    /// Sorted by `raw_name`, one entry per name.
    pub decls: Vec<DependencyDecl>,
    /// Set when the content could not be parsed structurally; `decls` is then empty.
    pub diagnostic: Option<String>,
}

impl ParsedManifest {
    pub fn empty(pmt: PmtKind) -> Self {
        ParsedManifest {
            pmt,
            decls: Vec::new(),
            diagnostic: None,
        }
    }

    pub fn is_empty(&self) -> bool {
        self.decls.is_empty()
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.decls.iter().map(|d| d.raw_name.as_str())
    }
}

/// Collects declarations while parsing; collapses duplicates onto the
/// earliest line.
pub(crate) struct DeclSink {
    pmt: PmtKind,
    decls: BTreeMap<String, DependencyDecl>,
}

impl DeclSink {
    pub(crate) fn new(pmt: PmtKind) -> Self {
        DeclSink {
            pmt,
            decls: BTreeMap::new(),
        }
    }

    pub(crate) fn push(&mut self, raw_name: &str, field: &'static str, line: usize) {
        let name = raw_name.trim();
        if name.is_empty() || name.chars().any(char::is_whitespace) {
            return;
        }
        debug_assert!(self.pmt.dependency_fields().contains(&field));
        let decl = DependencyDecl {
            raw_name: name.to_string(),
            pmt: self.pmt,
            field: field.to_string(),
            line: line.max(1),
        };
        match self.decls.get(name) {
            Some(existing) if existing.line <= decl.line => {}
            _ => {
                self.decls.insert(name.to_string(), decl);
            }
        }
    }

    pub(crate) fn finish(self) -> ParsedManifest {
        ParsedManifest {
            pmt: self.pmt,
            decls: self.decls.into_values().collect(),
            diagnostic: None,
        }
    }
}

/// Maps a repository-relative path to the tool whose manifest it is.
pub fn detect_manifest(relative_path: &str) -> Option<PmtKind> {
    let path = relative_path.replace('\\', "/");
    let path = path.trim_start_matches("./");
    let basename = path.rsplit('/').next().unwrap_or(path);
    match basename {
        "meson.build" => Some(PmtKind::Meson),
        "xmake.lua" => Some(PmtKind::Xmake),
        "conanfile.txt" | "conanfile.py" => Some(PmtKind::Conan),
        "vcpkg.json" => Some(PmtKind::Vcpkg),
        ".gitmodules" => Some(PmtKind::Gitsubmodule),
        "control" if path == "debian/control" || path.ends_with("/debian/control") => {
            Some(PmtKind::Deb)
        }
        b if b.len() > 3 && b.ends_with(".pc") => Some(PmtKind::Pkgconfig),
        _ => None,
    }
}

/// Conan needs the file name to tell the text and Python forms apart.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ConanFlavor {
    Text,
    Python,
}

/// Parses manifest text of the given kind.
///
/// Conan content is sniffed: text manifests are recognised by their
/// `[section]` headers, anything else is treated as a Python recipe. Use
/// [`parse_manifest_at`] when the file name is known.
pub fn parse_manifest(kind: PmtKind, content: &str) -> ParsedManifest {
    let flavor = if kind == PmtKind::Conan && !conan::looks_like_text(content) {
        ConanFlavor::Python
    } else {
        ConanFlavor::Text
    };
    parse_with(kind, flavor, content)
}

/// Parses manifest text, using `relative_path` to pick the conan flavour.
pub fn parse_manifest_at(kind: PmtKind, relative_path: &str, content: &str) -> ParsedManifest {
    if kind == PmtKind::Conan {
        let flavor = if relative_path.ends_with(".py") {
            ConanFlavor::Python
        } else {
            ConanFlavor::Text
        };
        return parse_with(kind, flavor, content);
    }
    parse_manifest(kind, content)
}

/// Decodes raw blob bytes the way every parser expects them.
pub fn decode(bytes: &[u8]) -> String {
    String::from_utf8_lossy(bytes).into_owned()
}

fn parse_with(kind: PmtKind, flavor: ConanFlavor, content: &str) -> ParsedManifest {
    if content.trim().is_empty() {
        return ParsedManifest::empty(kind);
    }
    let mut sink = DeclSink::new(kind);
    let outcome = match kind {
        PmtKind::Meson => {
            meson::parse(content, &mut sink);
            Ok(())
        }
        PmtKind::Xmake => {
            xmake::parse(content, &mut sink);
            Ok(())
        }
        PmtKind::Deb => {
            deb::parse(content, &mut sink);
            Ok(())
        }
        PmtKind::Conan => {
            match flavor {
                ConanFlavor::Text => conan::parse_text(content, &mut sink),
                ConanFlavor::Python => conan::parse_python(content, &mut sink),
            }
            Ok(())
        }
        PmtKind::Vcpkg => vcpkg::parse(content, &mut sink),
        PmtKind::Pkgconfig => {
            pkgconfig::parse(content, &mut sink);
            Ok(())
        }
        PmtKind::Gitsubmodule => {
            gitmodules::parse(content, &mut sink);
            Ok(())
        }
    };
    match outcome {
        Ok(()) => sink.finish(),
        Err(reason) => {
            log::debug!("malformed {kind} manifest: {reason}");
            ParsedManifest {
                pmt: kind,
                decls: Vec::new(),
                diagnostic: Some(reason),
            }
        }
    }
}

/// Version pins written as `name/version` (conan references).
pub(crate) fn strip_reference_version(reference: &str) -> &str {
    reference.split('/').next().unwrap_or(reference).trim()
}
