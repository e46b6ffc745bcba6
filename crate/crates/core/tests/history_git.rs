use std::path::Path;

use migmine_core::history::{commit_deltas, scan_repo};
use migmine_core::testkit::build_corpus;
use migmine_core::{Error, PmtKind};

const QT_REPO: &str = r#"
[[repo]]
name = "qt"

[[repo.commit]]
date = "2016-01-01T00:00:00Z"
message = "Only code"
[repo.commit.files]
"src/a.cpp" = "int a;"

[[repo.commit]]
date = "2016-02-01T00:00:00Z"
message = "Add vcpkg manifest"
[repo.commit.files]
"vcpkg.json" = '{"name": "qt", "dependencies": ["qt5-base"]}'

[[repo.commit]]
date = "2016-03-01T00:00:00Z"
message = "Qt 6"
[repo.commit.files]
"vcpkg.json" = '{"name": "qt", "dependencies": ["qtbase", "qtsvg", {"name": "qttools"}]}'
"src/a.cpp" = "int b;"

[[repo.commit]]
date = "2016-04-01T00:00:00Z"
message = "Move manifest"
delete = ["vcpkg.json"]
[repo.commit.files]
"ports/vcpkg.json" = '{"name": "qt", "dependencies": ["qtbase", "qtsvg", {"name": "qttools"}]}'
"#;

fn build(dir: &Path) -> std::path::PathBuf {
    build_corpus(QT_REPO, dir).unwrap();
    dir.join("qt")
}

#[test]
fn scans_manifest_history() {
    let tmp = tempfile::tempdir().unwrap();
    let repo = build(tmp.path());
    let scan = scan_repo(&repo).unwrap();
    assert_eq!(scan.project, "qt");
    assert!(scan.diagnostics.is_empty());
    assert!(scan.changes.iter().all(|c| c.pmt == PmtKind::Vcpkg));
    let messages: Vec<&str> = scan
        .changes
        .iter()
        .map(|c| c.commit.message.as_str())
        .collect();
    assert_eq!(messages.first(), Some(&"Add vcpkg manifest"));
    assert!(scan.changes[0].before.is_none());

    let deltas = commit_deltas(&scan.changes);
    assert_eq!(deltas.len(), 3);
    let added: Vec<&str> = deltas[0].added.iter().map(|n| n.as_str()).collect();
    assert_eq!(added, vec!["qt5-base"]);
    assert!(deltas[0].removed.is_empty());
    assert_eq!(deltas[1].removed.len(), 1);
    assert_eq!(deltas[1].added.len(), 3);
    // the manifest moved: nothing added or removed
    assert!(deltas[2].added.is_empty() && deltas[2].removed.is_empty());
}

#[test]
fn commit_ids_are_reproducible() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let ids = |dir: &Path| {
        let scan = scan_repo(&build(dir)).unwrap();
        scan.changes
            .into_iter()
            .map(|c| c.commit.commit_id)
            .collect::<Vec<_>>()
    };
    assert_eq!(ids(a.path()), ids(b.path()));
}

#[test]
fn empty_repository_has_no_changes() {
    let tmp = tempfile::tempdir().unwrap();
    build_corpus("[[repo]]\nname = \"empty\"\n", tmp.path()).unwrap();
    let scan = scan_repo(&tmp.path().join("empty")).unwrap();
    assert!(scan.changes.is_empty());
}

#[test]
fn plain_directory_is_unreadable() {
    let tmp = tempfile::tempdir().unwrap();
    let err = scan_repo(tmp.path()).unwrap_err();
    assert!(matches!(err, Error::RepoUnreadable { .. }), "{err}");
}
