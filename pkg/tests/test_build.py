import pytest

from gitfixtures import EPOCH, Repo
from miner.dataset import read_dataset, validate_dataset
from miner.errors import InputError
from miner.ingest import build as build_mod
from miner.ingest.build import build_dataset, project_id_for
from miner.ingest.git import clone_repositories
from miner.schema import ChangeKind, FileKind

DATASET_FILES = ("manifest.json", "projects.jsonl", "asts.jsonl")


def java_hashes(ds):
    return {
        f.blob_hash
        for p in ds for r in p.repository.revisions for f in r.files
        if f.file_kind is FileKind.SOURCE_JAVA and f.change_kind is not ChangeKind.DELETED
    }


def test_project_ids_from_directory_names():
    assert project_id_for("acme__alpha") == "acme/alpha"
    assert project_id_for("acme__alpha.git") == "acme/alpha"
    assert project_id_for("plain") == "plain"


def test_empty_clones_root(tmp_path):
    (tmp_path / "clones").mkdir()
    report = build_dataset(tmp_path / "clones", None, tmp_path / "out", "empty")
    assert report.projects == 0 and report.manifest.project_count == 0
    assert validate_dataset(tmp_path / "out").ok


def test_missing_clones_root(tmp_path):
    with pytest.raises(InputError):
        build_dataset(tmp_path / "nope", None, tmp_path / "out", "x")


def test_fixture_build(fixture_dataset):
    ds = read_dataset(fixture_dataset)
    assert [p.id for p in ds] == ["acme/alpha", "acme/beta", "zeta/gamma"]
    assert validate_dataset(fixture_dataset).issues == []
    alpha = ds.project_by_id("acme/alpha")
    assert (alpha.stars, alpha.metadata["language"]) == (42, "Java")
    assert alpha.url == "https://github.com/acme/alpha"
    gamma = ds.project_by_id("zeta/gamma")
    assert "language" not in gamma.metadata
    assert [len(p.repository.revisions) for p in ds] == [3, 2, 4]
    # every distinct Java blob has its tree stored
    assert all(ds.ast(h) is not None for h in java_hashes(ds))


def test_build_is_independent_of_jobs(tmp_path, fixture_clones, fixture_metadata):
    build_dataset(fixture_clones, fixture_metadata, tmp_path / "a", "fixture", jobs=1)
    build_dataset(fixture_clones, fixture_metadata, tmp_path / "b", "fixture", jobs=8)
    for name in DATASET_FILES:
        assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()


def test_each_distinct_blob_parsed_once(tmp_path, monkeypatch):
    src = "class Shared { @Deprecated void m() {} }\n"
    for owner in ("x", "y"):
        r = Repo(tmp_path / "work" / owner / "repo")
        r.write("Shared.java", src)
        r.commit("one", EPOCH)
        r.write("Other.java", f"class Other{owner} {{}}\n")
        r.commit("two", EPOCH + 1)
        r.write("Shared.java", src + "\n")
        r.commit("three", EPOCH + 2)
    clone_repositories([str(tmp_path / "work" / o / "repo") for o in ("x", "y")], tmp_path / "clones")

    calls = []
    real = build_mod.parse_source
    monkeypatch.setattr(build_mod, "parse_source", lambda data: calls.append(data) or real(data))
    report = build_dataset(tmp_path / "clones", None, tmp_path / "out", "shared", jobs=1)
    ds = read_dataset(tmp_path / "out")
    distinct = java_hashes(ds)
    # Shared.java twice (identical across repos) plus one Other per repo
    assert len(distinct) == 4
    assert len(calls) == report.parsed == len(distinct)
    assert report.distinct_asts == 4


def test_parse_failure_marks_file(tmp_path):
    r = Repo(tmp_path / "work" / "o" / "broken")
    r.write("Bad.java", "class Bad {\n")
    r.write("Good.java", "class Good {}\n")
    r.commit("c", EPOCH)
    clone_repositories([str(r.path)], tmp_path / "clones")
    report = build_dataset(tmp_path / "clones", None, tmp_path / "out", "broken")
    assert report.parse_failures == 1
    ds = read_dataset(tmp_path / "out")
    bad, good = ds.project_by_id("o/broken").repository.revisions[0].files
    assert bad.parse_error and not good.parse_error
    assert ds.ast(bad.blob_hash) is None and ds.ast(good.blob_hash) is not None
    assert validate_dataset(tmp_path / "out").issues == []


def test_non_repository_directory_is_skipped(tmp_path):
    r = Repo(tmp_path / "work" / "o" / "ok")
    r.write("A.java", "class A {}\n")
    r.commit("c", EPOCH)
    clone_repositories([str(r.path)], tmp_path / "clones")
    (tmp_path / "clones" / "junk__dir").mkdir()
    report = build_dataset(tmp_path / "clones", None, tmp_path / "out", "mixed")
    assert report.projects == 1
    assert [name for name, _ in report.skipped] == ["junk__dir"]


def test_progress_callback(tmp_path, fixture_clones):
    seen = []
    build_dataset(fixture_clones, None, tmp_path / "out", "p", progress=lambda d, t: seen.append((d, t)))
    assert seen == [(3, 3)]


def test_refuses_nonempty_output(tmp_path, fixture_clones):
    (tmp_path / "out").mkdir()
    (tmp_path / "out" / "keep").write_text("x")
    with pytest.raises(InputError):
        build_dataset(fixture_clones, None, tmp_path / "out", "x")
