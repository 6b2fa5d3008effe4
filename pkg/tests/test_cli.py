import json

import pytest

from conftest import ANNOTATION_QUERY, api_record
from miner.cli import main

ORACLE = "o[acme/alpha] = 4\no[acme/beta] = 1\no[zeta/gamma] = 3\n"


@pytest.fixture(autouse=True)
def _no_token(monkeypatch):
    monkeypatch.delenv("GITHUB_TOKEN", raising=False)


@pytest.fixture
def query_file(tmp_path):
    path = tmp_path / "q.boa"
    path.write_text(ANNOTATION_QUERY, encoding="utf-8")
    return path


def test_no_arguments_is_a_usage_error(capsys):
    assert main([]) == 1
    assert "usage:" in capsys.readouterr().err


@pytest.mark.parametrize("argv", [["--help"], ["run", "--help"], ["csv", "--help"], ["fetch-metadata", "--help"]])
def test_help_exits_zero(argv, capsys):
    assert main(argv) == 0
    assert "usage:" in capsys.readouterr().out


@pytest.mark.parametrize("argv", [["frobnicate"], ["run"], ["info", "d", "--bogus"], ["run", "q", "--dataset", "d",
                                                                                       "--workers", "0"]])
def test_bad_invocations_exit_one(argv, capsys):
    assert main(argv) == 1
    assert "usage:" in capsys.readouterr().err


def test_fetch_metadata_without_names_is_a_usage_error(tmp_path, capsys):
    assert main(["fetch-metadata", "--out", str(tmp_path)]) == 1


def test_run_on_missing_dataset_names_manifest(tmp_path, query_file, capsys):
    assert main(["run", str(query_file), "--dataset", str(tmp_path / "missing")]) == 2
    assert "manifest.json" in capsys.readouterr().err


def test_run_missing_query_file(tmp_path, fixture_dataset, capsys):
    assert main(["run", str(tmp_path / "nope.boa"), "--dataset", str(fixture_dataset)]) == 2


def test_run_writes_oracle_counts(tmp_path, query_file, fixture_dataset):
    out = tmp_path / "results.txt"
    code = main(["run", str(query_file), "--dataset", str(fixture_dataset), "--workers", "4", "--out", str(out)])
    assert code == 0
    assert out.read_text(encoding="utf-8") == ORACLE
    assert (tmp_path / "results.txt.errors").read_text(encoding="utf-8") == ""


def test_run_to_stdout(query_file, fixture_dataset, capsys):
    assert main(["run", str(query_file), "--dataset", str(fixture_dataset), "--workers", "1"]) == 0
    assert capsys.readouterr().out == ORACLE


def test_run_reports_query_errors_with_position(tmp_path, fixture_dataset, capsys):
    q = tmp_path / "bad.boa"
    q.write_text("o: output sum of int;\no << \"x\";\n", encoding="utf-8")
    assert main(["run", str(q), "--dataset", str(fixture_dataset)]) == 2
    assert f"{q}:2:" in capsys.readouterr().err


def test_run_partial_failure(tmp_path, fixture_dataset, capsys):
    q = tmp_path / "div.boa"
    q.write_text("o: output sum[p: string] of int;\no[input.id] << 10 / (input.stars - 7);\n", encoding="utf-8")
    out, errs = tmp_path / "r.txt", tmp_path / "r.err"
    code = main(["run", str(q), "--dataset", str(fixture_dataset), "--out", str(out), "--errors", str(errs)])
    assert code == 3
    # beta has 7 stars; division truncates, so gamma gets 10 / -7 = -1
    assert out.read_text(encoding="utf-8") == "o[acme/alpha] = 0\no[zeta/gamma] = -1\n"
    assert errs.read_text(encoding="utf-8") == "acme/beta\t2:16\tdivision by zero\n"
    assert "1 project(s) failed" in capsys.readouterr().err


def test_run_identical_across_workers(tmp_path, query_file, fixture_dataset):
    texts = set()
    for w in ("1", "2", "8"):
        out = tmp_path / f"r{w}.txt"
        assert main(["run", str(query_file), "--dataset", str(fixture_dataset), "--workers", w, "--out", str(out)]) == 0
        texts.add(out.read_bytes())
    assert len(texts) == 1


def test_csv_subcommand(tmp_path, capsys):
    result = tmp_path / "r.txt"
    result.write_text("o[p1] = 3\n", encoding="utf-8")
    assert main(["csv", str(result), "--header"]) == 0
    assert capsys.readouterr().out == "output,key1,value\r\no,p1,3\r\n"
    out = tmp_path / "r.csv"
    assert main(["csv", str(result), "--out", str(out)]) == 0
    assert out.read_bytes() == b"o,p1,3\r\n"


def test_csv_malformed_names_line(tmp_path, capsys):
    result = tmp_path / "r.txt"
    result.write_text("o[] = 1\ngarbage\n", encoding="utf-8")
    assert main(["csv", str(result)]) == 2
    assert "line 2" in capsys.readouterr().err
    assert main(["csv", str(tmp_path / "absent.txt")]) == 2


def test_info_and_validate(fixture_dataset, capsys):
    assert main(["info", str(fixture_dataset)]) == 0
    out = capsys.readouterr().out
    assert "name: fixture\n" in out and "projects: 3\n" in out and "revisions: 9\n" in out
    assert main(["validate", str(fixture_dataset)]) == 0
    assert "0 issue(s)" in capsys.readouterr().err


def test_validate_reports_issues(tmp_path, fixture_dataset, capsys):
    broken = tmp_path / "broken"
    broken.mkdir()
    for name in ("projects.jsonl", "asts.jsonl"):
        (broken / name).write_bytes((fixture_dataset / name).read_bytes())
    manifest = json.loads((fixture_dataset / "manifest.json").read_text(encoding="utf-8"))
    manifest["project_count"] += 1
    (broken / "manifest.json").write_text(json.dumps(manifest), encoding="utf-8")
    assert main(["validate", str(broken)]) == 2
    captured = capsys.readouterr()
    assert captured.out.strip() and "1 issue(s)" in captured.err


def test_clone_and_build(tmp_path, fixture_repos, fixture_metadata, capsys):
    repos = tmp_path / "repos.txt"
    repos.write_text("# local fixtures\n" + "".join(f"{r.path}\n" for r in fixture_repos), encoding="utf-8")
    clones = tmp_path / "clones"
    assert main(["clone", "--repos", str(repos), "--dest", str(clones), "--jobs", "2"]) == 0
    assert sorted(p.name for p in clones.iterdir()) == ["acme__alpha", "acme__beta", "zeta__gamma"]
    out = tmp_path / "ds"
    code = main(["build", "--src", str(clones), "--metadata", str(fixture_metadata), "--out", str(out),
                 "--name", "fixture", "--jobs", "2"])
    assert code == 0
    captured = capsys.readouterr()
    assert "extracted 3/3" in captured.err and captured.out.count("\n") == 1
    assert main(["validate", str(out)]) == 0


def test_clone_partial_failure(tmp_path, capsys):
    repos = tmp_path / "repos.txt"
    repos.write_text(f"{tmp_path / 'nothing' / 'here'}\n", encoding="utf-8")
    assert main(["clone", "--repos", str(repos), "--dest", str(tmp_path / "c")]) == 3
    assert "cloned 0/1" in capsys.readouterr().err


def test_build_refuses_nonempty_output(tmp_path, fixture_clones, capsys):
    (tmp_path / "out").mkdir()
    (tmp_path / "out" / "x").write_text("", encoding="utf-8")
    assert main(["build", "--src", str(fixture_clones), "--out", str(tmp_path / "out"), "--name", "n"]) == 2


def test_fetch_metadata_writes_star_counts(tmp_path, github_server, capsys):
    github_server.repos["acme/alpha"] = api_record("acme/alpha", stargazers_count=42)
    github_server.repos["acme/beta"] = api_record("acme/beta", stargazers_count=7)
    out = tmp_path / "meta"
    assert main(["fetch-metadata", "acme/alpha", "acme/beta", "--out", str(out), "--api-base", github_server.url]) == 0
    stars = {
        p.name: json.loads(p.read_text(encoding="utf-8"))["stargazers_count"] for p in sorted(out.iterdir())
    }
    assert stars == {"acme__alpha.json": 42, "acme__beta.json": 7}
    assert "written=2" in capsys.readouterr().err


def test_fetch_metadata_partial_failure(tmp_path, github_server, capsys):
    github_server.repos["acme/alpha"] = api_record("acme/alpha")
    names = tmp_path / "names.txt"
    names.write_text("acme/alpha\nacme/gone\n", encoding="utf-8")
    code = main(["fetch-metadata", "--repos", str(names), "--out", str(tmp_path / "m"), "--api-base",
                 github_server.url])
    assert code == 3
    assert "acme/gone: not found (404)" in capsys.readouterr().err


def test_fetch_metadata_rate_limit_exits_four(tmp_path, github_server, capsys):
    github_server.rate_limited = True
    code = main(["fetch-metadata", "acme/alpha", "--out", str(tmp_path / "m"), "--api-base", github_server.url])
    assert code == 4
    err = capsys.readouterr().err
    assert str(github_server.reset_time) in err and "2023-11-14T22:13:20" in err


def test_search_writes_metadata(tmp_path, github_server, capsys):
    github_server.search_items = [api_record("a/x", stargazers_count=9), api_record("b/y", stargazers_count=3)]
    out = tmp_path / "found"
    code = main(["search", "--query", "x", "--min-stars", "5", "--api-base", github_server.url, "--out", str(out)])
    assert code == 0
    assert capsys.readouterr().out == "a/x\t9\n"
    assert [p.name for p in out.iterdir()] == ["a__x.json"]


def test_search_network_error_exits_four(tmp_path, capsys):
    code = main(["search", "--query", "x", "--api-base", "http://127.0.0.1:9", "--out", str(tmp_path / "o")])
    assert code == 4
