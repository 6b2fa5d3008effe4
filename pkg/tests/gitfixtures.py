"""Scripted git repositories with pinned identities and timestamps."""
from __future__ import annotations

import os
import subprocess
from pathlib import Path

IDENTITY = {
    "GIT_AUTHOR_NAME": "Ada Dev",
    "GIT_AUTHOR_EMAIL": "ada@example.invalid",
    "GIT_COMMITTER_NAME": "Ada Dev",
    "GIT_COMMITTER_EMAIL": "ada@example.invalid",
}
EPOCH = 1_577_836_800  # 2020-01-01T00:00:00Z


def git(repo: Path, *args: str, when: int | None = None) -> str:
    env = {k: v for k, v in os.environ.items() if not k.startswith("GIT_")}
    env.update(IDENTITY)
    env["GIT_CONFIG_NOSYSTEM"] = "1"
    env["HOME"] = str(repo)
    if when is not None:
        stamp = f"@{when} +0000"
        env["GIT_AUTHOR_DATE"] = stamp
        env["GIT_COMMITTER_DATE"] = stamp
    out = subprocess.run(["git", *args], cwd=repo, env=env, check=True, capture_output=True)
    return out.stdout.decode()


class Repo:
    def __init__(self, path: Path) -> None:
        self.path = path
        path.mkdir(parents=True, exist_ok=True)
        git(path, "init", "--quiet", "--initial-branch=main")

    def write(self, rel: str, text: str | bytes) -> None:
        p = self.path / rel
        p.parent.mkdir(parents=True, exist_ok=True)
        if isinstance(text, bytes):
            p.write_bytes(text)
        else:
            p.write_text(text, encoding="utf-8")

    def delete(self, rel: str) -> None:
        (self.path / rel).unlink()

    def commit(self, message: str, when: int) -> str:
        git(self.path, "add", "--all")
        git(self.path, "commit", "--quiet", "--allow-empty", "-m", message, when=when)
        return git(self.path, "rev-parse", "HEAD").strip()

    def branch(self, name: str) -> None:
        git(self.path, "checkout", "--quiet", "-b", name)

    def checkout(self, name: str) -> None:
        git(self.path, "checkout", "--quiet", name)

    def merge(self, name: str, when: int) -> str:
        git(self.path, "merge", "--quiet", "--no-ff", "-m", f"merge {name}", name, when=when)
        return git(self.path, "rev-parse", "HEAD").strip()


A_V1 = """package org.acme;

@Deprecated
public class A {
    @Override
    public String toString() { return "A"; }
}
"""

A_V2 = """package org.acme;

import java.util.List;

@Deprecated
public class A {
    @SuppressWarnings("unchecked")
    private List<String> names;

    @Override
    public String toString() { return "A" + names; }
}
"""

# the class-level @Deprecated is gone at head
A_V3 = """package org.acme;

import java.util.List;

public class A {
    @SuppressWarnings("unchecked")
    private List<String> names;

    @Override
    public String toString() { return "A" + names; }
}
"""

B_V1 = """package org.acme;

public class B {
    @Test
    public void first() { assert 1 + 1 == 2; }

    @Test
    public void second() {
        for (int i = 0; i < 3; i++) { System.out.println(i); }
    }
}
"""

OLD = """package org.beta;

@Deprecated
public class Old {
    @Override public int hashCode() { return 7; }
}
"""

NEW = """package org.beta;

/* @NotCounted lives in a comment */
public class New {
    // @AlsoIgnored
    private String at = "@InsideString";

    @Override
    public boolean equals(Object o) { return o == this; }
}
"""

UTIL_V1 = """package org.gamma;

public final class Util {
    private Util() {}
    static int twice(int x) { return 2 * x; }
}
"""

UTIL_V2 = """package org.gamma;

public final class Util {
    private Util() {}
    static int twice(int x) { return 2 * x; }

    @Override
    public String toString() { return "util"; }
}
"""

FEATURE = """package org.gamma;

@FunctionalInterface
public interface Feature {
    void apply(@Nullable String input);
}
"""


def make_alpha(root: Path) -> Repo:
    r = Repo(root / "acme" / "alpha")
    r.write("src/org/acme/A.java", A_V1)
    r.write("README.md", "# alpha\n")
    r.commit("initial", EPOCH + 100)
    r.write("src/org/acme/A.java", A_V2)
    r.write("src/org/acme/B.java", B_V1)
    r.commit("add B and a field", EPOCH + 200)
    r.write("src/org/acme/A.java", A_V3)
    r.delete("README.md")
    r.commit("undeprecate A", EPOCH + 300)
    return r


def make_beta(root: Path) -> Repo:
    r = Repo(root / "acme" / "beta")
    r.write("src/Old.java", OLD)
    r.commit("old", EPOCH + 150)
    r.delete("src/Old.java")
    r.write("src/New.java", NEW)
    r.commit("replace", EPOCH + 250)
    return r


def make_gamma(root: Path) -> Repo:
    r = Repo(root / "zeta" / "gamma")
    r.write("src/Util.java", UTIL_V1)
    r.write("notes.txt", "notes\n")
    r.commit("util", EPOCH + 110)
    r.branch("feature")
    r.write("src/Feature.java", FEATURE)
    r.commit("feature", EPOCH + 210)
    r.checkout("main")
    r.write("src/Util.java", UTIL_V2)
    r.commit("util toString", EPOCH + 310)
    r.merge("feature", EPOCH + 410)
    return r


def make_fixture_repos(root: Path) -> list[Repo]:
    return [make_alpha(root), make_beta(root), make_gamma(root)]
