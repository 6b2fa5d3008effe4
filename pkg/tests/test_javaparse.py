import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from miner.ingest.javaparse import ParseFailure, parse_source
from miner.schema import DeclarationKind, ExpressionKind, ModifierKind, StatementKind
from oracles import count_annotations


def annotations(root):
    out = []

    def mods(ms):
        out.extend(m.annotation_name for m in ms if m.kind is ModifierKind.ANNOTATION)

    def decl(d):
        mods(d.modifiers)
        for f in d.fields:
            mods(f.modifiers)
        for m in d.methods:
            mods(m.modifiers)
            for p in m.params:
                mods(p.modifiers)
        for n in d.nested:
            decl(n)

    for d in root.namespace.declarations:
        decl(d)
    return out


def test_empty_source():
    ns = parse_source(b"").namespace
    assert (ns.name, ns.imports, ns.declarations) == ("", [], [])


def test_annotation_then_visibility_in_source_order():
    root = parse_source(b"class C { @Override public void m() {} }")
    (c,) = root.namespace.declarations
    assert (c.name, c.kind) == ("C", DeclarationKind.CLASS)
    (m,) = c.methods
    assert m.name == "m"
    assert [(x.kind, x.annotation_name, x.visibility) for x in m.modifiers] == [
        (ModifierKind.ANNOTATION, "Override", ""),
        (ModifierKind.VISIBILITY, "", "public"),
    ]


def test_unbalanced_brace_fails_on_line_one():
    with pytest.raises(ParseFailure) as exc:
        parse_source(b"class C {")
    assert exc.value.line == 1


@pytest.mark.parametrize("src,line", [
    (b"class C {\n  String s = \"open;\n}", 2),
    (b"class C {\n}\n}", 3),
    (b"class C { /* never closed", 1),
    (b"class C {\n  int x = 1 # 2;\n}", 2),
])
def test_failures_report_position(src, line):
    with pytest.raises(ParseFailure) as exc:
        parse_source(src)
    assert exc.value.line == line


def test_package_imports_and_declaration_kinds():
    src = b"""package org.x;
import java.util.List;
import java.io.*;
public interface I { void f(); }
enum E { A, B; }
@interface Marker {}
"""
    ns = parse_source(src).namespace
    assert ns.name == "org.x"
    assert ns.imports == ["java.util.List", "java.io.*"]
    assert [(d.name, d.kind) for d in ns.declarations] == [
        ("I", DeclarationKind.INTERFACE), ("E", DeclarationKind.ENUM), ("Marker", DeclarationKind.ANNOTATION_DECL),
    ]


def test_annotations_in_comments_and_strings_are_ignored():
    src = b"""
// @Ghost
/* @Ghost */
class C {
    String s = "@Ghost";
    char c = '@';
    @Real int x;
}
"""
    assert annotations(parse_source(src)) == ["Real"]


def test_fields_methods_params_and_nested():
    src = b"""class Outer {
    @A private static final int X = 1, Y = 2;
    public <T> T get(@B final String s, int... rest) throws Exception { return null; }
    static class Inner { @C void run() {} }
}"""
    (outer,) = parse_source(src).namespace.declarations
    assert [f.name for f in outer.fields] == ["X", "Y"]
    assert [m.kind for m in outer.fields[0].modifiers] == [
        ModifierKind.ANNOTATION, ModifierKind.VISIBILITY, ModifierKind.STATIC, ModifierKind.FINAL,
    ]
    (get,) = outer.methods
    assert get.return_type_name == "T"
    assert [p.name for p in get.params] == ["s", "rest"]
    assert [n.name for n in outer.nested] == ["Inner"]
    # each declarator of a multi-field declaration carries the shared modifiers
    assert annotations(parse_source(src)) == ["A", "A", "B", "C"]


def test_statement_and_expression_kinds():
    src = b"""class C { void m() {
        if (ok()) { return; }
        for (int i = 0; i < 3; i++) work(i);
        while (true) { break; }
        log("x");
        { int y = 2; }
    } }"""
    (m,) = parse_source(src).namespace.declarations[0].methods
    kinds = [s.kind for s in m.statements]
    assert kinds == [StatementKind.IF, StatementKind.FOR, StatementKind.WHILE, StatementKind.EXPR, StatementKind.BLOCK]
    call = m.statements[3].expressions[0]
    assert (call.kind, call.method_name) == (ExpressionKind.CALL, "log")
    assert call.expressions[0].kind is ExpressionKind.LITERAL


def test_unmodelled_constructs_are_absorbed():
    src = b"""class C {
    void m() {
        switch (x) { case 1: y(); break; default: z(); }
        try { a(); } catch (Exception e) { b(); } finally { c(); }
        Runnable r = () -> { go(); };
        int[] arr = new int[] {1, 2};
    }
}"""
    (m,) = parse_source(src).namespace.declarations[0].methods
    assert len(m.statements) == 4


def test_excessive_nesting_is_a_parse_failure():
    shallow = b"class C { void m() { " + b"if (a) " * 100 + b"x(); } }"
    assert parse_source(shallow).namespace.declarations[0].methods
    with pytest.raises(ParseFailure, match="nesting"):
        parse_source(b"class C { void m() { " + b"if (a) " * 400 + b"x(); } }")


_NAMES = st.sampled_from(["Override", "Deprecated", "Test", "Inject", "Nullable"])


@st.composite
def java_classes(draw):
    """Small grammar-valid classes together with their annotation count."""
    lines = []
    count = 0
    for i in range(draw(st.integers(0, 4))):
        anns = draw(st.lists(_NAMES, max_size=3))
        count += len(anns)
        prefix = " ".join(f"@{a}" for a in anns)
        vis = draw(st.sampled_from(["", "public ", "private ", "protected static "]))
        if draw(st.booleans()):
            lines.append(f"    {prefix} {vis}int f{i} = {i};")
        else:
            lines.append(f"    {prefix} {vis}void m{i}(int a) {{ if (a > {i}) {{ call{i}(a); }} }}")
    top = draw(st.lists(_NAMES, max_size=2))
    count += len(top)
    head = " ".join(f"@{a}" for a in top)
    src = f"{head}\npublic class K {{\n" + "\n".join(lines) + "\n}\n"
    return src, count


@settings(max_examples=150, deadline=None)
@given(java_classes())
def test_generated_classes_parse_with_expected_annotation_count(case):
    src, count = case
    root = parse_source(src.encode())
    assert len(annotations(root)) == count == count_annotations(src)


@settings(max_examples=300, deadline=None)
@given(st.binary(max_size=200))
def test_arbitrary_bytes_never_crash(data):
    try:
        parse_source(data)
    except ParseFailure as exc:
        assert exc.line >= 1 and exc.column >= 1
