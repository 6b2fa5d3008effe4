"""Builtin functions available to queries, and the registry that holds them.

Extra domain functions are added with :func:`register_builtin` before a query
is typechecked; the checker and interpreter then treat them exactly like the
bundled ones.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Any, Callable, Optional, Sequence

from ..errors import QueryRuntimeError, RegistrationError
from ..schema import ChangeKind, ChangedFile, CodeRepository, FileKind, compute_snapshot
from ..query.types import (
    ANY,
    ANY_ARRAY,
    BOOL,
    INT,
    TIME,
    Array,
    NodeType,
    Type,
    parse_type_name,
    valid_user_type,
)


@dataclass
class Builtin:
    name: str
    params: tuple[Type, ...]
    returns: Type
    impl: Callable[..., Any]
    min_args: int
    needs_context: bool = False
    special: bool = False  # evaluated by the interpreter itself (def)

    def accepts_arity(self, n: int) -> bool:
        return self.min_args <= n <= len(self.params)


def _as_type(t: Type | str) -> Type:
    return parse_type_name(t) if isinstance(t, str) else t


class Registry:
    def __init__(self) -> None:
        self._fns: dict[str, Builtin] = {}

    def __contains__(self, name: str) -> bool:
        return name in self._fns

    def __iter__(self):
        return iter(sorted(self._fns))

    def lookup(self, name: str) -> Optional[Builtin]:
        return self._fns.get(name)

    def register(
        self,
        name: str,
        params: Sequence[Type | str],
        returns: Type | str,
        impl: Callable[..., Any],
        *,
        min_args: Optional[int] = None,
        needs_context: bool = False,
        _internal: bool = False,
    ) -> "Registry":
        if name in self._fns:
            raise RegistrationError(f"builtin '{name}' is already registered")
        if not name.isidentifier():
            raise RegistrationError(f"invalid builtin name {name!r}")
        try:
            ptypes = tuple(_as_type(p) for p in params)
            rtype = _as_type(returns)
        except ValueError as exc:
            raise RegistrationError(f"builtin '{name}': {exc}") from None
        if not _internal:
            for t in (*ptypes, rtype):
                if not valid_user_type(t):
                    raise RegistrationError(f"builtin '{name}': type {t} not allowed in a signature")
        self._fns[name] = Builtin(
            name, ptypes, rtype, impl,
            len(ptypes) if min_args is None else min_args,
            needs_context=needs_context,
        )
        return self

    def copy(self) -> "Registry":
        new = Registry()
        new._fns = dict(self._fns)
        return new


def register_builtin(
    registry: Registry, name: str, params: Sequence[Type | str], returns: Type | str, impl: Callable[..., Any]
) -> Registry:
    """Add a domain function; duplicates raise RegistrationError."""
    return registry.register(name, params, returns, impl)


def _def(*_):  # placeholder; the interpreter evaluates def() in absorbing mode
    raise AssertionError("def() is evaluated by the interpreter")


def _len(arr: list) -> int:
    return len(arr)


def _getsnapshot(repo: CodeRepository, at: Optional[int] = None) -> list[ChangedFile]:
    return compute_snapshot(repo, at)


def _getast(ctx, f: ChangedFile):
    if (f.file_kind is FileKind.SOURCE_JAVA and not f.parse_error and f.blob_hash
            and f.change_kind is not ChangeKind.DELETED):
        root = ctx.dataset.ast(f.blob_hash)
        if root is not None:
            return root
    raise QueryRuntimeError(f"no AST stored for {f.path}")


def default_registry() -> Registry:
    """A fresh registry holding the bundled builtins."""
    reg = Registry()
    reg.register("def", (ANY,), BOOL, _def, _internal=True)
    reg._fns["def"].special = True
    reg.register("len", (ANY_ARRAY,), INT, _len, _internal=True)
    reg.register("getsnapshot", (NodeType("CodeRepository"), TIME), Array(NodeType("ChangedFile")),
                 _getsnapshot, min_args=1)
    reg.register("getast", (NodeType("ChangedFile"),), NodeType("ASTRoot"), _getast, needs_context=True)
    return reg
