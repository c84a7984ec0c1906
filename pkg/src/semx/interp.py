"""Tree-walking evaluator that keeps the call stack lookups consume.

Every message send is recorded as a :class:`DispatchRecord`, so which
extension won each dispatch is observable after the run.
"""
from __future__ import annotations

import sys
from dataclasses import dataclass, field
from typing import Optional, Union

from .lookup import (
    Activation, ActiveExtensions, Frame, LookupCache, ResolvedMethod, Selection,
    StrategyConfig, active_exts, lookup,
)
from .model import ImportConfig, MethodDef, ScriptDef, Signature, World
from .syntax import (
    Expr, ExprStmt, Fail, FieldRef, IntLiteral, New, ParamRef, Return, SelfRef,
    Send, StringLiteral,
)

LITERAL_CLASS = "Object"


@dataclass(frozen=True)
class Instance:
    class_name: str
    fields: tuple["Value", ...] = ()

    def __str__(self) -> str:
        return f"a {self.class_name}"


Value = Union[Instance, int, str]


def class_of(world: World, value: Value) -> str:
    if isinstance(value, Instance):
        return value.class_name
    if LITERAL_CLASS not in world.classes:
        raise _Abort("LiteralClassMissing",
                     f"literal {value!r} needs a class named {LITERAL_CLASS}")
    return LITERAL_CLASS


@dataclass(frozen=True)
class DispatchRecord:
    step: int
    receiver_class: str
    selector: Signature
    sender: str
    active_extensions: ActiveExtensions
    resolved: Optional[ResolvedMethod]
    stack: tuple[Frame, ...] = field(repr=False, default=())

    @property
    def depth(self) -> int:
        return len(self.stack)


@dataclass(frozen=True)
class EvalError:
    kind: str
    message: str
    stack: tuple[str, ...] = ()

    def __str__(self) -> str:
        return f"{self.kind}: {self.message}"


@dataclass(frozen=True)
class EvalOutcome:
    result: Optional[Value]
    dispatches: tuple[DispatchRecord, ...]
    error: Optional[EvalError] = None

    @property
    def ok(self) -> bool:
        return self.error is None

    @property
    def final(self) -> Optional[DispatchRecord]:
        return self.dispatches[-1] if self.dispatches else None


class _Abort(Exception):
    def __init__(self, kind: str, message: str):
        super().__init__(message)
        self.kind = kind
        self.message = message


class _Returned(Exception):
    def __init__(self, value: Value):
        self.value = value


# Python frames consumed per language-level call, with headroom
_PY_FRAMES_PER_CALL = 8


class Evaluator:
    def __init__(self, world: World, cfg: StrategyConfig,
                 cache: Optional[LookupCache] = None):
        self.world = world
        self.cfg = cfg
        self.cache = cache if cache is not None else (LookupCache() if cfg.cache_enabled else None)
        self.stack: list[Frame] = []
        self.dispatches: list[DispatchRecord] = []

    def run(self, script: ScriptDef) -> EvalOutcome:
        limit = sys.getrecursionlimit()
        needed = self.cfg.max_depth * _PY_FRAMES_PER_CALL + 200
        if needed > limit:
            sys.setrecursionlimit(needed)
        try:
            self.stack.append(Frame(script))
            result = self._exec_script(script)
            self.stack.pop()
            return EvalOutcome(result, tuple(self.dispatches))
        except _Abort as abort:
            snapshot = tuple(f.id for f in self.stack)
            self.stack.clear()
            return EvalOutcome(None, tuple(self.dispatches),
                               EvalError(abort.kind, abort.message, snapshot))
        finally:
            if needed > limit:
                sys.setrecursionlimit(limit)

    def _exec_script(self, script: ScriptDef) -> Optional[Value]:
        env = _Env(None, {})
        last: Optional[Value] = None
        for stmt in script.body:
            if isinstance(stmt, Return):
                return self._eval(stmt.expr, env)
            if isinstance(stmt, Fail):
                raise _Abort("UserFailure", stmt.tag)
            last = self._eval(stmt.expr, env)
        return last

    def _invoke(self, method: MethodDef, receiver: Value, args: list[Value]) -> Value:
        env = _Env(receiver, dict(zip(method.params, args)))
        for stmt in method.body:
            if isinstance(stmt, Return):
                return self._eval(stmt.expr, env)
            if isinstance(stmt, Fail):
                raise _Abort("UserFailure", stmt.tag)
            self._eval(stmt.expr, env)
        return receiver

    def _eval(self, expr: Expr, env: "_Env") -> Value:
        if isinstance(expr, Send):
            receiver = self._eval(expr.receiver, env)
            args = [self._eval(a, env) for a in expr.args]
            return self._send(receiver, expr.selector, args)
        if isinstance(expr, SelfRef):
            if env.self_value is None:
                raise _Abort("UnknownName", "self used outside a method")
            return env.self_value
        if isinstance(expr, ParamRef):
            return env.params[expr.name]
        if isinstance(expr, FieldRef):
            target = env.self_value
            if not isinstance(target, Instance):
                raise _Abort("UnknownName", f"field {expr.name} read on a literal")
            fields = self.world.classes[target.class_name].fields
            if expr.name not in fields:
                raise _Abort("UnknownName",
                             f"{target.class_name} has no field {expr.name}")
            return target.fields[fields.index(expr.name)]
        if isinstance(expr, New):
            return Instance(expr.class_name, tuple(self._eval(a, env) for a in expr.args))
        if isinstance(expr, (IntLiteral, StringLiteral)):
            class_of(self.world, expr.value)
            return expr.value
        raise TypeError(f"not an expression: {expr!r}")

    def _send(self, receiver: Value, selector: Signature, args: list[Value]) -> Value:
        receiver_class = class_of(self.world, receiver)
        stack = tuple(self.stack)
        exts = active_exts(self.world, stack, self.cfg)
        resolved = lookup(self.world, receiver_class, selector, stack, self.cfg, self.cache)
        self.dispatches.append(DispatchRecord(
            step=len(self.dispatches) + 1,
            receiver_class=receiver_class,
            selector=selector,
            sender=stack[-1].id,
            active_extensions=exts,
            resolved=resolved,
            stack=stack,
        ))
        if resolved is None:
            raise _Abort("MessageNotUnderstood",
                         f"{receiver_class} does not understand {selector} "
                         f"(active: {', '.join(map(str, exts))})")
        if len(self.stack) >= self.cfg.max_depth:
            raise _Abort("DepthExceeded",
                         f"call stack deeper than {self.cfg.max_depth} frames")
        self.stack.append(Frame(resolved.method))
        result = self._invoke(resolved.method, receiver, args)
        self.stack.pop()
        return result


@dataclass
class _Env:
    self_value: Optional[Value]
    params: dict[str, Value]


def evaluate(world: World, script: Union[ScriptDef, str],
             cfg: StrategyConfig = StrategyConfig(),
             cache: Optional[LookupCache] = None) -> EvalOutcome:
    """Run ``script`` under ``cfg`` and return its result and dispatch trace."""
    if isinstance(script, str):
        script = world.find_script(script)
    return Evaluator(world, cfg, cache).run(script)


def evaluate_matrix(world: World, script: Union[ScriptDef, str],
                    imports: ImportConfig = ImportConfig(),
                    **options) -> dict[tuple[Activation, Selection], EvalOutcome]:
    """Evaluate ``script`` once per (activation, selection) pair."""
    if isinstance(script, str):
        script = world.find_script(script)
    return {
        (act, sel): evaluate(world, script, StrategyConfig(act, sel, imports, **options))
        for act in Activation
        for sel in Selection
    }
