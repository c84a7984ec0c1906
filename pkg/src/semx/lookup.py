"""Two-step method lookup: activate extensions from the stack, then select.

``lookup(c, s, stack) = select(c, s, active_exts(stack))``. Three activation
strategies (bottom-up and top-down local rebinding, lexical) combine freely
with two selection strategies (extensions-first, hierarchy-first).
"""
from __future__ import annotations

import enum
import threading
import weakref
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

from .model import (
    GLOBAL, ExtensionRef, Frameable, ImportConfig, MethodDef, Signature, World,
    effective_imports,
)

__all__ = [
    "Activation", "ActiveExtensions", "CallStack", "Frame", "LookupCache",
    "ResolvedMethod", "Selection", "StrategyConfig", "active_exts",
    "active_exts_bottom_up", "active_exts_lexical", "active_exts_top_down",
    "lookup", "lookup_in_class", "lookup_in_extension", "select",
    "select_extensions_first", "select_hierarchy_first",
]


class Activation(enum.Enum):
    BOTTOM_UP = "lr-up"
    TOP_DOWN = "lr-down"
    LEXICAL = "lexical"


class Selection(enum.Enum):
    EXTENSIONS_FIRST = "ext-first"
    HIERARCHY_FIRST = "hrc-first"


@dataclass(frozen=True)
class StrategyConfig:
    activation: Activation = Activation.LEXICAL
    selection: Selection = Selection.HIERARCHY_FIRST
    imports: ImportConfig = ImportConfig()
    cache_enabled: bool = True
    max_depth: int = 1024

    def __post_init__(self) -> None:
        if self.max_depth < 1:
            raise ValueError("max_depth must be at least 1")


@dataclass(frozen=True)
class Frame:
    """One activation record; only its originating method or script matters."""

    origin: Frameable

    @property
    def id(self) -> str:
        return str(self.origin)

    def __str__(self) -> str:
        return self.id


# oldest frame first; the last frame sent the message being looked up
CallStack = Sequence[Frame]
ActiveExtensions = tuple[ExtensionRef, ...]


@dataclass(frozen=True)
class ResolvedMethod:
    class_name: str
    extension: ExtensionRef
    method: MethodDef = field(compare=False)

    @property
    def package(self) -> str:
        return self.method.package

    @property
    def label(self) -> str:
        """``Pkg.Ext`` for the defining extension; global resolves to its package."""
        name = self.extension.name if not self.extension.is_global else "global"
        return f"{self.package}.{name}"

    def __str__(self) -> str:
        return f"{self.class_name} [{self.label}]"


def _imports_config(cfg) -> ImportConfig:
    if cfg is None:
        return ImportConfig()
    if isinstance(cfg, ImportConfig):
        return cfg
    return cfg.imports


def _concat(world: World, frames: Sequence[Frame], cfg) -> ActiveExtensions:
    config = _imports_config(cfg)
    refs: dict[ExtensionRef, None] = {}
    for frame in frames:
        for ref in effective_imports(world, frame.origin, config):
            refs.setdefault(ref, None)
    return tuple(refs) + (GLOBAL,)


def active_exts_bottom_up(world: World, stack: CallStack, cfg=None) -> ActiveExtensions:
    """Oldest frames' imports first."""
    return _concat(world, stack, cfg)


def active_exts_top_down(world: World, stack: CallStack, cfg=None) -> ActiveExtensions:
    """Newest frames' imports first."""
    return _concat(world, stack[::-1], cfg)


def active_exts_lexical(world: World, stack: CallStack, cfg=None) -> ActiveExtensions:
    """Only the sender's imports. The sender is the newest frame."""
    return _concat(world, stack[-1:], cfg)


_ACTIVATIONS: dict[Activation, Callable[..., ActiveExtensions]] = {
    Activation.BOTTOM_UP: active_exts_bottom_up,
    Activation.TOP_DOWN: active_exts_top_down,
    Activation.LEXICAL: active_exts_lexical,
}


def active_exts(world: World, stack: CallStack, cfg: StrategyConfig) -> ActiveExtensions:
    return _ACTIVATIONS[cfg.activation](world, stack, cfg)


def _resolved(method: Optional[MethodDef]) -> Optional[ResolvedMethod]:
    if method is None:
        return None
    return ResolvedMethod(method.class_name, method.extension, method)


def lookup_in_class(world: World, class_name: str, sig: Signature,
                    exts: Sequence[ExtensionRef]) -> Optional[ResolvedMethod]:
    for ext in exts:
        method = world.method(class_name, sig, ext)
        if method is not None:
            return _resolved(method)
    return None


def lookup_in_extension(world: World, class_name: str, sig: Signature,
                        ext: ExtensionRef) -> Optional[ResolvedMethod]:
    current: Optional[str] = class_name
    while current is not None:
        method = world.method(current, sig, ext)
        if method is not None:
            return _resolved(method)
        current = world.superclass(current)
    return None


def select_extensions_first(world: World, class_name: str, sig: Signature,
                            exts: Sequence[ExtensionRef]) -> Optional[ResolvedMethod]:
    current: Optional[str] = class_name
    while current is not None:
        found = lookup_in_class(world, current, sig, exts)
        if found is not None:
            return found
        current = world.superclass(current)
    return None


def select_hierarchy_first(world: World, class_name: str, sig: Signature,
                           exts: Sequence[ExtensionRef]) -> Optional[ResolvedMethod]:
    world.superclass(class_name)  # unknown receiver classes fail loudly
    for ext in exts:
        found = lookup_in_extension(world, class_name, sig, ext)
        if found is not None:
            return found
    return None


_SELECTIONS = {
    Selection.EXTENSIONS_FIRST: select_extensions_first,
    Selection.HIERARCHY_FIRST: select_hierarchy_first,
}


def select(world: World, class_name: str, sig: Signature, exts: Sequence[ExtensionRef],
           selection: Selection) -> Optional[ResolvedMethod]:
    return _SELECTIONS[selection](world, class_name, sig, exts)


class LookupCache:
    """Memo table keyed by (selection, receiver class, signature, active extensions).

    Keying on the computed extension sequence rather than the stack lets
    different stacks with the same activation share entries.
    """

    _MISSING = object()

    def __init__(self) -> None:
        self._table: dict = {}
        self._lock = threading.Lock()
        self.hits = 0
        self.misses = 0

    def get_or_compute(self, key, compute):
        with self._lock:
            value = self._table.get(key, self._MISSING)
            if value is not self._MISSING:
                self.hits += 1
                return value
        value = compute()
        with self._lock:
            self.misses += 1
            self._table.setdefault(key, value)
        return value

    def __len__(self) -> int:
        return len(self._table)

    def clear(self) -> None:
        with self._lock:
            self._table.clear()


_world_caches: "weakref.WeakKeyDictionary[World, LookupCache]" = weakref.WeakKeyDictionary()
_world_caches_lock = threading.Lock()


def cache_for(world: World) -> LookupCache:
    with _world_caches_lock:
        cache = _world_caches.get(world)
        if cache is None:
            cache = _world_caches[world] = LookupCache()
        return cache


def lookup(world: World, receiver_class: str, sig: Signature, stack: CallStack,
           cfg: StrategyConfig = StrategyConfig(),
           cache: Optional[LookupCache] = None) -> Optional[ResolvedMethod]:
    """Resolve ``sig`` for an instance of ``receiver_class`` sent from ``stack``.

    Returns None when the message is not understood.
    """
    exts = active_exts(world, stack, cfg)
    if not cfg.cache_enabled:
        return select(world, receiver_class, sig, exts, cfg.selection)
    if cache is None:
        cache = cache_for(world)
    key = (cfg.selection, receiver_class, sig, exts)
    return cache.get_or_compute(
        key, lambda: select(world, receiver_class, sig, exts, cfg.selection))
