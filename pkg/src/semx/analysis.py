"""Static analyses: extension conflicts and the accidental override space.

The accidental override space (AOS) of a message is the set of
(class, extension) cells where adding a same-signature method would make
the message dispatch to the new method instead of the current one. Each
selection strategy has a closed-form AOS; :func:`aos_bruteforce` recomputes
it by actually inserting methods and re-running the lookup.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Optional, Sequence, Union

from .lookup import ResolvedMethod, Selection, select
from .model import (
    GLOBAL, ExtensionRef, MethodDef, Signature, World, ancestors, descendants,
)

Number = Union[int, float, str, Fraction]


# -- conflicts ---------------------------------------------------------------

@dataclass(frozen=True)
class OverwriteConflict:
    class_name: str
    signature: Signature
    extensions: tuple[ExtensionRef, ...]

    @property
    def kind(self) -> str:
        if any(e.is_global for e in self.extensions):
            return "overwritesRegular"
        return "extensionOverwrite"


@dataclass(frozen=True)
class OverrideConflict:
    lower: tuple[str, ExtensionRef]
    upper: tuple[str, ExtensionRef]
    signature: Signature

    @property
    def kind(self) -> str:
        lower_global = self.lower[1].is_global
        upper_global = self.upper[1].is_global
        if lower_global:
            return "regularOverExtension"
        if upper_global:
            return "extensionOverRegular"
        return "extensionOverExtension"


def _ext_order(ref: ExtensionRef):
    return (not ref.is_global, ref)


def _cells(world: World) -> dict[tuple[str, Signature], list[ExtensionRef]]:
    cells: dict[tuple[str, Signature], list[ExtensionRef]] = {}
    for mid in world.methods:
        cells.setdefault((mid.class_name, mid.signature), []).append(mid.extension)
    return cells


def detect_overwrites(world: World) -> list[OverwriteConflict]:
    """One conflict per (class, signature) that two or more extensions define."""
    return [
        OverwriteConflict(cls, sig, tuple(sorted(exts, key=_ext_order)))
        for (cls, sig), exts in sorted(_cells(world).items())
        if len(exts) >= 2
    ]


def detect_overrides(world: World) -> list[OverrideConflict]:
    """Pairs where a method shadows a same-signature method of another
    extension defined on a strict ancestor."""
    cells = _cells(world)
    found = []
    for (cls, sig), lower_exts in sorted(cells.items()):
        chain = ancestors(world, cls)
        for lower_ext in sorted(lower_exts, key=_ext_order):
            for upper_cls in chain:
                for upper_ext in sorted(cells.get((upper_cls, sig), ()), key=_ext_order):
                    if upper_ext != lower_ext:
                        found.append(OverrideConflict((cls, lower_ext), (upper_cls, upper_ext), sig))
    return found


# -- accidental override space -----------------------------------------------

class BaseMethodUndefined(LookupError):
    pass


class PreconditionViolated(ValueError):
    pass


@dataclass(frozen=True)
class MessageContext:
    receiver: str
    signature: Signature
    extensions: tuple[ExtensionRef, ...]

    def __post_init__(self) -> None:
        exts = tuple(self.extensions)
        if not exts or not exts[-1].is_global:
            exts = exts + (GLOBAL,)
        if sum(e.is_global for e in exts) != 1:
            raise ValueError("global must appear exactly once, last")
        if len(set(exts)) != len(exts):
            raise ValueError("active extensions must be distinct")
        object.__setattr__(self, "extensions", exts)


@dataclass(frozen=True, order=True)
class MethodLocation:
    class_name: str
    index: int  # 1-based position of the extension in the active sequence
    extension: ExtensionRef = field(compare=False)

    def __str__(self) -> str:
        return f"({self.class_name}, e{self.index}={self.extension})"


@dataclass(frozen=True)
class AosResult:
    strategy: Selection
    base: MethodLocation
    locations: frozenset[MethodLocation]
    formula_size: int

    @property
    def size(self) -> int:
        return len(self.locations)


def aos_ext_size(n_sub: int, n_exts: int, i: int) -> int:
    return n_sub * (n_exts - 1) + (i - 1)


def aos_hrc_size(n_sub: int, n_sup: int, i: int) -> int:
    return (n_sub + n_sup + 1) * (i - 1)


def _check_extensions(world: World, mess: MessageContext) -> None:
    world.superclass(mess.receiver)
    for ext in mess.extensions:
        if ext not in world.extensions:
            raise KeyError(f"unknown extension {ext}")


def _base(world: World, mess: MessageContext, selection: Selection) -> tuple[ResolvedMethod, int]:
    _check_extensions(world, mess)
    resolved = select(world, mess.receiver, mess.signature, mess.extensions, selection)
    if resolved is None:
        raise BaseMethodUndefined(
            f"{mess.receiver} does not understand {mess.signature} under "
            f"<{', '.join(map(str, mess.extensions))}>")
    return resolved, mess.extensions.index(resolved.extension) + 1


def _loc(mess: MessageContext, cls: str, j: int) -> MethodLocation:
    return MethodLocation(cls, j, mess.extensions[j - 1])


def aos_extensions_first(world: World, mess: MessageContext) -> AosResult:
    resolved, i = _base(world, mess, Selection.EXTENSIONS_FIRST)
    c_def = resolved.class_name
    n = len(mess.extensions)
    subs = descendants(world, c_def)
    locations = {_loc(mess, c, j) for c in subs for j in range(1, n + 1) if j != i}
    # higher-priority extensions on the defining class itself
    locations |= {_loc(mess, c_def, j) for j in range(1, i)}
    return AosResult(Selection.EXTENSIONS_FIRST, _loc(mess, c_def, i),
                     frozenset(locations), aos_ext_size(len(subs), n, i))


def aos_hierarchy_first(world: World, mess: MessageContext) -> AosResult:
    resolved, i = _base(world, mess, Selection.HIERARCHY_FIRST)
    c_def = resolved.class_name
    subs = descendants(world, c_def)
    sups = ancestors(world, c_def)
    hierarchy = subs | {c_def} | set(sups)
    locations = {_loc(mess, c, j) for c in hierarchy for j in range(1, i)}
    return AosResult(Selection.HIERARCHY_FIRST, _loc(mess, c_def, i),
                     frozenset(locations), aos_hrc_size(len(subs), len(sups), i))


def aos(world: World, mess: MessageContext, selection: Selection) -> AosResult:
    if selection is Selection.EXTENSIONS_FIRST:
        return aos_extensions_first(world, mess)
    return aos_hierarchy_first(world, mess)


def aos_bruteforce(world: World, mess: MessageContext,
                   selection: Selection) -> frozenset[MethodLocation]:
    """Enumerate the AOS by inserting a method at every candidate cell.

    Only worlds where the signature is defined at exactly the base cell are
    accepted. Cells in the base method's own extension are skipped: an
    override within one extension is intentional.
    """
    resolved, i = _base(world, mess, selection)
    same_sig = [m for m in world.methods.values() if m.signature == mess.signature]
    if len(same_sig) != 1:
        raise PreconditionViolated(
            f"{mess.signature} is defined {len(same_sig)} times; the oracle needs exactly one")
    base = (resolved.class_name, resolved.extension)
    receivers = sorted(descendants(world, resolved.class_name) | {resolved.class_name})
    params = tuple(f"p{k}" for k in range(mess.signature.arity))
    found = set()
    for cls in sorted(world.classes):
        for j, ext in enumerate(mess.extensions, start=1):
            if j == i:
                continue
            package = world.classes[cls].package if ext.is_global else ext.package
            probe = world.with_method(MethodDef(cls, mess.signature, ext, package, params))
            for receiver in receivers:
                hit = select(probe, receiver, mess.signature, mess.extensions, selection)
                if hit is None or (hit.class_name, hit.extension) != base:
                    found.add(_loc(mess, cls, j))
                    break
    return frozenset(found)


# -- dominance of hierarchy-first --------------------------------------------

@dataclass(frozen=True)
class DominanceRow:
    n_exts: int
    max_favorable_i: int


def _exact(x: Number) -> Fraction:
    return x if isinstance(x, Fraction) else Fraction(str(x))


def dominance_table(avg_subclasses: Number, avg_superclasses: Number,
                    max_exts: int) -> list[DominanceRow]:
    """Largest base index ``i`` per extension count for which hierarchy-first
    has an AOS no bigger than extensions-first.

    Uses ``(Nsub + Nsup)(i - 1) <= Nsub(|e| - 1)`` in exact arithmetic.
    """
    n_sub = _exact(avg_subclasses)
    n_sup = _exact(avg_superclasses)
    if n_sub <= 0:
        raise ValueError("average subclass count must be positive")
    if n_sup < 0:
        raise ValueError("average superclass count must be non-negative")
    if max_exts < 1:
        raise ValueError("max_exts must be at least 1")
    rows = []
    for n in range(1, max_exts + 1):
        bound = 1 + math.floor(n_sub * (n - 1) / (n_sub + n_sup))
        rows.append(DominanceRow(n, min(n, bound)))
    return rows


def dominance_summary(rows: Sequence[DominanceRow]) -> Fraction:
    """Fraction of all (|e|, i) cases where hierarchy-first is no worse."""
    if not rows:
        raise ValueError("no rows")
    return Fraction(sum(r.max_favorable_i for r in rows), sum(r.n_exts for r in rows))


def dominance_sweep(sub_range: Iterable[Number], sup_range: Iterable[Number],
                    max_exts: int) -> dict[tuple[Number, Number], Fraction]:
    sups = list(sup_range)
    return {
        (n_sub, n_sup): dominance_summary(dominance_table(n_sub, n_sup, max_exts))
        for n_sub in sub_range
        for n_sup in sups
    }


# -- statistics --------------------------------------------------------------

@dataclass(frozen=True)
class WorldStats:
    extension_method_fraction: Fraction
    extended_class_fraction: Fraction
    packages_defining_extensions_fraction: Fraction
    packages_with_extended_classes_fraction: Fraction

    def as_dict(self) -> dict[str, Fraction]:
        return {
            "extensionMethodFraction": self.extension_method_fraction,
            "extendedClassFraction": self.extended_class_fraction,
            "packagesDefiningExtensionsFraction": self.packages_defining_extensions_fraction,
            "packagesWithExtendedClassesFraction": self.packages_with_extended_classes_fraction,
        }


def _ratio(num: int, den: int) -> Fraction:
    return Fraction(num, den) if den else Fraction(0)


def world_stats(world: World) -> WorldStats:
    ext_methods = [m for m in world.methods.values() if m.is_extension]
    extended = {m.class_name for m in ext_methods}
    defining = {m.package for m in ext_methods}
    extended_by_others = {
        world.classes[m.class_name].package
        for m in ext_methods
        if world.classes[m.class_name].package != m.package
    }
    n_pkgs = len(world.packages)
    return WorldStats(
        _ratio(len(ext_methods), len(world.methods)),
        _ratio(len(extended), len(world.classes)),
        _ratio(len(defining), n_pkgs),
        _ratio(len(extended_by_others), n_pkgs),
    )
