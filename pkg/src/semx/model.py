"""Immutable world model: packages, classes, extension groups, methods, scripts.

A world is the universe a lookup runs against. Regular (non-extension)
methods all live in one distinguished extension, :data:`GLOBAL`, which no
package declares and no import may name.
"""
from __future__ import annotations

import functools
from dataclasses import dataclass, field, replace
from typing import Iterable, Mapping, Optional, Union

from .syntax import (
    FieldRef, Loc, New, ParamRef, Signature, Stmt, walk_body,
)

__all__ = [
    "GLOBAL", "ClassDef", "Diagnostic", "ExtensionDef", "ExtensionRef",
    "ImportConfig", "MethodDef", "MethodId", "PackageDef", "ScriptDef",
    "Signature", "ValidationReport", "World", "ancestors", "descendants",
    "effective_imports", "validate_world",
]

RESERVED_EXTENSION = "global"


@dataclass(frozen=True, order=True)
class ExtensionRef:
    package: str
    name: str

    @property
    def is_global(self) -> bool:
        return self.name == RESERVED_EXTENSION and not self.package

    @classmethod
    def parse(cls, text: str) -> ExtensionRef:
        text = text.strip()
        if text == RESERVED_EXTENSION:
            return GLOBAL
        package, sep, name = text.partition(".")
        if not sep or not package or not name or "." in name:
            raise ValueError(f"malformed extension reference {text!r}, expected Pkg.Ext")
        return cls(package, name)

    def __str__(self) -> str:
        return RESERVED_EXTENSION if self.is_global else f"{self.package}.{self.name}"


GLOBAL = ExtensionRef("", RESERVED_EXTENSION)


@dataclass(frozen=True, order=True)
class MethodId:
    class_name: str
    signature: Signature
    extension: ExtensionRef

    def __str__(self) -> str:
        base = f"{self.class_name}.{self.signature}"
        return base if self.extension.is_global else f"{base}@{self.extension}"


@dataclass(frozen=True)
class MethodDef:
    class_name: str
    signature: Signature
    extension: ExtensionRef
    package: str
    params: tuple[str, ...] = ()
    body: tuple[Stmt, ...] = ()
    imports: tuple[ExtensionRef, ...] = ()
    loc: Optional[Loc] = field(default=None, compare=False)

    @property
    def id(self) -> MethodId:
        return MethodId(self.class_name, self.signature, self.extension)

    @property
    def is_extension(self) -> bool:
        return not self.extension.is_global

    def __str__(self) -> str:
        return str(self.id)


@dataclass(frozen=True)
class ScriptDef:
    name: str
    package: str
    imports: tuple[ExtensionRef, ...] = ()
    body: tuple[Stmt, ...] = ()
    loc: Optional[Loc] = field(default=None, compare=False)

    @property
    def qualified_name(self) -> str:
        return f"{self.package}.{self.name}"

    def __str__(self) -> str:
        return f"script {self.qualified_name}"


@dataclass(frozen=True)
class ClassDef:
    name: str
    package: str
    superclass: Optional[str] = None
    fields: tuple[str, ...] = ()
    imports: tuple[ExtensionRef, ...] = ()
    loc: Optional[Loc] = field(default=None, compare=False)


@dataclass(frozen=True)
class ExtensionDef:
    ref: ExtensionRef
    methods: tuple[MethodId, ...] = ()
    loc: Optional[Loc] = field(default=None, compare=False)


@dataclass(frozen=True)
class PackageDef:
    name: str
    imports: tuple[ExtensionRef, ...] = ()
    classes: tuple[str, ...] = ()
    extensions: tuple[str, ...] = ()
    scripts: tuple[str, ...] = ()
    loc: Optional[Loc] = field(default=None, compare=False)


@dataclass(frozen=True)
class ImportConfig:
    # class-level imports of ancestors also apply to subclasses
    refinement_inheritance: bool = False


Frameable = Union[MethodDef, ScriptDef]


@dataclass(frozen=True, eq=False)
class World:
    """All entities of a program, indexed by identifier.

    ``extensions`` always contains the global extension. Derived indexes are
    computed lazily and cached on the instance; worlds are never mutated.
    """

    packages: Mapping[str, PackageDef]
    classes: Mapping[str, ClassDef]
    extensions: Mapping[ExtensionRef, ExtensionDef]
    methods: Mapping[MethodId, MethodDef]
    scripts: Mapping[tuple[str, str], ScriptDef]

    @classmethod
    def build(cls, packages: Iterable[PackageDef] = (), classes: Iterable[ClassDef] = (),
              extensions: Iterable[ExtensionDef] = (), methods: Iterable[MethodDef] = (),
              scripts: Iterable[ScriptDef] = ()) -> World:
        methods = list(methods)
        exts = {e.ref: e for e in extensions}
        exts[GLOBAL] = ExtensionDef(
            GLOBAL, tuple(sorted(m.id for m in methods if m.extension.is_global)))
        return cls(
            packages={p.name: p for p in packages},
            classes={c.name: c for c in classes},
            extensions=exts,
            methods={m.id: m for m in methods},
            scripts={(s.package, s.name): s for s in scripts},
        )

    def with_method(self, method: MethodDef) -> World:
        """Copy of this world with ``method`` added (or replaced)."""
        methods = dict(self.methods)
        methods[method.id] = method
        extensions = dict(self.extensions)
        ext = extensions.get(method.extension, ExtensionDef(method.extension))
        if method.id not in ext.methods:
            ext = replace(ext, methods=tuple(sorted(ext.methods + (method.id,))))
        extensions[method.extension] = ext
        return replace(self, methods=methods, extensions=extensions)

    # lazily derived indexes

    @functools.cached_property
    def _cell_index(self) -> dict[tuple[str, Signature, ExtensionRef], MethodDef]:
        return {(m.class_name, m.signature, m.extension): m for m in self.methods.values()}

    @functools.cached_property
    def _subclasses(self) -> dict[str, list[str]]:
        subs: dict[str, list[str]] = {name: [] for name in self.classes}
        for c in self.classes.values():
            if c.superclass in subs:
                subs[c.superclass].append(c.name)
        return subs

    def method(self, class_name: str, signature: Signature,
               extension: ExtensionRef) -> Optional[MethodDef]:
        """The partial ``method`` function: the definition in one cell, if any."""
        return self._cell_index.get((class_name, signature, extension))

    def superclass(self, class_name: str) -> Optional[str]:
        return self._class(class_name).superclass

    def _class(self, class_name: str) -> ClassDef:
        try:
            return self.classes[class_name]
        except KeyError:
            raise KeyError(f"unknown class {class_name!r}") from None

    def subclasses(self, class_name: str) -> list[str]:
        return self._subclasses[class_name]

    def find_script(self, name: str) -> ScriptDef:
        """Find a script by ``name`` or ``Package.name``."""
        if "." in name:
            package, _, short = name.partition(".")
            script = self.scripts.get((package, short))
            if script is None:
                raise KeyError(f"unknown script {name!r}")
            return script
        found = [s for (_, short), s in sorted(self.scripts.items()) if short == name]
        if not found:
            raise KeyError(f"unknown script {name!r}")
        if len(found) > 1:
            options = ", ".join(s.qualified_name for s in found)
            raise KeyError(f"ambiguous script {name!r}: {options}")
        return found[0]

    def package_of(self, frame: Frameable) -> PackageDef:
        return self.packages[frame.package]


def ancestors(world: World, class_name: str) -> list[str]:
    """Superclass chain of ``class_name``, nearest first, excluding itself."""
    chain: list[str] = []
    seen = {class_name}
    current = world.superclass(class_name)
    while current is not None:
        if current in seen:
            raise ValueError(f"cyclic hierarchy through {current!r}")
        seen.add(current)
        chain.append(current)
        current = world.superclass(current)
    return chain


def descendants(world: World, class_name: str) -> set[str]:
    world._class(class_name)
    result: set[str] = set()
    pending = list(world.subclasses(class_name))
    while pending:
        name = pending.pop()
        if name not in result:
            result.add(name)
            pending.extend(world.subclasses(name))
    return result


def _dedup(refs: Iterable[ExtensionRef]) -> tuple[ExtensionRef, ...]:
    return tuple(dict.fromkeys(r for r in refs if not r.is_global))


def effective_imports(world: World, frame: Frameable,
                      config: ImportConfig = ImportConfig()) -> tuple[ExtensionRef, ...]:
    """Imports in force inside ``frame``, highest priority first.

    Methods: method-level, then host class (plus ancestors' class-level
    imports under refinement inheritance), then package. Extension methods
    are not lexically inside their target class, so they skip the class
    level. Scripts: script-level, then package.
    """
    refs: list[ExtensionRef] = list(frame.imports)
    if isinstance(frame, MethodDef) and not frame.is_extension:
        refs.extend(world.classes[frame.class_name].imports)
        if config.refinement_inheritance:
            for name in ancestors(world, frame.class_name):
                refs.extend(world.classes[name].imports)
    refs.extend(world.package_of(frame).imports)
    return _dedup(refs)


@dataclass(frozen=True)
class Diagnostic:
    kind: str
    entity: str
    message: str
    loc: Optional[Loc] = None

    def __str__(self) -> str:
        where = f"{self.loc}: " if self.loc else ""
        return f"{where}{self.kind}: {self.message}"


@dataclass(frozen=True)
class ValidationReport:
    diagnostics: tuple[Diagnostic, ...] = ()

    @property
    def ok(self) -> bool:
        return not self.diagnostics


def validate_world(world: World) -> ValidationReport:
    """Check every cross-reference and structural invariant of ``world``."""
    diags: list[Diagnostic] = []

    def report(kind, entity, message, loc=None):
        diags.append(Diagnostic(kind, str(entity), message, loc))

    def check_imports(owner, refs, loc):
        for ref in refs:
            if ref.is_global or ref.name == RESERVED_EXTENSION:
                report("ReservedName", owner, f"{owner} imports the reserved extension 'global'", loc)
            elif ref not in world.extensions:
                report("UnknownExtension", owner, f"{owner} imports undeclared extension {ref}", loc)

    for pkg in world.packages.values():
        check_imports(f"package {pkg.name}", pkg.imports, pkg.loc)

    for cls in world.classes.values():
        if cls.package not in world.packages:
            report("UnknownPackage", cls.name, f"class {cls.name} names unknown package {cls.package}", cls.loc)
        if cls.superclass is not None and cls.superclass not in world.classes:
            report("UnknownClass", cls.name,
                   f"class {cls.name} extends undeclared class {cls.superclass}", cls.loc)
        if len(set(cls.fields)) != len(cls.fields):
            report("DuplicateField", cls.name, f"class {cls.name} declares a field twice", cls.loc)
        check_imports(f"class {cls.name}", cls.imports, cls.loc)

    # acyclicity: walk each chain, bounded by the class count
    for cls in world.classes.values():
        seen = {cls.name}
        current = cls.superclass
        while current is not None and current in world.classes:
            if current == cls.name:
                report("CyclicHierarchy", cls.name,
                       f"class {cls.name} is its own transitive superclass", cls.loc)
                break
            if current in seen:
                break
            seen.add(current)
            current = world.classes[current].superclass

    for ref, ext in world.extensions.items():
        if ref.is_global:
            continue
        if ref.name == RESERVED_EXTENSION:
            report("ReservedName", ref, "the extension name 'global' is reserved", ext.loc)
        if len(set(ext.methods)) != len(ext.methods):
            report("DuplicateMethod", ref, f"extension {ref} lists a method twice", ext.loc)
        for mid in ext.methods:
            if mid not in world.methods or mid.extension != ref:
                report("UnknownMethod", ref, f"extension {ref} lists unknown method {mid}", ext.loc)

    for mid, meth in world.methods.items():
        owner = f"method {mid}"
        if meth.extension not in world.extensions:
            report("UnknownExtension", owner, f"{owner} belongs to undeclared extension {meth.extension}", meth.loc)
        elif mid not in world.extensions[meth.extension].methods:
            report("UnknownMethod", owner, f"{owner} is missing from its extension", meth.loc)
        if meth.class_name not in world.classes:
            report("UnknownClass", owner, f"{owner} targets undeclared class {meth.class_name}", meth.loc)
            fields: tuple[str, ...] = ()
        else:
            fields = world.classes[meth.class_name].fields
        if len(meth.params) != meth.signature.arity:
            report("ArityMismatch", owner,
                   f"{owner} declares {len(meth.params)} parameter(s)", meth.loc)
        if len(set(meth.params)) != len(meth.params):
            report("DuplicateParam", owner, f"{owner} declares a parameter twice", meth.loc)
        check_imports(owner, meth.imports, meth.loc)
        _check_body(world, owner, meth.body, set(meth.params), set(fields), meth.loc, report)

    for script in world.scripts.values():
        owner = f"script {script.qualified_name}"
        if script.package not in world.packages:
            report("UnknownPackage", owner, f"{owner} names unknown package {script.package}", script.loc)
        check_imports(owner, script.imports, script.loc)
        _check_body(world, owner, script.body, set(), None, script.loc, report)

    return ValidationReport(tuple(diags))


def _check_body(world, owner, body, params, fields, loc, report):
    for expr in walk_body(body):
        where = expr.loc or loc
        if isinstance(expr, ParamRef) and expr.name not in params:
            report("UnknownName", owner, f"{owner} reads undeclared parameter {expr.name}", where)
        elif isinstance(expr, FieldRef):
            if fields is None:
                report("UnknownName", owner, f"{owner} reads field {expr.name} outside a method", where)
            elif expr.name not in fields:
                report("UnknownName", owner, f"{owner} reads undeclared field {expr.name}", where)
        elif isinstance(expr, New):
            target = world.classes.get(expr.class_name)
            if target is None:
                report("UnknownClass", owner, f"{owner} instantiates undeclared class {expr.class_name}", where)
            elif len(expr.args) != len(target.fields):
                report("ArityMismatch", owner,
                       f"new {expr.class_name} takes {len(target.fields)} argument(s), "
                       f"got {len(expr.args)}", where)
