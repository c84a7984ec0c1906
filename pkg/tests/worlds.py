"""Random world generators shared by the property and acceptance suites.

Each generator takes a ``random.Random`` so the same code can be driven by
a seeded loop or by hypothesis' ``st.randoms()``.
"""
from __future__ import annotations

import random
from dataclasses import dataclass

from semx.analysis import MessageContext
from semx.lookup import Frame
from semx.model import (
    GLOBAL, ClassDef, ExtensionDef, ExtensionRef, MethodDef, PackageDef,
    ScriptDef, World, descendants,
)
from semx.syntax import ExprStmt, New, Return, Send, Signature

SIG = Signature("m", 0)


def _tree(rng: random.Random, n: int) -> list[tuple[str, str | None]]:
    names = ["Object"] + [f"K{k}" for k in range(1, n)]
    return [(name, None if k == 0 else names[rng.randrange(k)])
            for k, name in enumerate(names)]


@dataclass
class AosCase:
    world: World
    mess: MessageContext


def random_clean_case(rng: random.Random, max_classes: int = 8,
                      max_exts: int = 5) -> AosCase:
    """A hierarchy with exactly one definition of ``m/0`` and a message that
    resolves to it under both selection strategies."""
    tree = _tree(rng, rng.randint(1, max_classes))
    user = [ExtensionRef("X", f"e{k}") for k in range(1, rng.randint(0, max_exts) + 1)]
    active = rng.sample(user, rng.randint(0, len(user)))
    exts = tuple(active) + (GLOBAL,)
    c_def = rng.choice(tree)[0]
    ext = rng.choice(exts)
    package = "H" if ext.is_global else "X"
    meth = MethodDef(c_def, SIG, ext, package)
    world = World.build(
        packages=[PackageDef("H", classes=tuple(n for n, _ in tree)),
                  PackageDef("X", extensions=tuple(e.name for e in user))],
        classes=[ClassDef(n, "H", s) for n, s in tree],
        extensions=[ExtensionDef(e, (meth.id,) if e == ext else ()) for e in user],
        methods=[meth],
    )
    receiver = rng.choice(sorted(descendants(world, c_def) | {c_def}))
    return AosCase(world, MessageContext(receiver, SIG, exts))


SELECTORS = [Signature(s, 0) for s in ("a", "b", "c")]


def random_import_world(rng: random.Random, with_imports: bool = True,
                        max_classes: int = 5) -> World:
    """Several packages with extensions, imports at every level, and bodies
    made of zero-argument sends to fresh instances."""
    n_pkgs = rng.randint(1, 3)
    pkgs = [f"P{k}" for k in range(n_pkgs)]
    tree = _tree(rng, rng.randint(1, max_classes))
    class_pkg = {name: ("P0" if name == "Object" else rng.choice(pkgs)) for name, _ in tree}
    class_names = [n for n, _ in tree]

    ext_refs = [ExtensionRef(rng.choice(pkgs), f"x{k}") for k in range(rng.randint(0, 4))]

    def imports():
        if not with_imports or not ext_refs:
            return ()
        return tuple(rng.sample(ext_refs, rng.randint(0, min(2, len(ext_refs)))))

    def body():
        stmts = []
        for _ in range(rng.randint(0, 2)):
            send = Send(New(rng.choice(class_names)), rng.choice(SELECTORS))
            stmts.append(ExprStmt(send))
        if rng.random() < 0.3:
            stmts.append(Return(Send(New(rng.choice(class_names)), rng.choice(SELECTORS))))
        return tuple(stmts)

    methods: dict = {}
    for cls in class_names:
        for sig in SELECTORS:
            if rng.random() < 0.4:
                m = MethodDef(cls, sig, GLOBAL, class_pkg[cls], (), body(), imports())
                methods[m.id] = m
    ext_methods: dict[ExtensionRef, list] = {e: [] for e in ext_refs}
    for ext in ext_refs:
        for _ in range(rng.randint(0, 3)):
            m = MethodDef(rng.choice(class_names), rng.choice(SELECTORS), ext, ext.package,
                          (), body(), imports())
            if m.id not in methods:
                methods[m.id] = m
                ext_methods[ext].append(m.id)

    scripts = [ScriptDef(f"s{k}", rng.choice(pkgs), imports(), body() or
                         (ExprStmt(Send(New(rng.choice(class_names)), rng.choice(SELECTORS))),))
               for k in range(rng.randint(1, 2))]
    packages = [
        PackageDef(p, imports(),
                   tuple(c for c in class_names if class_pkg[c] == p),
                   tuple(e.name for e in ext_refs if e.package == p),
                   tuple(s.name for s in scripts if s.package == p))
        for p in pkgs
    ]
    return World.build(
        packages=packages,
        classes=[ClassDef(n, class_pkg[n], s, (), imports()) for n, s in tree],
        extensions=[ExtensionDef(e, tuple(ext_methods[e])) for e in ext_refs],
        methods=methods.values(),
        scripts=scripts,
    )


def random_stack(rng: random.Random, world: World, max_len: int = 6) -> tuple[Frame, ...]:
    origins = list(world.methods.values()) + list(world.scripts.values())
    return tuple(Frame(rng.choice(origins)) for _ in range(rng.randint(0, max_len)))


def strip_imports(world: World) -> World:
    from dataclasses import replace
    return World(
        packages={k: replace(p, imports=()) for k, p in world.packages.items()},
        classes={k: replace(c, imports=()) for k, c in world.classes.items()},
        extensions=dict(world.extensions),
        methods={k: replace(m, imports=()) for k, m in world.methods.items()},
        scripts={k: replace(s, imports=()) for k, s in world.scripts.items()},
    )
