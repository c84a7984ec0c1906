"""Parser for ``.semx`` world files and the canonical JSON export.

Grammar::

    world     ::= package*
    package   ::= "package" IDENT "{" imports? topitem* "}"
    imports   ::= "imports" extref ("," extref)* ";"      extref ::= IDENT "." IDENT
    topitem   ::= classdef | extdef | scriptdef
    classdef  ::= "class" IDENT ("extends" IDENT)? ("(" IDENT ("," IDENT)* ")")?
                  "{" imports? method* "}"
    extdef    ::= "extension" IDENT "{" extmethod* "}"
    method    ::= "method" IDENT "/" INT "(" params? ")" "{" imports? stmt* "}"
    extmethod ::= "method" IDENT "." IDENT "/" INT "(" params? ")" "{" imports? stmt* "}"
    scriptdef ::= "script" IDENT "{" imports? stmt* "}"
    stmt      ::= expr ";" | "return" expr ";" | "fail" IDENT ";"
    expr      ::= primary ("." IDENT "(" args? ")")*
    primary   ::= "self" | "new" IDENT "(" args? ")" | "field" IDENT | INT | STRING | IDENT
"""
from __future__ import annotations

import json
import re
from dataclasses import dataclass
from importlib import resources
from pathlib import Path
from typing import Optional, Union

from .model import (
    GLOBAL, ClassDef, ExtensionDef, ExtensionRef, MethodDef, PackageDef,
    ScriptDef, World, validate_world,
)
from .syntax import (
    Expr, ExprStmt, Fail, FieldRef, IntLiteral, Loc, New, ParamRef, Return,
    SelfRef, Send, Signature, Stmt, StringLiteral,
)

KEYWORDS = frozenset({
    "package", "imports", "class", "extends", "extension", "method", "script",
    "return", "fail", "self", "new", "field",
})

_TOKEN_RE = re.compile(r"""
    (?P<ws>[ \t\r\n]+)
  | (?P<comment>//[^\n]*)
  | (?P<ident>[A-Za-z][A-Za-z0-9_]*)
  | (?P<int>[0-9]+)
  | (?P<string>"(?:[^"\\\n]|\\.)*")
  | (?P<punct>[{}();,./])
""", re.VERBOSE)


@dataclass(frozen=True)
class ParseDiagnostic:
    line: int
    column: int
    message: str
    kind: str = "syntax"

    def __str__(self) -> str:
        return f"{self.line}:{self.column}: {self.kind} error: {self.message}"


class WorldParseError(Exception):
    """Raised when a source does not denote a valid world."""

    def __init__(self, diagnostics: list[ParseDiagnostic], path: Optional[str] = None):
        self.diagnostics = diagnostics
        self.path = path
        prefix = f"{path}:" if path else ""
        super().__init__("\n".join(prefix + str(d) for d in diagnostics))


@dataclass(frozen=True)
class Token:
    kind: str  # ident, keyword, int, string, punct, eof
    text: str
    loc: Loc


def _position(source: str, offset: int) -> Loc:
    line = source.count("\n", 0, offset) + 1
    column = offset - (source.rfind("\n", 0, offset) + 1) + 1
    return Loc(line, column)


class _SyntaxError(Exception):
    def __init__(self, loc: Loc, message: str):
        super().__init__(message)
        self.loc = loc
        self.message = message


def tokenize(source: str) -> list[Token]:
    tokens: list[Token] = []
    pos = 0
    while pos < len(source):
        m = _TOKEN_RE.match(source, pos)
        if m is None:
            if source[pos] == '"':
                raise _SyntaxError(_position(source, pos), "unterminated string literal")
            raise _SyntaxError(_position(source, pos), f"unexpected character {source[pos]!r}")
        kind = m.lastgroup
        text = m.group()
        if kind == "ident" and text in KEYWORDS:
            kind = "keyword"
        if kind not in ("ws", "comment"):
            tokens.append(Token(kind, text, _position(source, pos)))
        pos = m.end()
    tokens.append(Token("eof", "", _position(source, len(source))))
    return tokens


def _describe(tok: Token) -> str:
    return "end of input" if tok.kind == "eof" else repr(tok.text)


class _Parser:
    def __init__(self, source: str):
        self.tokens = tokenize(source)
        self.pos = 0
        self.packages: list[PackageDef] = []
        self.classes: list[ClassDef] = []
        self.extensions: list[ExtensionDef] = []
        self.methods: list[MethodDef] = []
        self.scripts: list[ScriptDef] = []
        self.duplicates: list[ParseDiagnostic] = []
        self._seen: dict[tuple, Loc] = {}

    # token helpers

    @property
    def tok(self) -> Token:
        return self.tokens[self.pos]

    def at(self, text: str) -> bool:
        return self.tok.text == text and self.tok.kind in ("keyword", "punct")

    def advance(self) -> Token:
        tok = self.tok
        if tok.kind != "eof":
            self.pos += 1
        return tok

    def expect(self, text: str) -> Token:
        if not self.at(text):
            raise _SyntaxError(self.tok.loc, f"expected {text!r}, found {_describe(self.tok)}")
        return self.advance()

    def ident(self, what: str = "identifier") -> Token:
        if self.tok.kind != "ident":
            raise _SyntaxError(self.tok.loc, f"expected {what}, found {_describe(self.tok)}")
        return self.advance()

    def integer(self) -> int:
        if self.tok.kind != "int":
            raise _SyntaxError(self.tok.loc, f"expected arity, found {_describe(self.tok)}")
        return int(self.advance().text)

    def declare(self, key: tuple, loc: Loc, what: str) -> None:
        if key in self._seen:
            first = self._seen[key]
            self.duplicates.append(ParseDiagnostic(
                loc.line, loc.column, f"duplicate {what} (first declared at {first})",
                "resolution"))
        else:
            self._seen[key] = loc

    # grammar

    def world(self) -> None:
        while self.tok.kind != "eof":
            self.package()

    def package(self) -> None:
        start = self.expect("package").loc
        name = self.ident("package name").text
        self.declare(("package", name), start, f"package {name}")
        self.expect("{")
        imports = self.imports()
        classes, exts, scripts = [], [], []
        while not self.at("}"):
            if self.at("class"):
                classes.append(self.classdef(name))
            elif self.at("extension"):
                exts.append(self.extdef(name))
            elif self.at("script"):
                scripts.append(self.scriptdef(name))
            else:
                raise _SyntaxError(
                    self.tok.loc,
                    f"expected 'class', 'extension', 'script' or '}}', found {_describe(self.tok)}")
        self.expect("}")
        self.packages.append(PackageDef(name, imports, tuple(classes), tuple(exts),
                                        tuple(scripts), start))

    def imports(self) -> tuple[ExtensionRef, ...]:
        if not self.at("imports"):
            return ()
        self.advance()
        refs = [self.extref()]
        while self.at(","):
            self.advance()
            refs.append(self.extref())
        self.expect(";")
        return tuple(refs)

    def extref(self) -> ExtensionRef:
        package = self.ident("package name").text
        self.expect(".")
        name = self.ident("extension name").text
        return ExtensionRef(package, name)

    def classdef(self, package: str) -> str:
        start = self.expect("class").loc
        name = self.ident("class name").text
        self.declare(("class", name), start, f"class {name}")
        superclass = None
        if self.at("extends"):
            self.advance()
            superclass = self.ident("superclass name").text
        fields: list[str] = []
        if self.at("("):
            self.advance()
            fields.append(self.ident("field name").text)
            while self.at(","):
                self.advance()
                fields.append(self.ident("field name").text)
            self.expect(")")
        self.expect("{")
        imports = self.imports()
        while not self.at("}"):
            self.method(package, GLOBAL, name)
        self.expect("}")
        self.classes.append(ClassDef(name, package, superclass, tuple(fields), imports, start))
        return name

    def extdef(self, package: str) -> str:
        start = self.expect("extension").loc
        name = self.ident("extension name").text
        ref = ExtensionRef(package, name)
        self.declare(("extension", ref), start, f"extension {ref}")
        self.expect("{")
        ids = []
        while not self.at("}"):
            ids.append(self.method(package, ref, None).id)
        self.expect("}")
        self.extensions.append(ExtensionDef(ref, tuple(ids), start))
        return name

    def method(self, package: str, ext: ExtensionRef, host: Optional[str]) -> MethodDef:
        start = self.expect("method").loc
        if host is None:
            host = self.ident("target class name").text
            self.expect(".")
        selector = self.ident("selector").text
        self.expect("/")
        arity = self.integer()
        self.expect("(")
        params: list[str] = []
        if not self.at(")"):
            params.append(self.ident("parameter name").text)
            while self.at(","):
                self.advance()
                params.append(self.ident("parameter name").text)
        self.expect(")")
        if len(params) != arity:
            raise _SyntaxError(start, f"method {selector}/{arity} declares {len(params)} parameter(s)")
        self.expect("{")
        imports = self.imports()
        body = self.body()
        self.expect("}")
        meth = MethodDef(host, Signature(selector, arity), ext, package,
                         tuple(params), body, imports, start)
        self.declare(("method", meth.id), start, f"method {meth.id}")
        self.methods.append(meth)
        return meth

    def scriptdef(self, package: str) -> str:
        start = self.expect("script").loc
        name = self.ident("script name").text
        self.declare(("script", package, name), start, f"script {package}.{name}")
        self.expect("{")
        imports = self.imports()
        body = self.body()
        self.expect("}")
        self.scripts.append(ScriptDef(name, package, imports, body, start))
        return name

    def body(self) -> tuple[Stmt, ...]:
        stmts: list[Stmt] = []
        while not self.at("}") and self.tok.kind != "eof":
            stmts.append(self.stmt())
        return tuple(stmts)

    def stmt(self) -> Stmt:
        start = self.tok.loc
        if self.at("return"):
            self.advance()
            expr = self.expr()
            self.expect(";")
            return Return(expr, start)
        if self.at("fail"):
            self.advance()
            tag = self.ident("failure tag").text
            self.expect(";")
            return Fail(tag, start)
        expr = self.expr()
        self.expect(";")
        return ExprStmt(expr, start)

    def expr(self) -> Expr:
        expr = self.primary()
        while self.at("."):
            dot = self.advance().loc
            selector = self.ident("selector").text
            args = self.args()
            expr = Send(expr, Signature(selector, len(args)), args, dot)
        return expr

    def args(self) -> tuple[Expr, ...]:
        self.expect("(")
        args: list[Expr] = []
        if not self.at(")"):
            args.append(self.expr())
            while self.at(","):
                self.advance()
                args.append(self.expr())
        self.expect(")")
        return tuple(args)

    def primary(self) -> Expr:
        tok = self.tok
        if self.at("self"):
            self.advance()
            return SelfRef(tok.loc)
        if self.at("new"):
            self.advance()
            name = self.ident("class name").text
            return New(name, self.args(), tok.loc)
        if self.at("field"):
            self.advance()
            return FieldRef(self.ident("field name").text, tok.loc)
        if tok.kind == "int":
            self.advance()
            return IntLiteral(int(tok.text), tok.loc)
        if tok.kind == "string":
            self.advance()
            return StringLiteral(json.loads(tok.text), tok.loc)
        if tok.kind == "ident":
            self.advance()
            return ParamRef(tok.text, tok.loc)
        raise _SyntaxError(tok.loc, f"expected an expression, found {_describe(tok)}")


def parse_world(source: str, path: Optional[str] = None) -> World:
    """Parse and validate ``source``; raise :class:`WorldParseError` on failure."""
    try:
        parser = _Parser(source)
        parser.world()
    except _SyntaxError as err:
        raise WorldParseError(
            [ParseDiagnostic(err.loc.line, err.loc.column, err.message)], path) from None
    if parser.duplicates:
        raise WorldParseError(parser.duplicates, path)
    world = World.build(parser.packages, parser.classes, parser.extensions,
                        parser.methods, parser.scripts)
    report = validate_world(world)
    if not report.ok:
        eof = parser.tokens[-1].loc
        diags = [
            ParseDiagnostic((d.loc or eof).line, (d.loc or eof).column,
                            f"{d.kind}: {d.message}", "resolution")
            for d in report.diagnostics
        ]
        diags.sort(key=lambda d: (d.line, d.column))
        raise WorldParseError(diags, path)
    return world


FIXTURES = ("fig6", "decorators", "selection_example", "aos_oracle")


def fixture_source(name: str) -> str:
    stem = name[:-5] if name.endswith(".semx") else name
    if stem not in FIXTURES:
        raise KeyError(f"unknown fixture {name!r}")
    return resources.files("semx").joinpath("fixtures", f"{stem}.semx").read_text("utf-8")


def load_world(file: Union[str, Path]) -> World:
    """Load a world from a path, falling back to a bundled fixture name."""
    path = Path(file)
    if path.is_file():
        return parse_world(path.read_text("utf-8"), str(path))
    stem = path.name[:-5] if path.name.endswith(".semx") else path.name
    if stem in FIXTURES and path.parent == Path("."):
        return parse_world(fixture_source(stem), f"{stem}.semx")
    raise FileNotFoundError(f"no such world file or fixture: {file}")


def _ref(ref: ExtensionRef) -> str:
    return str(ref)


def export_world(world: World) -> str:
    """Canonical JSON rendering of ``world``; stable byte-for-byte."""
    packages = [
        {
            "name": p.name,
            "imports": [_ref(r) for r in p.imports],
            "classes": sorted(p.classes),
            "extensions": sorted(p.extensions),
            "scripts": sorted(p.scripts),
        }
        for _, p in sorted(world.packages.items())
    ]
    classes = [
        {
            "name": c.name,
            "package": c.package,
            "superclass": c.superclass,
            "fields": list(c.fields),
            "imports": [_ref(r) for r in c.imports],
        }
        for _, c in sorted(world.classes.items())
    ]
    extensions = [
        {
            "ref": _ref(ref),
            "methods": sorted(f"{m.class_name}.{m.signature}" for m in e.methods),
        }
        for ref, e in sorted(world.extensions.items(), key=lambda kv: (not kv[0].is_global, kv[0]))
    ]
    methods = [
        {
            "class": m.class_name,
            "selector": str(m.signature),
            "extension": _ref(m.extension),
            "package": m.package,
            "params": list(m.params),
            "imports": [_ref(r) for r in m.imports],
            "body": [str(s) for s in m.body],
        }
        for _, m in sorted(world.methods.items())
    ]
    scripts = [
        {
            "package": s.package,
            "name": s.name,
            "imports": [_ref(r) for r in s.imports],
            "body": [str(st) for st in s.body],
        }
        for _, s in sorted(world.scripts.items())
    ]
    doc = {
        "packages": packages,
        "classes": classes,
        "extensions": extensions,
        "methods": methods,
        "scripts": scripts,
    }
    return json.dumps(doc, indent=2, ensure_ascii=False) + "\n"
