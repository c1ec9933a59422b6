"""Concrete syntax: rendering and parsing of programs.

    program := "\" name* "->" (block | expr)
    block   := "{" (stmt sep)* expr "}"
    stmt    := "let" name "=" expr | name "<-" expr | "if" expr "==" expr
    expr    := "return" expr | (block | "(" expr ")" | atom) ("." label)*
    atom    := dotted-name "(" [label "=" expr ("," label "=" expr)*] ")" | name

Separators are newlines or semicolons; the parenthesis of a call must
follow the method name directly. Names that are not plain
identifiers (or clash with keywords) are written in backquotes.
"""

from __future__ import annotations

import re
from dataclasses import dataclass

from .terms import Bind, Call, Expr, Guard, Let, Program, Proj, Return, Var

KEYWORDS = {"let", "if", "return"}
_IDENT = re.compile(r"[A-Za-z_][A-Za-z0-9_]*\Z")
_DOTTED = re.compile(r"[A-Za-z_][A-Za-z0-9_]*(\.[A-Za-z_][A-Za-z0-9_]*)*\Z")


class ParseError(ValueError):
    def __init__(self, msg: str, line: int, col: int):
        super().__init__(f"{line}:{col}: {msg}")
        self.line = line
        self.col = col


def _name(s: str) -> str:
    if _IDENT.match(s) and s not in KEYWORDS:
        return s
    if "`" in s or "\n" in s:
        raise ValueError(f"name {s!r} cannot be rendered")
    return f"`{s}`"


def _method(s: str) -> str:
    if _DOTTED.match(s) and not KEYWORDS.intersection(s.split(".")):
        return s
    return _name(s)


def _is_stmt(e: Expr) -> bool:
    return isinstance(e, (Let, Bind, Guard))


def _flatten(e: Expr) -> tuple[list[str], Expr]:
    lines: list[str] = []
    while _is_stmt(e):
        if isinstance(e, Let):
            lines.append(f"let {_name(e.var)} = {render_expr(e.value)}")
        elif isinstance(e, Bind):
            lines.append(f"{_name(e.var)} <- {render_expr(e.source)}")
        else:
            lines.append(f"if {render_expr(e.left)} == {render_expr(e.right)}")
        e = e.body
    return lines, e


def render_expr(e: Expr) -> str:
    if isinstance(e, Var):
        return _name(e.name)
    if isinstance(e, Proj):
        base = render_expr(e.expr)
        if isinstance(e.expr, Return):
            base = f"({base})"
        return f"{base}.{_name(e.label)}"
    if isinstance(e, Call):
        args = ", ".join(f"{_name(lb)}={render_expr(a)}" for lb, a in e.args)
        return f"{_method(e.method)}({args})"
    if isinstance(e, Return):
        return f"return {render_expr(e.expr)}"
    lines, last = _flatten(e)
    return "{ " + "; ".join(lines + [render_expr(last)]) + " }"


def render_program(prog: Program) -> str:
    header = "\\" + " ".join(_name(p) for p in prog.params) + " -> {"
    lines, last = _flatten(prog.body)
    if not lines:
        return header[:-1] + "{ " + render_expr(last) + " }"
    body = "".join(f"  {ln}\n" for ln in lines + [render_expr(last)])
    return f"{header}\n{body}}}"


# -- parsing -----------------------------------------------------------------

_TOKEN = re.compile(
    r"(?P<ws>[ \t\r\n]+)|(?P<comment>#[^\n]*)|(?P<bq>`[^`\n]*`)|(?P<ident>[A-Za-z_][A-Za-z0-9_]*)"
    r"|(?P<op>->|<-|==|[\\=(){},.;])"
)


@dataclass
class _Tok:
    kind: str  # "name", "kw", "op", "eof"
    text: str
    line: int
    col: int
    quoted: bool = False
    gap: bool = False  # whitespace or a comment right before the token


def _tokenize(text: str) -> list[_Tok]:
    toks: list[_Tok] = []
    pos, line, col = 0, 1, 1
    gap = False
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if m is None:
            raise ParseError(f"unexpected character {text[pos]!r}", line, col)
        s = m.group()
        kind = m.lastgroup
        if kind == "bq":
            toks.append(_Tok("name", s[1:-1], line, col, quoted=True, gap=gap))
        elif kind == "ident":
            toks.append(_Tok("kw" if s in KEYWORDS else "name", s, line, col, gap=gap))
        elif kind == "op":
            toks.append(_Tok("op", s, line, col, gap=gap))
        gap = kind in ("ws", "comment")
        for ch in s:
            if ch == "\n":
                line, col = line + 1, 1
            else:
                col += 1
        pos = m.end()
    toks.append(_Tok("eof", "", line, col))
    return toks


class _Parser:
    def __init__(self, text: str):
        self.toks = _tokenize(text)
        self.i = 0

    def peek(self, k: int = 0) -> _Tok:
        return self.toks[min(self.i + k, len(self.toks) - 1)]

    def next(self) -> _Tok:
        t = self.peek()
        self.i += 1
        return t

    def error(self, msg: str, tok: _Tok | None = None):
        tok = tok or self.peek()
        found = tok.text or "end of input"
        raise ParseError(f"{msg}, found {found!r}", tok.line, tok.col)

    def at(self, kind: str, text: str | None = None) -> bool:
        t = self.peek()
        return t.kind == kind and (text is None or t.text == text)

    def expect_op(self, text: str) -> _Tok:
        if not self.at("op", text):
            self.error(f"expected {text!r}")
        return self.next()

    def name(self) -> str:
        if not self.at("name"):
            self.error("expected a name")
        return self.next().text

    def program(self) -> Program:
        self.expect_op("\\")
        params = []
        while self.at("name"):
            params.append(self.next().text)
        self.expect_op("->")
        body = self.expr()
        if not self.at("eof"):
            self.error("expected end of input")
        return Program(tuple(params), body)

    def skip_seps(self) -> None:
        while self.at("op", ";"):
            self.next()

    def block(self) -> Expr:
        self.expect_op("{")
        stmts: list[tuple] = []
        while True:
            self.skip_seps()
            t = self.peek()
            if t.kind == "kw" and t.text == "let":
                self.next()
                var = self.name()
                self.expect_op("=")
                stmts.append(("let", var, self.expr()))
            elif t.kind == "kw" and t.text == "if":
                self.next()
                left = self.expr()
                self.expect_op("==")
                stmts.append(("if", left, self.expr()))
            elif t.kind == "name" and self.peek(1).kind == "op" and self.peek(1).text == "<-":
                var = self.next().text
                self.next()
                stmts.append(("bind", var, self.expr()))
            else:
                if self.at("op", "}"):
                    self.error("block must end with an expression")
                last = self.expr()
                self.skip_seps()
                self.expect_op("}")
                break
        for kind, a, b in reversed(stmts):
            if kind == "let":
                last = Let(a, b, last)
            elif kind == "bind":
                last = Bind(a, b, last)
            else:
                last = Guard(a, b, last)
        return last

    def expr(self) -> Expr:
        if self.at("kw", "return"):
            self.next()
            return Return(self.expr())
        if self.at("op", "{"):
            e = self.block()
        elif self.at("op", "("):
            self.next()
            e = self.expr()
            self.expect_op(")")
        else:
            e = self.atom()
        while self.at("op", ".") and self.peek(1).kind == "name":
            self.next()
            e = Proj(e, self.next().text)
        return e

    def atom(self) -> Expr:
        if not self.at("name"):
            self.error("expected an expression")
        first = self.next()
        parts = [first.text]
        j = 0
        if not first.quoted:
            # a dotted name directly followed by "(" is a method call
            while (
                self.peek(j).kind == "op"
                and self.peek(j).text == "."
                and self.peek(j + 1).kind == "name"
                and not self.peek(j + 1).quoted
            ):
                j += 2
            if self.peek(j).kind == "op" and self.peek(j).text == "(" and not self.peek(j).gap:
                parts += [self.peek(k).text for k in range(1, j, 2)]
                self.i += j
        if self.at("op", "(") and not self.peek().gap:
            return self.call(".".join(parts))
        return Var(first.text)

    def call(self, method: str) -> Call:
        self.expect_op("(")
        args = []
        while not self.at("op", ")"):
            label = self.name()
            self.expect_op("=")
            args.append((label, self.expr()))
            if not self.at("op", ","):
                break
            self.next()
        self.expect_op(")")
        return Call(method, tuple(args))


def parse_program(text: str) -> Program:
    return _Parser(text).program()


def parse_expr(text: str) -> Expr:
    p = _Parser(text)
    e = p.expr()
    if not p.at("eof"):
        p.error("expected end of input")
    return e
