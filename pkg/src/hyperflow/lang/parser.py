"""Tokenizer and recursive-descent parser for `.hprog` sources.

The grammar is documented in docs/grammar.md.  The parser folds a unary
minus applied to a numeric literal into the literal itself, so negative
values round-trip through the pretty-printer.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from ..errors import HprogSyntaxError
from ..probcore import Domain, Value, vbool, vnum, vsym
from . import ast as A

KEYWORDS = {
    "vis", "hid", "skip", "if", "then", "else", "fi", "atomic", "local",
    "in", "reveal", "uniform", "true", "false", "div", "mod", "and", "or",
    "xor", "not",
}

_SYMBOLS = [
    ":=", "<-", "..", "!=", "<=", ">=",
    "{", "}", "(", ")", "[", "]", ",", ";", ":", "@", "=", "<", ">",
    "+", "-", "*", "/",
]


@dataclass
class Token:
    kind: str  # 'ident' | 'int' | 'kw' | symbol text | 'eof'
    text: str
    line: int
    col: int


def tokenize(src: str) -> list[Token]:
    toks: list[Token] = []
    i, line, col = 0, 1, 1
    n = len(src)
    while i < n:
        c = src[i]
        if c == "\n":
            i += 1
            line += 1
            col = 1
            continue
        if c in " \t\r":
            i += 1
            col += 1
            continue
        if src.startswith("//", i):
            while i < n and src[i] != "\n":
                i += 1
            continue
        if c.isdigit():
            j = i
            while j < n and src[j].isdigit():
                j += 1
            toks.append(Token("int", src[i:j], line, col))
            col += j - i
            i = j
            continue
        if c.isalpha() or c == "_":
            j = i
            while j < n and (src[j].isalnum() or src[j] == "_"):
                j += 1
            word = src[i:j]
            toks.append(Token("kw" if word in KEYWORDS else "ident", word, line, col))
            col += j - i
            i = j
            continue
        for sym in _SYMBOLS:
            if src.startswith(sym, i):
                toks.append(Token(sym, sym, line, col))
                col += len(sym)
                i += len(sym)
                break
        else:
            raise HprogSyntaxError(f"unexpected character {c!r}", line, col)
    toks.append(Token("eof", "", line, col))
    return toks


class Parser:
    def __init__(self, src: str):
        self.toks = tokenize(src)
        self.i = 0

    # -- token helpers ----------------------------------------------------

    def peek(self, ahead=0) -> Token:
        return self.toks[min(self.i + ahead, len(self.toks) - 1)]

    def next(self) -> Token:
        t = self.toks[self.i]
        self.i += 1
        return t

    def at(self, kind: str, text: str | None = None) -> bool:
        t = self.peek()
        return t.kind == kind and (text is None or t.text == text)

    def at_kw(self, word: str) -> bool:
        return self.at("kw", word)

    def expect(self, kind: str, text: str | None = None) -> Token:
        t = self.peek()
        if t.kind != kind or (text is not None and t.text != text):
            want = text or kind
            raise HprogSyntaxError(f"expected {want!r}, found {t.text or t.kind!r}", t.line, t.col)
        return self.next()

    def expect_kw(self, word: str) -> Token:
        t = self.peek()
        if not (t.kind == "kw" and t.text == word):
            raise HprogSyntaxError(f"expected {word!r}, found {t.text or t.kind!r}", t.line, t.col)
        return self.next()

    def pos(self) -> A.Pos:
        t = self.peek()
        return A.Pos(t.line, t.col)

    def fail(self, msg: str):
        t = self.peek()
        raise HprogSyntaxError(msg, t.line, t.col)

    # -- module -----------------------------------------------------------

    def parse_module(self) -> A.Module:
        decls: list[A.VarDecl] = []
        while self.at_kw("vis") or self.at_kw("hid"):
            decls.extend(self.parse_decl_line())
        body = self.parse_stmt()
        self.expect("eof")
        return A.Module(tuple(decls), body)

    def parse_decl_line(self) -> list[A.VarDecl]:
        pos = self.pos()
        visibility = self.parse_visibility()
        names = [self.expect("ident").text]
        while self.at(","):
            self.next()
            names.append(self.expect("ident").text)
        self.expect(":")
        domain_values = self.parse_domain_values()
        self.expect(";")
        return [
            A.VarDecl(name, Domain(name, domain_values), visibility, pos)
            for name in names
        ]

    def parse_visibility(self) -> A.Visibility:
        if self.at_kw("hid"):
            self.next()
            return A.HID
        self.expect_kw("vis")
        if self.at("{"):
            self.next()
            agents = [self.expect("ident").text]
            while self.at(","):
                self.next()
                agents.append(self.expect("ident").text)
            self.expect("}")
            return A.Visibility("vis", tuple(agents))
        return A.VIS

    def parse_domain_values(self) -> tuple[Value, ...]:
        self.expect("{")
        first = self.parse_domain_value()
        if self.at(".."):
            self.next()
            last = self.parse_domain_value()
            self.expect("}")
            if first.kind != "num" or last.kind != "num" or first.payload.denominator != 1 or last.payload.denominator != 1:
                self.fail("range domains need integer endpoints")
            lo, hi = int(first.payload), int(last.payload)
            if lo > hi:
                self.fail("empty range domain")
            return tuple(vnum(k) for k in range(lo, hi + 1))
        values = [first]
        while self.at(","):
            self.next()
            values.append(self.parse_domain_value())
        self.expect("}")
        return tuple(values)

    def parse_domain_value(self) -> Value:
        neg = False
        if self.at("-"):
            self.next()
            neg = True
        t = self.peek()
        if t.kind == "int":
            self.next()
            num = int(t.text)
            if self.at("/"):
                self.next()
                den = int(self.expect("int").text)
                q = Fraction(num, den)
            else:
                q = Fraction(num)
            return vnum(-q if neg else q)
        if neg:
            self.fail("expected a number after '-'")
        if t.kind == "kw" and t.text in ("true", "false"):
            self.next()
            return vbool(t.text == "true")
        if t.kind == "ident":
            self.next()
            return vsym(t.text)
        self.fail("expected a domain value")

    # -- statements ---------------------------------------------------------

    def parse_stmt(self) -> A.Program:
        parts = [self.parse_choice_stmt()]
        while self.at(";"):
            self.next()
            parts.append(self.parse_choice_stmt())
        return A.seq_of(*parts)

    def parse_choice_stmt(self) -> A.Program:
        pos = self.pos()
        left = self.parse_atom_stmt()
        if self.at("["):
            self.next()
            prob = self.parse_expr()
            self.expect("]")
            right = self.parse_atom_stmt()
            return A.GeneralChoice(left, prob, right, pos)
        return left

    def parse_atom_stmt(self) -> A.Program:
        pos = self.pos()
        if self.at_kw("skip"):
            self.next()
            return A.Skip(pos)
        if self.at_kw("reveal"):
            self.next()
            return A.Reveal(self.parse_expr(), pos)
        if self.at_kw("atomic"):
            self.next()
            self.expect("{")
            body = self.parse_stmt()
            self.expect("}")
            return A.Atomic(body, pos)
        if self.at_kw("if"):
            self.next()
            guard = self.parse_expr()
            self.expect_kw("then")
            then_branch = self.parse_stmt()
            self.expect_kw("else")
            else_branch = self.parse_stmt()
            self.expect_kw("fi")
            return A.Cond(guard, then_branch, else_branch, pos)
        if self.at_kw("local"):
            self.next()
            decls = [self.parse_local_decl()]
            while self.at(","):
                self.next()
                decls.append(self.parse_local_decl())
            self.expect_kw("in")
            self.expect("{")
            body = self.parse_stmt()
            self.expect("}")
            return A.LocalBlock(tuple(decls), body, pos)
        if self.at("{"):
            self.next()
            body = self.parse_stmt()
            self.expect("}")
            return body
        if self.at("("):
            self.next()
            first = self.expect("ident").text
            self.expect_kw("xor")
            second = self.expect("ident").text
            self.expect(")")
            self.expect(":=")
            return A.XorAssign(first, second, self.parse_expr(), pos)
        if self.at("ident"):
            name = self.next().text
            if self.at(":="):
                self.next()
                return A.Assign(name, self.parse_expr(), pos)
            if self.at("<-"):
                self.next()
                return A.Choose(name, self.parse_dist(), pos)
            self.fail("expected ':=' or '<-' after variable name")
        self.fail("expected a statement")

    def parse_local_decl(self) -> A.LocalDecl:
        pos = self.pos()
        visibility = self.parse_visibility()
        name = self.expect("ident").text
        self.expect(":")
        values = self.parse_domain_values()
        init = None
        if self.at(":="):
            self.next()
            init = self.parse_dist()
        return A.LocalDecl(A.VarDecl(name, Domain(name, values), visibility, pos), init)

    # -- distribution expressions -------------------------------------------

    def parse_dist(self) -> A.DistExpr:
        pos = self.pos()
        if self.at_kw("uniform"):
            self.next()
            self.expect("{")
            exprs = [self.parse_expr()]
            while self.at(","):
                self.next()
                exprs.append(self.parse_expr())
            self.expect("}")
            return A.DistUniform(tuple(exprs), pos)
        if self.at("{"):
            self.next()
            entries = [self.parse_dist_entry()]
            while self.at(","):
                self.next()
                entries.append(self.parse_dist_entry())
            self.expect("}")
            return A.DistExplicit(tuple(entries), pos)
        if self.at("("):
            saved = self.i
            try:
                self.next()
                then_branch = self.parse_dist()
                if self.at_kw("if"):
                    self.next()
                    guard = self.parse_expr()
                    self.expect_kw("else")
                    else_branch = self.parse_dist()
                    self.expect(")")
                    return A.DistCond(then_branch, guard, else_branch, pos)
                raise HprogSyntaxError("not a conditional distribution", 0, 0)
            except HprogSyntaxError:
                self.i = saved  # plain parenthesised expression
        # point / infix-choice sugar over expressions
        first = self.parse_expr()
        if self.at("["):
            self.next()
            if self.at("]"):  # n-ary uniform chain: e [] e [] e
                self.next()
                exprs = [first, self.parse_expr()]
                while self.at("["):
                    self.next()
                    self.expect("]")
                    exprs.append(self.parse_expr())
                return A.DistUniform(tuple(exprs), pos)
            prob = self.parse_expr()
            self.expect("]")
            second = self.parse_expr()
            one = A.Lit(vnum(1))
            return A.DistExplicit(
                ((first, prob), (second, A.Binop("-", one, prob))), pos
            )
        return A.DistExplicit(((first, A.Lit(vnum(1))),), pos)

    def parse_dist_entry(self) -> tuple[A.Expr, A.Expr]:
        value = self.parse_expr()
        self.expect("@")
        prob = self.parse_expr()
        return (value, prob)

    # -- expressions ----------------------------------------------------------

    def parse_expr(self) -> A.Expr:
        return self.parse_ifexpr()

    def parse_ifexpr(self) -> A.Expr:
        pos = self.pos()
        e = self.parse_or()
        if self.at_kw("if"):
            self.next()
            guard = self.parse_or()
            self.expect_kw("else")
            else_branch = self.parse_ifexpr()
            return A.IfExpr(e, guard, else_branch, pos)
        return e

    def _binop_chain(self, sub, ops):
        e = sub()
        while True:
            t = self.peek()
            op = t.text if (t.kind == "kw" or t.kind in ops) and t.text in ops else None
            if op is None:
                return e
            self.next()
            e = A.Binop(op, e, sub(), A.Pos(t.line, t.col))

    def parse_or(self) -> A.Expr:
        return self._binop_chain(self.parse_xor, ("or",))

    def parse_xor(self) -> A.Expr:
        return self._binop_chain(self.parse_and, ("xor",))

    def parse_and(self) -> A.Expr:
        return self._binop_chain(self.parse_not, ("and",))

    def parse_not(self) -> A.Expr:
        if self.at_kw("not"):
            t = self.next()
            return A.Unop("not", self.parse_not(), A.Pos(t.line, t.col))
        return self.parse_cmp()

    def parse_cmp(self) -> A.Expr:
        e = self.parse_add()
        t = self.peek()
        if t.text in ("=", "!=", "<", "<=", ">", ">="):
            self.next()
            return A.Binop(t.text, e, self.parse_add(), A.Pos(t.line, t.col))
        return e

    def parse_add(self) -> A.Expr:
        return self._binop_chain(self.parse_mul, ("+", "-"))

    def parse_mul(self) -> A.Expr:
        return self._binop_chain(self.parse_unary, ("*", "div", "mod", "/"))

    def parse_unary(self) -> A.Expr:
        if self.at("-"):
            t = self.next()
            operand = self.parse_unary()
            # fold a negated numeric literal so "-1" round-trips
            if isinstance(operand, A.Lit) and operand.value.kind == "num":
                return A.Lit(vnum(-operand.value.payload), A.Pos(t.line, t.col))
            return A.Unop("-", operand, A.Pos(t.line, t.col))
        return self.parse_primary()

    def parse_primary(self) -> A.Expr:
        t = self.peek()
        pos = A.Pos(t.line, t.col)
        if t.kind == "int":
            self.next()
            return A.Lit(vnum(int(t.text)), pos)
        if t.kind == "kw" and t.text in ("true", "false"):
            self.next()
            return A.Lit(vbool(t.text == "true"), pos)
        if t.kind == "ident":
            self.next()
            return A.Name(t.text, pos)
        if t.kind == "(":
            self.next()
            e = self.parse_expr()
            self.expect(")")
            return e
        self.fail("expected an expression")


def parse(src: str) -> A.Module:
    """Parse a complete `.hprog` source into declarations plus program."""
    return Parser(src).parse_module()


def parse_program(src: str) -> A.Program:
    """Parse a bare statement (no declarations); useful in tests."""
    p = Parser(src)
    body = p.parse_stmt()
    p.expect("eof")
    return body
