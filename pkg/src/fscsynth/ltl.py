"""LTL formulas and their semantics on ultimately periodic words.

A formula is an immutable AST over the core operators (true, atomic
proposition, not, and, next, until) plus the usual derived ones (or,
implies, eventually, always).  Satisfaction is decided on lasso words
``prefix . cycle^omega`` by a least-fixpoint evaluation over the finitely
many distinct positions.
"""

from dataclasses import dataclass


class LtlError(ValueError):
    pass


class LtlSyntaxError(LtlError):
    def __init__(self, message, position):
        super().__init__(f"{message} (at position {position})")
        self.position = position


@dataclass(frozen=True)
class Formula:
    pass


@dataclass(frozen=True)
class TrueFormula(Formula):
    pass


@dataclass(frozen=True)
class Atom(Formula):
    name: str


@dataclass(frozen=True)
class Not(Formula):
    operand: Formula


@dataclass(frozen=True)
class And(Formula):
    left: Formula
    right: Formula


@dataclass(frozen=True)
class Or(Formula):
    left: Formula
    right: Formula


@dataclass(frozen=True)
class Implies(Formula):
    left: Formula
    right: Formula


@dataclass(frozen=True)
class Next(Formula):
    operand: Formula


@dataclass(frozen=True)
class Until(Formula):
    left: Formula
    right: Formula


@dataclass(frozen=True)
class Eventually(Formula):
    operand: Formula


@dataclass(frozen=True)
class Always(Formula):
    operand: Formula


@dataclass(frozen=True)
class LassoWord:
    """An infinite word ``prefix . cycle^omega`` over subsets of atomic props."""

    prefix: tuple
    cycle: tuple

    def __post_init__(self):
        object.__setattr__(self, "prefix", tuple(frozenset(x) for x in self.prefix))
        object.__setattr__(self, "cycle", tuple(frozenset(x) for x in self.cycle))
        if len(self.cycle) < 1:
            raise LtlError("lasso cycle must be nonempty")

    def __len__(self):
        return len(self.prefix) + len(self.cycle)

    def letter(self, p):
        """Letter at (canonical) position p of the infinite word."""
        np_, nc = len(self.prefix), len(self.cycle)
        if p < np_:
            return self.prefix[p]
        return self.cycle[(p - np_) % nc]

    def canonical(self, p):
        """Fold a position of the infinite word into [0, |prefix|+|cycle|)."""
        np_, nc = len(self.prefix), len(self.cycle)
        if p < np_:
            return p
        return np_ + (p - np_) % nc


def atoms(f: Formula) -> frozenset:
    """Names of all atomic propositions occurring in f."""
    if isinstance(f, Atom):
        return frozenset([f.name])
    if isinstance(f, (Not, Next, Eventually, Always)):
        return atoms(f.operand)
    if isinstance(f, (And, Or, Implies, Until)):
        return atoms(f.left) | atoms(f.right)
    return frozenset()


def expand(f: Formula) -> Formula:
    """Rewrite derived operators into the core fragment.

    or  := not(not a and not b)
    =>  := or(not a, b)
    F a := true U a
    G a := not F not a
    """
    if isinstance(f, (TrueFormula, Atom)):
        return f
    if isinstance(f, Not):
        return Not(expand(f.operand))
    if isinstance(f, And):
        return And(expand(f.left), expand(f.right))
    if isinstance(f, Next):
        return Next(expand(f.operand))
    if isinstance(f, Until):
        return Until(expand(f.left), expand(f.right))
    if isinstance(f, Or):
        return Not(And(Not(expand(f.left)), Not(expand(f.right))))
    if isinstance(f, Implies):
        return expand(Or(Not(f.left), f.right))
    if isinstance(f, Eventually):
        return Until(TrueFormula(), expand(f.operand))
    if isinstance(f, Always):
        return Not(Until(TrueFormula(), Not(expand(f.operand))))
    raise LtlError(f"unknown formula node {f!r}")


# --- parsing ----------------------------------------------------------------

_KEYWORDS = {"G", "F", "X", "U", "true"}


def _tokenize(text):
    tokens = []
    i, n = 0, len(text)
    while i < n:
        c = text[i]
        if c.isspace():
            i += 1
            continue
        if c in "()&|!":
            tokens.append((c, c, i))
            i += 1
        elif text.startswith("->", i):
            tokens.append(("->", "->", i))
            i += 2
        elif c.isalpha() or c == "_":
            j = i
            while j < n and (text[j].isalnum() or text[j] == "_"):
                j += 1
            word = text[i:j]
            kind = word if word in _KEYWORDS else "ident"
            tokens.append((kind, word, i))
            i = j
        else:
            raise LtlSyntaxError(f"unexpected character {c!r}", i)
    tokens.append(("end", "", n))
    return tokens


class _Parser:
    """Recursive descent with precedence unary > U > & > | > ->."""

    def __init__(self, tokens, ap_set):
        self.tokens = tokens
        self.pos = 0
        self.ap_set = ap_set

    def peek(self):
        return self.tokens[self.pos]

    def take(self, kind=None):
        tok = self.tokens[self.pos]
        if kind is not None and tok[0] != kind:
            raise LtlSyntaxError(f"expected {kind!r}, found {tok[1]!r}", tok[2])
        self.pos += 1
        return tok

    def parse(self):
        f = self.implies()
        tok = self.peek()
        if tok[0] != "end":
            raise LtlSyntaxError(f"trailing input {tok[1]!r}", tok[2])
        return f

    def implies(self):
        left = self.disjunction()
        if self.peek()[0] == "->":
            self.take()
            return Implies(left, self.implies())
        return left

    def disjunction(self):
        f = self.conjunction()
        while self.peek()[0] == "|":
            self.take()
            f = Or(f, self.conjunction())
        return f

    def conjunction(self):
        f = self.until()
        while self.peek()[0] == "&":
            self.take()
            f = And(f, self.until())
        return f

    def until(self):
        left = self.unary()
        if self.peek()[0] == "U":
            self.take()
            return Until(left, self.until())
        return left

    def unary(self):
        kind, _, pos = self.peek()
        if kind == "!":
            self.take()
            return Not(self.unary())
        if kind == "X":
            self.take()
            return Next(self.unary())
        if kind == "F":
            self.take()
            return Eventually(self.unary())
        if kind == "G":
            self.take()
            return Always(self.unary())
        if kind == "true":
            self.take()
            return TrueFormula()
        if kind == "ident":
            _, name, pos = self.take()
            if name not in self.ap_set:
                raise LtlSyntaxError(f"unknown atomic proposition {name!r}", pos)
            return Atom(name)
        if kind == "(":
            self.take()
            f = self.implies()
            self.take(")")
            return f
        raise LtlSyntaxError(f"unexpected token {self.peek()[1]!r}", pos)


def parse_ltl(text: str, ap_set) -> Formula:
    """Parse an LTL formula; identifiers are checked against ap_set."""
    if not text.strip():
        raise LtlSyntaxError("empty formula", 0)
    return _Parser(_tokenize(text), frozenset(ap_set)).parse()


def pretty_print(f: Formula) -> str:
    """Render a formula so that parse_ltl(pretty_print(f)) == f."""
    if isinstance(f, TrueFormula):
        return "true"
    if isinstance(f, Atom):
        return f.name
    if isinstance(f, Not):
        return f"! ({pretty_print(f.operand)})"
    if isinstance(f, Next):
        return f"X ({pretty_print(f.operand)})"
    if isinstance(f, Eventually):
        return f"F ({pretty_print(f.operand)})"
    if isinstance(f, Always):
        return f"G ({pretty_print(f.operand)})"
    if isinstance(f, And):
        return f"({pretty_print(f.left)}) & ({pretty_print(f.right)})"
    if isinstance(f, Or):
        return f"({pretty_print(f.left)}) | ({pretty_print(f.right)})"
    if isinstance(f, Implies):
        return f"({pretty_print(f.left)}) -> ({pretty_print(f.right)})"
    if isinstance(f, Until):
        return f"({pretty_print(f.left)}) U ({pretty_print(f.right)})"
    raise LtlError(f"unknown formula node {f!r}")


# --- semantics --------------------------------------------------------------


def eval_lasso(f: Formula, w: LassoWord, ap=None) -> bool:
    """Decide whether the infinite word represented by w satisfies f.

    Evaluation works on the canonical positions 0..|prefix|+|cycle|-1,
    wrapping position p to |prefix| + (p-|prefix|) mod |cycle| past the
    prefix.  Until is resolved by a least fixpoint over those positions.
    """
    if ap is not None:
        universe = frozenset(ap)
        for letter in w.prefix + w.cycle:
            if not letter <= universe:
                raise LtlError(f"letter {sorted(letter)} outside AP universe")
    return _eval_core(expand(f), w)


def _eval_core(f, w):
    n = len(w)
    succ = [w.canonical(p + 1) for p in range(n)]

    def table(g):
        if isinstance(g, TrueFormula):
            return [True] * n
        if isinstance(g, Atom):
            return [g.name in w.letter(p) for p in range(n)]
        if isinstance(g, Not):
            t = table(g.operand)
            return [not v for v in t]
        if isinstance(g, And):
            a, b = table(g.left), table(g.right)
            return [x and y for x, y in zip(a, b)]
        if isinstance(g, Next):
            t = table(g.operand)
            return [t[succ[p]] for p in range(n)]
        if isinstance(g, Until):
            a, b = table(g.left), table(g.right)
            val = [False] * n
            for _ in range(n + 1):
                new = [b[p] or (a[p] and val[succ[p]]) for p in range(n)]
                if new == val:
                    break
                val = new
            return val
        raise LtlError(f"non-core node {g!r} after expansion")

    return table(f)[0]
