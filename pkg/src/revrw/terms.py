"""First-order terms, positions, substitutions, matching and unification.

Terms are immutable values; sharing subterms is allowed and never observable.
Positions are 1-based index paths; the empty path addresses the root.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Iterator, Mapping, Union

from .errors import InvalidPosition, NotGround, OverlappingDomains

CONSTRUCTOR = "constructor"
DEFINED = "defined"
TUPLE = "tuple"
TRACE = "trace-constructor"

# Tuple and trace constructors count as constructors in transformed systems.
CONSTRUCTOR_KINDS = frozenset({CONSTRUCTOR, TUPLE, TRACE})


@dataclass(frozen=True, slots=True)
class Symbol:
    """A ranked function symbol. Identity is (name, arity); kind is metadata
    assigned when a system is classified."""

    name: str
    arity: int
    kind: str = field(default=CONSTRUCTOR, compare=False)

    def __call__(self, *args: "Term") -> "App":
        return App(self, tuple(args))

    @property
    def is_constructor_like(self) -> bool:
        return self.kind in CONSTRUCTOR_KINDS

    def __repr__(self) -> str:
        return f"{self.name}/{self.arity}"


@dataclass(frozen=True, slots=True)
class Var:
    name: str

    def __repr__(self) -> str:
        return self.name


@dataclass(frozen=True, slots=True)
class App:
    symbol: Symbol
    args: tuple["Term", ...] = ()
    ground: bool = field(init=False, compare=False, repr=False)

    def __post_init__(self) -> None:
        if not isinstance(self.args, tuple):
            object.__setattr__(self, "args", tuple(self.args))
        if len(self.args) != self.symbol.arity:
            raise ValueError(
                f"symbol {self.symbol!r} applied to {len(self.args)} arguments"
            )
        object.__setattr__(
            self, "ground", all(is_ground(a) for a in self.args)
        )

    def __repr__(self) -> str:
        return format_term(self)


Term = Union[Var, App]

Position = tuple[int, ...]
ROOT: Position = ()


def is_ground(t: Term) -> bool:
    return t.ground if isinstance(t, App) else False


def term_vars(t: Term) -> set[str]:
    """Set of variable names occurring in t."""
    out: set[str] = set()
    stack = [t]
    while stack:
        u = stack.pop()
        if isinstance(u, Var):
            out.add(u.name)
        elif not u.ground:
            stack.extend(u.args)
    return out


def vars_of(*terms: Term) -> set[str]:
    out: set[str] = set()
    for t in terms:
        out |= term_vars(t)
    return out


def is_constructor_term(t: Term) -> bool:
    """True iff every symbol in t is a constructor (tuple and trace
    constructors included)."""
    stack = [t]
    while stack:
        u = stack.pop()
        if isinstance(u, App):
            if not u.symbol.is_constructor_like:
                return False
            stack.extend(u.args)
    return True


def is_basic_term(t: Term) -> bool:
    """Defined root symbol applied to constructor terms."""
    return (
        isinstance(t, App)
        and t.symbol.kind == DEFINED
        and all(is_constructor_term(a) for a in t.args)
    )


def term_size(t: Term) -> int:
    n = 0
    stack = [t]
    while stack:
        u = stack.pop()
        n += 1
        if isinstance(u, App):
            stack.extend(u.args)
    return n


def term_depth(t: Term) -> int:
    if isinstance(u := t, Var) or not u.args:
        return 1
    return 1 + max(term_depth(a) for a in u.args)


def positions(t: Term) -> Iterator[Position]:
    """All positions of t in post-order (leftmost-innermost first, root last)."""
    if isinstance(t, App):
        for i, a in enumerate(t.args, 1):
            for q in positions(a):
                yield (i, *q)
    yield ROOT


def subterm(t: Term, p: Position) -> Term:
    for i in p:
        if not isinstance(t, App) or not 1 <= i <= len(t.args):
            raise InvalidPosition(f"position {format_position(p)} not in {format_term(t)}")
        t = t.args[i - 1]
    return t


def replace(t: Term, p: Position, u: Term) -> Term:
    if not p:
        return u
    i = p[0]
    if not isinstance(t, App) or not 1 <= i <= len(t.args):
        raise InvalidPosition(f"position {format_position(p)} not in {format_term(t)}")
    args = list(t.args)
    args[i - 1] = replace(args[i - 1], p[1:], u)
    return App(t.symbol, tuple(args))


def parse_position(text: str) -> Position:
    text = text.strip()
    if text in ("e", "ε", ""):
        return ROOT
    try:
        path = tuple(int(part) for part in text.split("."))
    except ValueError:
        raise InvalidPosition(f"bad position syntax: {text!r}") from None
    if any(i < 1 for i in path):
        raise InvalidPosition(f"position indices are 1-based: {text!r}")
    return path


def format_position(p: Position) -> str:
    return ".".join(str(i) for i in p) if p else "e"


class Subst:
    """A finite map from variable names to terms.

    Identity bindings are dropped on construction, so the domain is exactly
    the set of variables the substitution moves. Instances are immutable.
    """

    __slots__ = ("_map",)

    def __init__(self, bindings: Mapping[str, Term] | Iterable[tuple[str, Term]] = ()):
        m = dict(bindings)
        drop = [x for x, t in m.items() if isinstance(t, Var) and t.name == x]
        for x in drop:
            del m[x]
        object.__setattr__(self, "_map", m)

    @property
    def domain(self) -> frozenset[str]:
        return frozenset(self._map)

    def get(self, name: str) -> Term | None:
        return self._map.get(name)

    def items(self) -> list[tuple[str, Term]]:
        """Bindings in lexicographic (code-point) order of variable names."""
        return sorted(self._map.items())

    def apply(self, t: Term) -> Term:
        if isinstance(t, Var):
            return self._map.get(t.name, t)
        if t.ground or not self._map:
            return t
        return App(t.symbol, tuple(self.apply(a) for a in t.args))

    def restrict(self, names: Iterable[str]) -> "Subst":
        keep = set(names)
        return Subst({x: t for x, t in self._map.items() if x in keep})

    def union(self, other: "Subst") -> "Subst":
        overlap = self.domain & other.domain
        if overlap:
            raise OverlappingDomains(f"domains overlap on {sorted(overlap)}")
        merged = dict(self._map)
        merged.update(other._map)
        return Subst(merged)

    @property
    def is_ground(self) -> bool:
        return all(is_ground(t) for t in self._map.values())

    @property
    def is_constructor(self) -> bool:
        return all(is_constructor_term(t) for t in self._map.values())

    def __len__(self) -> int:
        return len(self._map)

    def __bool__(self) -> bool:
        return bool(self._map)

    def __contains__(self, name: str) -> bool:
        return name in self._map

    def __eq__(self, other: object) -> bool:
        return isinstance(other, Subst) and self._map == other._map

    def __hash__(self) -> int:
        return hash(tuple(self.items()))

    def __repr__(self) -> str:
        return format_subst(self)


IDENTITY = Subst()


def format_subst(s: Subst) -> str:
    inner = ", ".join(f"{x} -> {format_term(t)}" for x, t in s.items())
    return "{" + inner + "}"


def match(pattern: Term, subject: Term, extend: Subst | None = None) -> Subst | None:
    """Match pattern against a ground subject.

    Returns the (at most one) substitution sigma with sigma(pattern) = subject
    extending `extend`, or None. Non-ground subjects are rejected.
    """
    if not is_ground(subject):
        raise NotGround(f"match subject must be ground: {format_term(subject)}")
    out: dict[str, Term] = dict(extend._map) if extend is not None else {}
    stack = [(pattern, subject)]
    while stack:
        p, s = stack.pop()
        if isinstance(p, Var):
            bound = out.get(p.name)
            if bound is None:
                out[p.name] = s
            elif bound != s:
                return None
        elif isinstance(s, App) and p.symbol == s.symbol:
            stack.extend(zip(p.args, s.args))
        else:
            return None
    return Subst(out)


def _occurs(name: str, t: Term, subst: dict[str, Term]) -> bool:
    stack = [t]
    while stack:
        u = stack.pop()
        while isinstance(u, Var) and u.name in subst:
            u = subst[u.name]
        if isinstance(u, Var):
            if u.name == name:
                return True
        else:
            stack.extend(u.args)
    return False


def unify(s: Term, t: Term) -> Subst | None:
    """Most general unifier of s and t (idempotent), or None.

    The occurs check is enforced.
    """
    triangular: dict[str, Term] = {}

    def resolve(u: Term) -> Term:
        while isinstance(u, Var) and u.name in triangular:
            u = triangular[u.name]
        return u

    stack = [(s, t)]
    while stack:
        a, b = stack.pop()
        a, b = resolve(a), resolve(b)
        if isinstance(a, Var):
            if isinstance(b, Var) and b.name == a.name:
                continue
            if _occurs(a.name, b, triangular):
                return None
            triangular[a.name] = b
        elif isinstance(b, Var):
            if _occurs(b.name, a, triangular):
                return None
            triangular[b.name] = a
        elif a.symbol == b.symbol:
            stack.extend(zip(a.args, b.args))
        else:
            return None

    def deep(u: Term) -> Term:
        u = resolve(u)
        if isinstance(u, App) and u.args:
            return App(u.symbol, tuple(deep(x) for x in u.args))
        return u

    return Subst({x: deep(v) for x, v in triangular.items()})


def _as_sugar_list(t: Term) -> list[Term] | None:
    items: list[Term] = []
    while isinstance(t, App) and t.symbol.name == "cons" and t.symbol.arity == 2:
        items.append(t.args[0])
        t = t.args[1]
    if isinstance(t, App) and t.symbol.name == "nil" and not t.args:
        return items
    return None


def format_term(t: Term, sugar: bool = False) -> str:
    if isinstance(t, Var):
        return t.name
    if sugar:
        if t.symbol.name.startswith("tuple#"):
            return "(" + ", ".join(format_term(a, sugar) for a in t.args) + ")"
        items = _as_sugar_list(t)
        if items is not None:
            return "[" + ", ".join(format_term(a, sugar) for a in items) + "]"
    if not t.args:
        return t.symbol.name
    return t.symbol.name + "(" + ",".join(format_term(a, sugar) for a in t.args) + ")"
