"""Rewriting engines: unrestricted, innermost, constructor and top reduction.

Execution order is fixed: candidate positions are visited leftmost-innermost
(post-order), rules in textual order. Conditions of a rule are solved left to
right by normalizing the instantiated condition lhs under the same strategy
and matching the condition rhs against the normal form; under the constructor
strategy a rule application fails if that match would bind a variable to a
non-constructor term.

Reducibility of a subterm (used to decide innermost eligibility) follows the
same discipline as the strategy itself, so the engines are self-consistent.
"""

from __future__ import annotations

from dataclasses import dataclass

from .errors import BoundExceeded, NotGround, PreconditionViolated
from .systems import RewriteSystem, Rule
from .terms import (
    App,
    DEFINED,
    Position,
    ROOT,
    Subst,
    Term,
    format_term,
    is_ground,
    match,
    replace,
)

STRATEGIES = ("any", "innermost", "constructor", "top")


@dataclass(frozen=True, slots=True)
class Bounds:
    """max_steps caps applied rewrite steps per engine call (condition steps
    included); max_depth caps the nesting of condition evaluations."""

    max_steps: int = 10000
    max_depth: int = 100

    def __post_init__(self) -> None:
        if self.max_steps < 1 or self.max_depth < 1:
            raise ValueError("bounds must be positive")


DEFAULT_BOUNDS = Bounds()


class _Budget:
    __slots__ = ("steps_left", "max_depth")

    def __init__(self, bounds: Bounds):
        self.steps_left = bounds.max_steps
        self.max_depth = bounds.max_depth

    def spend(self) -> None:
        if self.steps_left <= 0:
            raise BoundExceeded("step bound exceeded")
        self.steps_left -= 1

    def check_depth(self, depth: int) -> None:
        if depth > self.max_depth:
            raise BoundExceeded("condition evaluation depth bound exceeded")


@dataclass(frozen=True, slots=True)
class StepWitness:
    """One rewrite step: sigma(lhs) sits at `position` of the input and
    `result` is the input with sigma(rhs) planted there. One derivation
    (a step sequence) is recorded per condition of the applied rule."""

    position: Position
    rule_label: str
    sigma: Subst
    result: Term
    sub_witnesses: tuple[tuple["StepWitness", ...], ...] = ()


def _check_strategy(strategy: str) -> None:
    if strategy not in STRATEGIES:
        raise ValueError(f"unknown strategy {strategy!r}; expected one of {STRATEGIES}")


def _solve(
    system: RewriteSystem,
    rule: Rule,
    sigma0: Subst,
    strategy: str,
    budget: _Budget,
    depth: int,
) -> tuple[Subst, tuple[tuple[StepWitness, ...], ...]] | None:
    budget.check_depth(depth)
    sigma = sigma0
    derivations: list[tuple[StepWitness, ...]] = []
    for c in rule.conditions:
        lhs = sigma.apply(c.lhs)
        if not is_ground(lhs):
            raise PreconditionViolated(
                f"rule {rule.label}: condition lhs {format_term(lhs)} is not ground "
                "under the accumulated substitution (system is not deterministic)"
            )
        value, steps = _normalize(system, lhs, strategy, budget, depth + 1)
        theta = match(sigma.apply(c.rhs), value)
        if theta is None:
            return None
        if strategy == "constructor" and not theta.is_constructor:
            return None
        sigma = sigma.union(theta)
        derivations.append(tuple(steps))
    return sigma, tuple(derivations)


def _witnesses_at(
    system: RewriteSystem,
    whole: Term,
    pos: Position,
    sub: Term,
    strategy: str,
    budget: _Budget,
    depth: int,
    out: list[StepWitness],
    limit: int | None,
) -> bool:
    if not (isinstance(sub, App) and sub.symbol.kind == DEFINED):
        return False
    found = False
    for rule in system.rules:
        sigma0 = match(rule.lhs, sub)
        if sigma0 is None:
            continue
        if strategy == "constructor" and not sigma0.is_constructor:
            continue
        solved = _solve(system, rule, sigma0, strategy, budget, depth)
        if solved is None:
            continue
        sigma, derivations = solved
        result = replace(whole, pos, sigma.apply(rule.rhs))
        out.append(StepWitness(pos, rule.label, sigma, result, derivations))
        found = True
        if limit is not None and len(out) >= limit:
            break
    return found


def _witnesses(
    system: RewriteSystem,
    term: Term,
    strategy: str,
    budget: _Budget,
    depth: int,
    limit: int | None = None,
) -> list[StepWitness]:
    out: list[StepWitness] = []
    if strategy == "top":
        _witnesses_at(system, term, ROOT, term, strategy, budget, depth, out, limit)
        return out

    def walk(sub: Term, pos: Position) -> bool:
        below = False
        if isinstance(sub, App):
            for i, arg in enumerate(sub.args, 1):
                below = walk(arg, (*pos, i)) or below
                if limit is not None and len(out) >= limit:
                    return True
        if strategy == "any" or not below:
            here = _witnesses_at(
                system, term, pos, sub, strategy, budget, depth, out, limit
            )
            return below or here
        return below

    walk(term, ROOT)
    return out


def _normalize(
    system: RewriteSystem,
    term: Term,
    strategy: str,
    budget: _Budget,
    depth: int,
) -> tuple[Term, list[StepWitness]]:
    steps: list[StepWitness] = []
    while True:
        found = _witnesses(system, term, strategy, budget, depth, limit=1)
        if not found:
            return term, steps
        budget.spend()
        steps.append(found[0])
        term = found[0].result


def step(
    system: RewriteSystem,
    term: Term,
    strategy: str = "innermost",
    bounds: Bounds = DEFAULT_BOUNDS,
) -> list[StepWitness]:
    """All one-step successors of a ground term under the strategy, ordered by
    (leftmost-innermost position, rule textual order). Empty iff the term is a
    normal form under the strategy."""
    _check_strategy(strategy)
    if not is_ground(term):
        raise NotGround(f"cannot rewrite non-ground term {format_term(term)}")
    return _witnesses(system, term, strategy, _Budget(bounds), 1)


def first_step(
    system: RewriteSystem,
    term: Term,
    strategy: str = "innermost",
    bounds: Bounds = DEFAULT_BOUNDS,
) -> StepWitness | None:
    _check_strategy(strategy)
    if not is_ground(term):
        raise NotGround(f"cannot rewrite non-ground term {format_term(term)}")
    found = _witnesses(system, term, strategy, _Budget(bounds), 1, limit=1)
    return found[0] if found else None


def normalize(
    system: RewriteSystem,
    term: Term,
    strategy: str = "innermost",
    bounds: Bounds = DEFAULT_BOUNDS,
) -> Term:
    """Repeatedly apply the first witness until no rule applies."""
    term_, _ = normalize_traced(system, term, strategy, bounds)
    return term_


def normalize_traced(
    system: RewriteSystem,
    term: Term,
    strategy: str = "innermost",
    bounds: Bounds = DEFAULT_BOUNDS,
) -> tuple[Term, list[StepWitness]]:
    _check_strategy(strategy)
    if not is_ground(term):
        raise NotGround(f"cannot rewrite non-ground term {format_term(term)}")
    return _normalize(system, term, strategy, _Budget(bounds), 1)


def solve_conditions(
    system: RewriteSystem,
    rule: Rule,
    sigma0: Subst,
    strategy: str = "innermost",
    bounds: Bounds = DEFAULT_BOUNDS,
) -> Subst | None:
    """Extend sigma0 with bindings satisfying the rule's conditions left to
    right, or None if some condition cannot be satisfied."""
    _check_strategy(strategy)
    solved = _solve(system, rule, sigma0, strategy, _Budget(bounds), 1)
    return None if solved is None else solved[0]
