"""System-to-system transformations: flattening to pure-constructor form,
constructor-condition simplification, injectivization, inversion, the
improved injectivization for injective rules, trace encoding, and the
view-update construction built from them.
"""

from __future__ import annotations

from dataclasses import dataclass

from .errors import (
    NotApplicable,
    PreconditionViolated,
    RevrwError,
    ShapeViolated,
    UnsafeTrace,
    UpdateFailed,
    ViewFailed,
)
from .reversible import Trace, TraceTerm, is_safe, safety_domain
from .rewrite import Bounds, DEFAULT_BOUNDS, normalize
from .systems import Condition, RewriteSystem, Rule, format_system
from .terms import (
    App,
    DEFINED,
    ROOT,
    Symbol,
    TRACE,
    TUPLE,
    Term,
    Var,
    format_term,
    is_basic_term,
    is_constructor_term,
    is_ground,
    positions,
    replace,
    subterm,
    term_vars,
    unify,
    vars_of,
)

FRESH_PREFIX = "_w"


class FreshNames:
    """Fresh-variable source for one transformation session. Names use the
    reserved `_w` prefix and skip anything already taken."""

    def __init__(self, taken: set[str] | frozenset[str] = frozenset()):
        self._n = 0
        self._taken = set(taken)

    def next(self) -> str:
        while True:
            self._n += 1
            name = f"{FRESH_PREFIX}{self._n}"
            if name not in self._taken:
                self._taken.add(name)
                return name


def _rule_vars(rule: Rule) -> set[str]:
    out = term_vars(rule.lhs) | term_vars(rule.rhs)
    for c in rule.conditions:
        out |= vars_of(c.lhs, c.rhs)
    return out


def _system_vars(system: RewriteSystem) -> set[str]:
    out: set[str] = set()
    for r in system.rules:
        out |= _rule_vars(r)
    return out


def tuple_symbol(k: int) -> Symbol:
    return Symbol(f"tuple#{k}", k, TUPLE)


def injective_name(name: str) -> str:
    return name + "^i"


def inverse_name(name: str) -> str:
    return name + "^-1"


# ---------------------------------------------------------------------------
# The four pcDCTRS-producing rewrites on rules


def _innermost_basic_position(t: Term) -> tuple[int, ...] | None:
    for p in positions(t):
        if is_basic_term(subterm(t, p)):
            return p
    return None


def flatten_rhs(system: RewriteSystem, rule: Rule, fresh: FreshNames | None = None) -> Rule:
    """Replace the innermost-leftmost basic subterm of the rhs by a fresh
    variable bound through a new last condition."""
    if is_constructor_term(rule.rhs):
        raise NotApplicable(f"rule {rule.label}: right-hand side is a constructor term")
    q = _innermost_basic_position(rule.rhs)
    if q is None:
        raise NotApplicable(f"rule {rule.label}: right-hand side has no basic subterm")
    fresh = fresh or FreshNames(_rule_vars(rule))
    w = Var(fresh.next())
    return Rule(
        rule.label,
        rule.lhs,
        replace(rule.rhs, q, w),
        (*rule.conditions, Condition(subterm(rule.rhs, q), w)),
    )


def flatten_condition(
    system: RewriteSystem, rule: Rule, fresh: FreshNames | None = None
) -> Rule:
    """Split the first condition whose lhs is neither constructor nor basic
    at its innermost-leftmost basic subterm."""
    for i, c in enumerate(rule.conditions):
        if is_constructor_term(c.lhs) or is_basic_term(c.lhs):
            continue
        q = _innermost_basic_position(c.lhs)
        if q is None:
            continue
        fresh = fresh or FreshNames(_rule_vars(rule))
        w = Var(fresh.next())
        new_conditions = (
            *rule.conditions[:i],
            Condition(subterm(c.lhs, q), w),
            Condition(replace(c.lhs, q, w), c.rhs),
            *rule.conditions[i + 1 :],
        )
        return Rule(rule.label, rule.lhs, rule.rhs, new_conditions)
    raise NotApplicable(
        f"rule {rule.label}: every condition lhs is constructor or basic"
    )


def remove_unify(system: RewriteSystem, rule: Rule) -> Rule:
    """Drop the first unifiable constructor condition, applying its mgu to
    the whole rule."""
    for i, c in enumerate(rule.conditions):
        if not (is_constructor_term(c.lhs) and is_constructor_term(c.rhs)):
            continue
        theta = unify(c.lhs, c.rhs)
        if theta is None:
            continue
        rest = rule.conditions[:i] + rule.conditions[i + 1 :]
        return Rule(
            rule.label,
            theta.apply(rule.lhs),
            theta.apply(rule.rhs),
            tuple(Condition(theta.apply(x.lhs), theta.apply(x.rhs)) for x in rest),
        )
    raise NotApplicable(f"rule {rule.label}: no unifiable constructor condition")


def remove_fail(system: RewriteSystem, rule: Rule) -> None:
    """Signal that the rule is infeasible (some constructor condition has no
    unifier) and must be deleted from the system."""
    for c in rule.conditions:
        if (
            is_constructor_term(c.lhs)
            and is_constructor_term(c.rhs)
            and unify(c.lhs, c.rhs) is None
        ):
            return None
    raise NotApplicable(f"rule {rule.label}: no infeasible constructor condition")


# ---------------------------------------------------------------------------
# The pipeline to pcDCTRS


@dataclass(frozen=True, slots=True)
class Stage:
    name: str
    input_system: RewriteSystem
    output_system: RewriteSystem
    changes: tuple[str, ...]


@dataclass(frozen=True, slots=True)
class PipelineReport:
    stages: tuple[Stage, ...]

    def __str__(self) -> str:
        if not self.stages:
            return "(no transformation steps)\n"
        blocks = []
        for i, stage in enumerate(self.stages, 1):
            header = f"-- stage {i}: {stage.name} --"
            body = "\n".join(stage.changes)
            blocks.append(f"{header}\n{body}\n{format_system(stage.output_system)}")
        return "\n".join(blocks)


_MAX_PIPELINE_STEPS = 10000


def to_pcdctrs(system: RewriteSystem) -> tuple[RewriteSystem, PipelineReport]:
    """Exhaustively apply flattening-rhs, flattening-condition, removal-unify
    and removal-fail (in that priority, first applicable rule in textual
    order) until the system is a pcDCTRS.

    Input must be a constructor DCTRS whose condition rhs's are constructor
    terms. Terminates: every step removes one defined-symbol occurrence from
    a non-head position or one constructor-lhs condition or one rule.
    """
    if not system.is_dctrs:
        raise PreconditionViolated("input is not a DCTRS")
    if not system.is_constructor_system:
        raise PreconditionViolated("input is not a constructor system")
    for r in system.rules:
        for c in r.conditions:
            if not is_constructor_term(c.rhs):
                raise PreconditionViolated(
                    f"rule {r.label}: condition rhs {format_term(c.rhs)} is not a "
                    "constructor term"
                )

    fresh = FreshNames(_system_vars(system))
    stages: list[Stage] = []
    current = system
    for _ in range(_MAX_PIPELINE_STEPS):
        applied = _pipeline_step(current, fresh)
        if applied is None:
            break
        name, new_rules, change = applied
        nxt = RewriteSystem(new_rules)
        stages.append(Stage(name, current, nxt, (change,)))
        current = nxt
    else:
        raise RevrwError("pcDCTRS pipeline did not terminate")

    report = validate_pcdctrs_or_raise(current)
    return current, PipelineReport(tuple(stages))


def validate_pcdctrs_or_raise(system: RewriteSystem) -> RewriteSystem:
    from .systems import validate

    report = validate(system, "pcdctrs")
    if not report.ok:
        raise RevrwError(f"pipeline output is not a pcDCTRS:\n{report}")
    return system


def _pipeline_step(
    system: RewriteSystem, fresh: FreshNames
) -> tuple[str, list[Rule], str] | None:
    ops = (
        ("flattening-rhs", lambda r: flatten_rhs(system, r, fresh)),
        ("flattening-condition", lambda r: flatten_condition(system, r, fresh)),
        ("removal-unify", lambda r: remove_unify(system, r)),
        ("removal-fail", lambda r: remove_fail(system, r)),
    )
    for rule in system.rules:
        for name, op in ops:
            try:
                new_rule = op(rule)
            except NotApplicable:
                continue
            if new_rule is None:
                rules = [r for r in system.rules if r.label != rule.label]
                return name, rules, f"{name} deleted {rule.label}"
            rules = [new_rule if r.label == rule.label else r for r in system.rules]
            return name, rules, f"{name} on {rule.label}: {new_rule!r}"
    return None


# ---------------------------------------------------------------------------
# Injectivization and inversion


def _rename_root(t: Term, name: str) -> App:
    assert isinstance(t, App)
    return App(Symbol(name, t.symbol.arity, DEFINED), t.args)


def _pair_term(a: Term, b: Term) -> App:
    return App(tuple_symbol(2), (a, b))


def injectivize(system: RewriteSystem) -> RewriteSystem:
    """Add a trace output to every rule: each function f becomes f^i
    returning a pair of the original result and a trace constructor holding
    the safety-domain bindings (lexicographic order) and the condition trace
    variables."""
    _require_pcdctrs(system)
    new_rules = []
    for rule in system.rules:
        new_rules.append(_injectivize_rule(rule, improved=False))
    return RewriteSystem(new_rules)


def _injectivize_rule(rule: Rule, improved: bool) -> Rule:
    fresh = FreshNames(_rule_vars(rule))
    ws = [Var(fresh.next()) for _ in rule.conditions]
    ys = sorted(safety_domain(rule))
    conditions = tuple(
        Condition(
            _rename_root(c.lhs, injective_name(c.lhs.symbol.name)),
            _pair_term(c.rhs, w),
        )
        for c, w in zip(rule.conditions, ws)
    )
    if improved:
        assert len(ws) == 1 and not ys
        trace_out: Term = ws[0]
    else:
        trace_sym = Symbol(rule.label, len(ys) + len(ws), TRACE)
        trace_out = App(trace_sym, (*(Var(y) for y in ys), *ws))
    return Rule(
        rule.label,
        _rename_root(rule.lhs, injective_name(rule.lhs.symbol.name)),
        _pair_term(rule.rhs, trace_out),
        conditions,
    )


def _require_pcdctrs(system: RewriteSystem) -> None:
    if not system.is_pcdctrs:
        raise PreconditionViolated("input is not a pcDCTRS")


def _count_defined(t: Term) -> int:
    n = 0
    stack = [t]
    while stack:
        u = stack.pop()
        if isinstance(u, App):
            if u.symbol.kind == DEFINED:
                n += 1
            stack.extend(u.args)
    return n


def range_disjoint(system: RewriteSystem, r1: Term, r2: Term) -> bool:
    """Sound syntactic approximation of constructor-range disjointness: each
    maximal defined-rooted subterm is abstracted to a distinct fresh variable
    (the two terms are renamed apart) and the abstractions must fail to
    unify. True implies the ranges are disjoint; False is inconclusive."""
    counter = [0]

    def abstract(t: Term, side: str) -> Term:
        if isinstance(t, Var):
            return Var(f"{side}#{t.name}")
        if t.symbol.kind == DEFINED:
            counter[0] += 1
            return Var(f"hole#{counter[0]}")
        return App(t.symbol, tuple(abstract(a, side) for a in t.args))

    return unify(abstract(r1, "l"), abstract(r2, "r")) is None


def injectivize_improved(system: RewriteSystem, origin: RewriteSystem) -> RewriteSystem:
    """As injectivize, but rules whose originating TRS rule is provably
    injective (pairwise range-disjoint rhs, non-erasing, single defined call
    in the rhs) emit the bare condition trace variable instead of a trace
    constructor."""
    _require_pcdctrs(system)
    if not (origin.is_trs and origin.is_constructor_system):
        raise PreconditionViolated("origin is not a constructor TRS")

    by_root: dict[str, list[Rule]] = {}
    for r in origin.rules:
        by_root.setdefault(r.lhs.symbol.name, []).append(r)

    new_rules = []
    for rule in system.rules:
        source = origin.rule_by_label(rule.label)
        if source is None:
            raise PreconditionViolated(
                f"origin has no rule labelled {rule.label!r}"
            )
        new_rules.append(
            _injectivize_rule(rule, improved=_qualifies(rule, source, by_root, origin))
        )
    return RewriteSystem(new_rules)


def _qualifies(
    rule: Rule, source: Rule, by_root: dict[str, list[Rule]], origin: RewriteSystem
) -> bool:
    siblings = [r for r in by_root[source.lhs.symbol.name] if r.label != source.label]
    if not all(range_disjoint(origin, source.rhs, r.rhs) for r in siblings):
        return False
    if term_vars(source.lhs) != term_vars(source.rhs):
        return False
    if _count_defined(source.rhs) != 1:
        return False
    # A qualifying TRS rule flattens to one condition with an empty safety
    # domain; anything else means the mapping assumption broke.
    return len(rule.conditions) == 1 and not safety_domain(rule)


def invert(system: RewriteSystem) -> RewriteSystem:
    """Swap rule sides and reverse conditions of an injectivized system:
    f^-1 maps (result, trace) back to the argument tuple."""
    new_rules = []
    for rule in system.rules:
        new_rules.append(_invert_rule(rule))
    return RewriteSystem(new_rules)


def _invert_rule(rule: Rule) -> Rule:
    shape = _injective_shape(rule)
    if shape is None:
        raise ShapeViolated(
            f"rule {rule.label} is not injectivization-shaped: {rule!r}"
        )
    base, result, trace_out, cond_parts = shape
    inv_lhs = App(Symbol(inverse_name(base), 2, DEFINED), (result, trace_out))
    inv_rhs = App(tuple_symbol(len(rule.lhs.args)), rule.lhs.args)
    inv_conditions = tuple(
        Condition(
            App(Symbol(inverse_name(cbase), 2, DEFINED), (t_i, w_i)),
            App(tuple_symbol(len(args)), args),
        )
        for cbase, args, t_i, w_i in reversed(cond_parts)
    )
    return Rule(rule.label, inv_lhs, inv_rhs, inv_conditions)


def _injective_shape(rule: Rule):
    """Decompose an injectivized rule into (base name, result term, trace
    output, per-condition parts), or None if it does not fit."""
    lhs = rule.lhs
    if not lhs.symbol.name.endswith("^i"):
        return None
    base = lhs.symbol.name[: -len("^i")]
    rhs = rule.rhs
    if not (isinstance(rhs, App) and rhs.symbol == tuple_symbol(2)):
        return None
    result, trace_out = rhs.args
    cond_parts = []
    trace_vars = []
    for c in rule.conditions:
        if not (isinstance(c.lhs, App) and c.lhs.symbol.name.endswith("^i")):
            return None
        if not (isinstance(c.rhs, App) and c.rhs.symbol == tuple_symbol(2)):
            return None
        t_i, w_i = c.rhs.args
        if not isinstance(w_i, Var):
            return None
        trace_vars.append(w_i)
        cond_parts.append(
            (c.lhs.symbol.name[: -len("^i")], c.lhs.args, t_i, w_i)
        )
    if isinstance(trace_out, Var):
        # Improved shape: the bare trace variable of the single condition.
        if len(trace_vars) != 1 or trace_out != trace_vars[0]:
            return None
    else:
        # Trace constructor beta(ys..., ws...): recognized structurally so
        # that re-parsed systems (where the trace kind is not recoverable)
        # still shape-check.
        if not isinstance(trace_out, App) or _mangled(trace_out.symbol.name):
            return None
        if not all(isinstance(a, Var) for a in trace_out.args):
            return None
        tail = trace_out.args[len(trace_out.args) - len(trace_vars) :]
        if list(tail) != trace_vars:
            return None
    return base, result, trace_out, cond_parts


def _mangled(name: str) -> bool:
    return name.endswith("^i") or name.endswith("^-1") or name.startswith("tuple#")


# ---------------------------------------------------------------------------
# Trace encoding


def encode_trace(system: RewriteSystem, trace: Trace | TraceTerm) -> Term:
    """Encode a safe single-step trace as the ground term the injectivized
    system would compute: label(recorded values in lexicographic variable
    order, encoded sub-traces).

    Only traces that can arise from top reduction of a pcDCTRS are encodable:
    root positions and exactly one trace term per (sub-)trace.
    """
    if isinstance(trace, TraceTerm):
        tt = trace
    else:
        if len(trace) != 1:
            raise UnsafeTrace(
                f"only singleton traces are encodable, got length {len(trace)}"
            )
        tt = trace[0]
    report = is_safe(system, (tt,))
    if not report.ok:
        raise UnsafeTrace("; ".join(report.findings))
    return _encode(system, tt)


def _encode(system: RewriteSystem, tt: TraceTerm) -> Term:
    if tt.position != ROOT:
        raise UnsafeTrace(
            f"{tt.label}: non-root position {tt.position} cannot arise under top reduction"
        )
    rule = system.rule_by_label(tt.label)
    assert rule is not None
    values = [t for _, t in tt.recorded.items()]
    subs = []
    for sub in tt.sub_traces:
        if len(sub) != 1:
            raise UnsafeTrace(
                f"{tt.label}: sub-trace of length {len(sub)} cannot arise under top reduction"
            )
        subs.append(_encode(system, sub[0]))
    sym = Symbol(tt.label, len(values) + len(subs), TRACE)
    return App(sym, (*values, *subs))


# ---------------------------------------------------------------------------
# View update


def view_update(
    system: RewriteSystem,
    view_args: tuple[Term, ...] | list[Term],
    new_view: Term,
    bounds: Bounds = DEFAULT_BOUNDS,
    function: str | None = None,
    improved_origin: RewriteSystem | None = None,
) -> tuple[Term, ...]:
    """Propagate an updated view back to the source: run the injectivized
    view function forward to obtain the trace, then the inverted one on the
    new view and that trace.

    `function` names the view function (default: root of the first rule).
    With improved_origin the improved injectivization is used.
    """
    _require_pcdctrs(system)
    if not system.rules:
        raise PreconditionViolated("empty system")
    name = function or system.rules[0].lhs.symbol.name
    sym = system.symbol(name)
    if sym is None or sym.kind != DEFINED:
        raise ViewFailed(f"{name!r} is not a defined function of the system")
    view_args = tuple(view_args)
    if len(view_args) != sym.arity:
        raise ViewFailed(
            f"{name} takes {sym.arity} arguments, got {len(view_args)}"
        )
    for t in view_args:
        if not (is_ground(t) and is_constructor_term(t)):
            raise ViewFailed(f"argument {format_term(t)} is not a ground constructor term")
    if not (is_ground(new_view) and is_constructor_term(new_view)):
        raise ViewFailed(f"new view {format_term(new_view)} is not a ground constructor term")

    if improved_origin is not None:
        forward = injectivize_improved(system, improved_origin)
    else:
        forward = injectivize(system)
    backward = invert(forward)

    fi = forward.signature[injective_name(name)]
    reduced = normalize(forward, App(fi, view_args), "constructor", bounds)
    if not (
        isinstance(reduced, App)
        and reduced.symbol == tuple_symbol(2)
        and is_constructor_term(reduced)
    ):
        raise ViewFailed(
            f"{name}^i({', '.join(format_term(t) for t in view_args)}) reduced to "
            f"{format_term(reduced)}, not a (view, trace) pair"
        )
    _, trace_term = reduced.args

    inv = backward.signature[inverse_name(name)]
    rebuilt = normalize(backward, App(inv, (new_view, trace_term)), "constructor", bounds)
    if not (
        isinstance(rebuilt, App)
        and rebuilt.symbol.kind == TUPLE
        and is_constructor_term(rebuilt)
    ):
        raise UpdateFailed(
            f"{name}^-1 did not rebuild a source for view {format_term(new_view)}: "
            f"stuck at {format_term(rebuilt)}"
        )
    return rebuilt.args
