"""Security type inference: constraint generation for clocks, expressions
and equations, node signatures via local-variable elimination, and
whole-program checking against a lattice.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping

from .diagnostics import InferError
from .lang import (BASE, Binop, Call, Clock, ClockBase, ClockOn, Const, Def, Equation,
                   Expr, Fby, Ite, Merge, NCall, NDef, NFby, Node, Program, Unop, Var,
                   When, node_order)
from .sectypes import (EMPTY, TBOT, CanonType, Constraint, ConstraintSet, Lattice,
                       Typing, join, least_fixpoint, least_solution,
                       substitute_constraints, violations)

GREEK = {"alpha": "α", "beta": "β", "gamma": "γ", "delta": "δ"}
_ASCII = {"α": "a", "β": "b", "γ": "g", "δ": "d"}


class FreshVars:
    """Deterministic supply of security type variables.

    The first request for a single variable of a letter yields the bare
    letter; later requests continue a numeric suffix shared across the whole
    program, so a file holding several nodes gets α1..α3, then α4, and β then
    β1, β2, matching the usual display convention.
    """

    def __init__(self):
        self._counter = {g: 0 for g in GREEK.values()}
        self._plain_used = {g: False for g in GREEK.values()}

    def take(self, letter: str, k: int) -> list[str]:
        g = GREEK[letter]
        if k == 1 and not self._plain_used[g] and self._counter[g] == 0:
            self._plain_used[g] = True
            return [g]
        start = self._counter[g] + 1
        self._counter[g] += k
        return [f"{g}{i}" for i in range(start, start + k)]

    def one(self, letter: str) -> str:
        return self.take(letter, 1)[0]


def display_var(name: str, ascii_: bool = False) -> str:
    if ascii_ and name and name[0] in _ASCII:
        return _ASCII[name[0]] + name[1:]
    return name


def _var_sort_key(name: str):
    order = {"γ": 0, "α": 1, "β": 2, "δ": 3}
    head, tail = name[0], name[1:]
    idx = int(tail) if tail.isdigit() else 0
    return (order.get(head, 4), head, idx, name)


def display_type(t: CanonType, ascii_: bool = False) -> str:
    if t.is_bot:
        return "bot" if ascii_ else "⊥"
    names = sorted(t.vars, key=_var_sort_key)
    sep = " lub " if ascii_ else "⊔"
    return sep.join(display_var(v, ascii_) for v in names)


def display_constraint(c: Constraint, ascii_: bool = False) -> str:
    rel = " <= " if ascii_ else " ⊑ "
    return display_type(c.lhs, ascii_) + rel + display_type(c.rhs, ascii_)


def display_constraints(rho: ConstraintSet, ascii_: bool = False) -> str:
    items = sorted(rho, key=lambda c: (_var_sort_key(c.rhs.vars[0]) if c.rhs.vars else (), str(c)))
    return ", ".join(display_constraint(c, ascii_) for c in items)


@dataclass(frozen=True)
class NodeSignature:
    """f(α⃗) ⇒γ β⃗ {|ρ|}: the inferred security interface of a node."""

    name: str
    inputs: tuple[str, ...]
    outputs: tuple[str, ...]
    clock: str
    constraints: ConstraintSet

    def display(self, ascii_: bool = False) -> str:
        ins = ", ".join(display_var(v, ascii_) for v in self.inputs)
        outs = ", ".join(display_var(v, ascii_) for v in self.outputs)
        if len(self.outputs) > 1:
            outs = f"({outs})"
        arrow = "=>" if ascii_ else "⇒"
        body = display_constraints(self.constraints, ascii_)
        return f"{self.name}({ins}) {arrow}{display_var(self.clock, ascii_)} {outs} {{| {body} |}}"

    def interface_vars(self) -> tuple[str, ...]:
        return self.inputs + self.outputs + (self.clock,)


@dataclass
class CallSite:
    """Bookkeeping for one node call inside a node body (used for the
    per-call security check)."""

    callee: str
    eq_index: int
    arg_types: tuple[CanonType, ...]
    clock_type: CanonType
    result_vars: tuple[str, ...]  # fresh variables standing for the outputs


@dataclass
class InferenceResult:
    """Everything inference learns about one node."""

    signature: NodeSignature
    gamma: dict[str, str]  # program variable (and `base`) -> type variable
    full_constraints: ConstraintSet  # before local elimination
    eliminated: tuple[str, ...]  # local + call-result type variables, in order
    calls: tuple[CallSite, ...]


TypeEnv = dict[str, Typing]


def type_clock(env: TypeEnv, ck: Clock) -> Typing:
    """Security type of a clock: the base entry joined with every sampled
    variable on the chain."""
    match ck:
        case ClockBase():
            return _lookup(env, BASE)
        case ClockOn(base, x, _):
            return join(_lookup(env, x), type_clock(env, base))
    raise TypeError(f"type_clock: unsupported {ck!r}")


def _lookup(env: TypeEnv, name: str) -> Typing:
    if name not in env:
        raise InferError("unbound-var", f"no security type for {name}")
    return env[name]


class _CallCtx:
    """Threads the fresh supply and records call sites while typing a node."""

    def __init__(self, fresh: FreshVars, sigs: Mapping[str, NodeSignature]):
        self.fresh = fresh
        self.sigs = sigs
        self.extra_vars: list[str] = []
        self.calls: list[CallSite] = []
        self.eq_index = 0


def type_expr(env: TypeEnv, e: Expr, sigs: Mapping[str, NodeSignature],
              ctx: _CallCtx | None = None) -> list[Typing]:
    """One (type, surfaced constraints) pair per component stream of e.

    Node calls instantiate the callee signature: the clock variable maps to
    the caller's base entry, inputs to argument types, and outputs to fresh
    variables that stand for the results at this call site.
    """
    if ctx is None:
        ctx = _CallCtx(FreshVars(), sigs)

    def rec(sub) -> list[Typing]:
        return type_expr(env, sub, sigs, ctx)

    def rec_all(items) -> list[Typing]:
        out: list[Typing] = []
        for it in items:
            out.extend(rec(it))
        return out

    def one(sub) -> Typing:
        slots = rec(sub)
        if len(slots) != 1:
            raise InferError("arity-mismatch", "tuple used as a single stream")
        return slots[0]

    match e:
        case Const():
            return [(TBOT, EMPTY)]
        case Var(x):
            return [_lookup(env, x)]
        case Unop(_, a):
            return [one(a)]
        case Binop(_, a, b):
            return [join(one(a), one(b))]
        case When(args, x, _):
            gx = _lookup(env, x)
            return [join(t, gx) for t in rec_all(args)]
        case Merge(x, ts, fs):
            gx = _lookup(env, x)
            tslots, fslots = rec_all(ts), rec_all(fs)
            _same_width(tslots, fslots, "merge")
            return [join(join(gx, a), b) for a, b in zip(tslots, fslots)]
        case Ite(c, ts, fs):
            theta = one(c)
            tslots, fslots = rec_all(ts), rec_all(fs)
            _same_width(tslots, fslots, "if")
            return [join(join(theta, a), b) for a, b in zip(tslots, fslots)]
        case Fby(e0s, es):
            islots, rslots = rec_all(e0s), rec_all(es)
            _same_width(islots, rslots, "fby")
            return [join(a, b) for a, b in zip(islots, rslots)]
        case Call(f, args):
            return _type_call(env, f, args, sigs, ctx, type_clock(env, ClockBase()))
    raise TypeError(f"type_expr: unsupported {e!r}")


def _same_width(a: list, b: list, what: str):
    if len(a) != len(b):
        raise InferError("arity-mismatch", f"{what} branches have widths {len(a)} and {len(b)}")


def _type_call(env: TypeEnv, f: str, args, sigs: Mapping[str, NodeSignature],
               ctx: _CallCtx, clock_type: Typing) -> list[Typing]:
    if f not in sigs:
        raise InferError("unknown-node", f"no signature for node {f}")
    sig = sigs[f]
    arg_slots: list[Typing] = []
    for a in args:
        arg_slots.extend(type_expr(env, a, sigs, ctx))
    if len(arg_slots) != len(sig.inputs):
        raise InferError("arity-mismatch",
                         f"{f} expects {len(sig.inputs)} argument stream(s), got {len(arg_slots)}")
    result_vars = [ctx.fresh.one("delta") for _ in sig.outputs]
    ctx.extra_vars.extend(result_vars)
    sub: dict[str, Typing] = {sig.clock: clock_type}
    for v, slot in zip(sig.inputs, arg_slots):
        sub[v] = slot
    for v, r in zip(sig.outputs, result_vars):
        sub[v] = (CanonType((r,)), EMPTY)
    rho = substitute_constraints(sig.constraints, sub)
    surfaced = EMPTY
    for _, extra in arg_slots:
        surfaced = surfaced | extra
    ctx.calls.append(CallSite(
        callee=f,
        eq_index=ctx.eq_index,
        arg_types=tuple(t for t, _ in arg_slots),
        clock_type=clock_type[0],
        result_vars=tuple(result_vars),
    ))
    return [(CanonType((r,)), rho | surfaced) for r in result_vars]


def type_equation(env: TypeEnv, eq: Equation, sigs: Mapping[str, NodeSignature],
                  ctx: _CallCtx | None = None) -> ConstraintSet:
    """Constraints of one equation: γ ⊔ αi ⊑ βi per defined variable, plus
    all refinement constraints surfaced from the right-hand side."""
    if ctx is None:
        ctx = _CallCtx(FreshVars(), sigs)
    match eq:
        case Def(targets, ck, exprs):
            gamma = type_clock(env, ck if ck is not None else ClockBase())
            slots: list[Typing] = []
            for e in exprs:
                slots.extend(type_expr(env, e, sigs, ctx))
        case NDef(x, ck, e):
            gamma = type_clock(env, ck)
            targets = (x,)
            slots = type_expr(env, e, sigs, ctx)
        case NFby(x, ck, _, e):
            gamma = type_clock(env, ck)
            targets = (x,)
            slots = type_expr(env, e, sigs, ctx)  # the constant head adds ⊥
        case NCall(xs, ck, f, args):
            gamma = type_clock(env, ck)
            targets = xs
            slots = _type_call(env, f, args, sigs, ctx, gamma)
        case _:
            raise TypeError(f"type_equation: unsupported {eq!r}")
    if len(slots) != len(targets):
        raise InferError("arity-mismatch",
                         f"{len(targets)} target(s) but {len(slots)} stream(s)")
    out: list[Constraint] = []
    surfaced = EMPTY
    for x, (alpha, rho) in zip(targets, slots):
        beta, rho_b = _lookup(env, x)
        lhs, rho_g = join(gamma, (alpha, rho))
        out.append(Constraint.make(lhs, beta))
        surfaced = surfaced | rho_g | rho_b
    return ConstraintSet(out) | surfaced


def simplify(types: list[CanonType], rho: ConstraintSet,
             order: list[str]) -> tuple[list[CanonType], ConstraintSet]:
    """Eliminate the given type variables from rho (and from the carried
    types) by substituting each variable's unique defining constraint.

    For δ with a defining constraint ν ⊑ δ (or ν ⊔ δ ⊑ δ), substitute ν
    (with δ removed) for δ everywhere and drop the constraint; a variable
    with no defining constraint is skipped. More than one defining
    constraint violates the precondition.
    """
    current = list(types)
    constraints = rho
    for delta in order:
        defining = [c for c in constraints if c.rhs.vars == (delta,)]
        if len(defining) > 1:
            raise InferError("multiple-defining-constraints",
                             f"{delta} has {len(defining)} defining constraints")
        if not defining:
            continue
        chosen = defining[0]
        nu = (chosen.lhs.without((delta,)), EMPTY)
        rest = ConstraintSet(c for c in constraints if c != chosen)
        constraints = substitute_constraints(rest, {delta: nu})
        current = [substitute_constraints_type(t, delta, nu[0]) for t in current]
    return current, constraints


def substitute_constraints_type(t: CanonType, var: str, repl: CanonType) -> CanonType:
    if var not in t.vars:
        return t
    return t.without((var,)).join(repl)


def infer_node_signature(prog: Program, node: Node, sigs: Mapping[str, NodeSignature],
                         fresh: FreshVars | None = None) -> InferenceResult:
    """Infer the security signature of one node (callee signatures given).

    Fresh variables are drawn input-first (α), then outputs (β), base clock
    (γ) and locals (δ); call-site result variables extend the δ supply.
    Locals are eliminated in declaration order, then call results in
    creation order.
    """
    if fresh is None:
        fresh = FreshVars()
    alphas = fresh.take("alpha", len(node.inputs)) if node.inputs else []
    betas = fresh.take("beta", len(node.outputs)) if node.outputs else []
    gamma = fresh.one("gamma")
    deltas = fresh.take("delta", len(node.locals)) if node.locals else []

    env: TypeEnv = {BASE: (CanonType((gamma,)), EMPTY)}
    gamma_map: dict[str, str] = {BASE: gamma}
    for decl, v in zip(node.inputs, alphas):
        env[decl.name] = (CanonType((v,)), EMPTY)
        gamma_map[decl.name] = v
    for decl, v in zip(node.outputs, betas):
        env[decl.name] = (CanonType((v,)), EMPTY)
        gamma_map[decl.name] = v
    for decl, v in zip(node.locals, deltas):
        env[decl.name] = (CanonType((v,)), EMPTY)
        gamma_map[decl.name] = v

    ctx = _CallCtx(fresh, sigs)
    rho = EMPTY
    for i, eq in enumerate(node.equations):
        ctx.eq_index = i
        rho = rho | type_equation(env, eq, sigs, ctx)

    elim = list(deltas) + list(ctx.extra_vars)
    _, simplified = simplify([], rho, elim)
    interface = set(alphas) | set(betas) | {gamma}
    leftover = simplified.variables - interface
    if leftover:
        raise InferError("incomplete-elimination",
                         f"signature of {node.name} still mentions {sorted(leftover)}")
    sig = NodeSignature(node.name, tuple(alphas), tuple(betas), gamma, simplified)
    return InferenceResult(sig, gamma_map, rho, tuple(elim), tuple(ctx.calls))


def infer_program(prog: Program, fresh: FreshVars | None = None) -> dict[str, InferenceResult]:
    """Infer signatures for every node, processing callees first. A single
    fresh supply is shared so variable names are stable across the file."""
    if fresh is None:
        fresh = FreshVars()
    results: dict[str, InferenceResult] = {}
    sigs: dict[str, NodeSignature] = {}
    for name in node_order(prog):
        res = infer_node_signature(prog, prog.node(name), sigs, fresh)
        results[name] = res
        sigs[name] = res.signature
    return {name: results[name] for name in prog.node_names}


def signatures(prog: Program) -> dict[str, NodeSignature]:
    return {name: res.signature for name, res in infer_program(prog).items()}


# ---------------------------------------------------------------------------
# Checking against a lattice
# ---------------------------------------------------------------------------

@dataclass
class CallCheck:
    callee: str
    eq_index: int
    secure: bool
    instantiation: dict[str, str]
    violated: list[Constraint] = field(default_factory=list)


@dataclass
class NodeReport:
    node: str
    secure: bool
    assignment: dict[str, str]  # program variable / `base` -> class
    violated: list[Constraint]
    solved: list[str]  # interface variables filled in by the least solution
    calls: list[CallCheck]
    unsatisfiable: bool = False

    def to_json(self) -> dict:
        return {
            "node": self.node,
            "verdict": "secure" if self.secure else "insecure",
            "assignment": dict(sorted(self.assignment.items())),
            "violated": [display_constraint(c) for c in self.violated],
            "solved": list(self.solved),
            "calls": [{
                "callee": c.callee,
                "equation": c.eq_index,
                "verdict": "secure" if c.secure else "insecure",
                "violated": [display_constraint(v) for v in c.violated],
            } for c in self.calls],
        }


@dataclass
class Report:
    lattice: str
    nodes: list[NodeReport]

    @property
    def secure(self) -> bool:
        return all(n.secure for n in self.nodes)

    def to_json(self) -> dict:
        return {"lattice": self.lattice,
                "verdict": "secure" if self.secure else "insecure",
                "nodes": [n.to_json() for n in self.nodes]}


def assignment_to_instantiation(res: InferenceResult, node: Node,
                                assignment: Mapping[str, str]) -> dict[str, str]:
    """Translate a program-variable assignment (with `base`) into an
    instantiation of the node's interface type variables."""
    s: dict[str, str] = {}
    for name, label in assignment.items():
        if name not in res.gamma:
            raise InferError("unbound-var", f"{node.name} has no variable {name}")
        s[res.gamma[name]] = label
    return s


def check_node(prog: Program, results: Mapping[str, InferenceResult], name: str,
               assignment: Mapping[str, str], lat: Lattice) -> NodeReport:
    """Verdict for one node under a (possibly partial) interface assignment.

    Missing interface variables are filled in by the least solution of the
    signature constraints. Internal node calls are then checked recursively
    under the instantiation induced by the least extension over locals.
    """
    node = prog.node(name)
    res = results[name]
    sig = res.signature
    interface = set(sig.interface_vars())
    # labels given for locals are accepted in the file but ignored here
    s_partial = {v: c for v, c in assignment_to_instantiation(res, node, assignment).items()
                 if v in interface}
    solved_vars = sorted(interface - set(s_partial))
    s = least_solution(sig.constraints, s_partial, lat)
    if s is None:
        # unsatisfiable as fixed: pump anyway so violations can be reported
        s = least_fixpoint(sig.constraints, s_partial, lat)
    for v in interface:
        s.setdefault(v, lat.bottom)
    bad = violations(sig.constraints, s, lat)

    calls = _check_calls(results, res, {v: s[v] for v in interface}, lat)
    unsat = calls is None

    readable_assignment = {p: s[v] for p, v in res.gamma.items() if v in s}
    secure = not bad and not unsat and all(c.secure for c in calls or [])
    return NodeReport(name, secure, readable_assignment, bad, solved_vars, calls or [], unsat)


def _check_calls(results: Mapping[str, InferenceResult], res: InferenceResult,
                 interface_inst: Mapping[str, str], lat: Lattice) -> list[CallCheck] | None:
    """Security of a node's calls under an interface instantiation, per the
    recursive definition: each call's induced instantiation must satisfy the
    callee's constraints, and the callee's own calls must be secure under it.
    Returns None when the node's internal constraints cannot be met at all."""
    full = least_solution(res.full_constraints, interface_inst, lat)
    if full is None:
        return None
    checks: list[CallCheck] = []
    for site in res.calls:
        callee_res = results[site.callee]
        callee_sig = callee_res.signature
        inst: dict[str, str] = {callee_sig.clock: _eval(site.clock_type, full, lat)}
        for v, t in zip(callee_sig.inputs, site.arg_types):
            inst[v] = _eval(t, full, lat)
        for v, r in zip(callee_sig.outputs, site.result_vars):
            inst[v] = full[r] if r in full else lat.bottom
        sub_bad = violations(callee_sig.constraints, inst, lat)
        ok = not sub_bad
        if ok:
            deeper = _check_calls(results, callee_res, inst, lat)
            ok = deeper is not None and all(c.secure for c in deeper)
        readable = {p: inst[v] for p, v in _interface_names(callee_res).items()}
        checks.append(CallCheck(site.callee, site.eq_index, ok, readable, sub_bad))
    return checks


def _interface_names(res: InferenceResult) -> dict[str, str]:
    interface = set(res.signature.interface_vars())
    return {p: v for p, v in res.gamma.items() if v in interface}


def _eval(t: CanonType, s: Mapping[str, str], lat: Lattice) -> str:
    out = lat.bottom
    for v in t.vars:
        out = lat.join(out, s.get(v, lat.bottom))
    return out


def check_program(prog: Program, lat: Lattice,
                  assignments: list[dict]) -> Report:
    """Check the nodes named in the assignment entries; each entry is
    {"node": ..., "base": ..., "inputs": {...}, "outputs": {...}}."""
    results = infer_program(prog)
    reports = []
    for entry in assignments:
        try:
            name = entry["node"]
        except KeyError as exc:
            raise InferError("bad-assignment", "assignment entry lacks a node name") from exc
        if not prog.has_node(name):
            raise InferError("unknown-node", f"assignment names unknown node {name}")
        flat: dict[str, str] = {}
        if "base" in entry:
            flat[BASE] = entry["base"]
        for sect in ("inputs", "outputs"):
            for var, label in entry.get(sect, {}).items():
                flat[var] = label
        reports.append(check_node(prog, results, name, flat, lat))
    return Report(lat.name, reports)
