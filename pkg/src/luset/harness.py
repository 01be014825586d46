"""Property-test drivers: non-interference, semantics and type preservation
under normalisation, soundness of the type equational theory, and simple
security — all at desk scale over randomly generated programs.

Every driver takes an explicit seed and reports it, so any failure can be
replayed exactly.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from typing import Mapping

from .diagnostics import EvalError, InferError, LusetError
from .infer import InferenceResult, infer_program, type_expr
from .lang import (BASE, BASE_CLOCK, Binop, Call, Clock, ClockBase, ClockOn, Const, Def,
                   Equation, Expr, Fby, Ite, Merge, Node, Program, Ty, Unop, Var,
                   VarDecl, When, causality, elaborate, free_vars, well_formed)
from .normalize import normalize_program
from .sectypes import (EMPTY, Bot, CanonType, Lattice, Lub, Refine, SecType, TVar,
                       canon, eval_ground, least_fixpoint, least_solution, satisfies)
from .streams import ABSENT, History, eval_node, present, run_node, show_value

PASS = "pass"
FAIL = "fail"
INCONCLUSIVE = "inconclusive"
SKIPPED = "vacuously-skipped"


@dataclass
class CheckReport:
    check: str
    verdict: str
    node: str | None = None
    trials: int = 0
    seed: int | None = None
    reason: str | None = None
    counterexample: dict | None = None
    details: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return self.verdict == PASS

    def to_json(self) -> dict:
        out = {"check": self.check, "verdict": self.verdict, "trials": self.trials}
        if self.node is not None:
            out["node"] = self.node
        if self.seed is not None:
            out["seed"] = self.seed
        if self.reason:
            out["reason"] = self.reason
        if self.counterexample is not None:
            out["counterexample"] = self.counterexample
        out.update(self.details)
        return out


# ---------------------------------------------------------------------------
# Random lattices, programs and inputs
# ---------------------------------------------------------------------------

def gen_lattice(rng: random.Random, max_elements: int = 8) -> Lattice:
    """A random join-semilattice: the OR-closure of a few 4-bit masks."""
    while True:
        seeds = {rng.randrange(1, 16) for _ in range(rng.randint(1, 3))}
        masks = {0} | seeds
        changed = True
        while changed:
            changed = False
            for a in list(masks):
                for b in list(masks):
                    if (a | b) not in masks:
                        masks.add(a | b)
                        changed = True
        if len(masks) <= max_elements:
            break
    names = {m: f"m{m}" for m in sorted(masks)}
    covers = [(names[a], names[b]) for a in masks for b in masks
              if a != b and a | b == b]
    return Lattice(list(names.values()), names[0], covers,
                   name=f"random{len(masks)}")


class _GenNode:
    """Scratch state while generating a single node."""

    def __init__(self):
        self.decls: dict[str, VarDecl] = {}
        self.inputs: list[str] = []
        self.outputs: list[str] = []
        self.locals: list[str] = []
        self.defined: list[str] = []  # in definition order
        self.equations: list[Equation] = []


def gen_program(rng: random.Random, max_nodes: int = 3, ticks_hint: int = 0) -> Program:
    """Random well-clocked, causal, type-correct program.

    Nodes may call earlier base-interface nodes; equations are generated in
    an order where instantaneous reads see only inputs and already-defined
    variables, so causality holds by construction.
    """
    nodes: list[Node] = []
    callable_nodes: list[Node] = []
    for idx in range(rng.randint(1, max_nodes)):
        node = _gen_node(rng, f"N{idx}", callable_nodes)
        nodes.append(node)
        if all(isinstance(d.clock, ClockBase) for d in node.inputs + node.outputs):
            callable_nodes.append(node)
    return Program(tuple(nodes))


def _gen_node(rng: random.Random, name: str, callees: list[Node]) -> Node:
    st = _GenNode()

    def declare(kind: list[str], prefix: str, ty: Ty, clock: Clock):
        v = f"{prefix}{len(st.decls)}"
        st.decls[v] = VarDecl(v, ty, clock)
        kind.append(v)
        return v

    n_in = rng.randint(1, 3)
    for _ in range(n_in):
        declare(st.inputs, "i", rng.choice((Ty.INT, Ty.INT, Ty.BOOL)), BASE_CLOCK)
    bool_base_inputs = [v for v in st.inputs if st.decls[v].ty is Ty.BOOL]
    if bool_base_inputs and rng.random() < 0.25:
        driver = rng.choice(bool_base_inputs)
        declare(st.inputs, "i", rng.choice((Ty.INT, Ty.BOOL)),
                ClockOn(BASE_CLOCK, driver, rng.random() < 0.5))

    for _ in range(rng.randint(1, 2)):
        declare(st.outputs, "o", rng.choice((Ty.INT, Ty.INT, Ty.BOOL)), BASE_CLOCK)
    for _ in range(rng.randint(0, 2)):
        declare(st.locals, "l", rng.choice((Ty.INT, Ty.BOOL)), BASE_CLOCK)

    todo = st.outputs + st.locals
    rng.shuffle(todo)

    # sometimes give a local/output a derived clock driven by a bool base var
    for v in todo:
        if rng.random() < 0.2:
            drivers = [d for d in st.inputs
                       if st.decls[d].ty is Ty.BOOL and isinstance(st.decls[d].clock, ClockBase)]
            if drivers:
                d = st.decls[v]
                st.decls[v] = VarDecl(v, d.ty, ClockOn(BASE_CLOCK, rng.choice(drivers),
                                                       rng.random() < 0.5))

    pos = 0
    while pos < len(todo):
        v = todo[pos]
        decl = st.decls[v]
        # occasionally define two base-clocked variables by one tuple call
        partner = None
        if (pos + 1 < len(todo) and rng.random() < 0.2
                and isinstance(decl.clock, ClockBase)
                and isinstance(st.decls[todo[pos + 1]].clock, ClockBase)):
            two_out = [c for c in callees
                       if len(c.outputs) == 2
                       and (c.outputs[0].ty, c.outputs[1].ty) ==
                           (decl.ty, st.decls[todo[pos + 1]].ty)]
            if two_out:
                callee = rng.choice(two_out)
                partner = todo[pos + 1]
                args = tuple(_gen_expr(rng, st, d.ty, BASE_CLOCK, 1, callees)
                             for d in callee.inputs)
                st.equations.append(Def((v, partner), None, (Call(callee.name, args),)))
                st.defined += [v, partner]
                pos += 2
                continue
        expr = _gen_expr(rng, st, decl.ty, decl.clock, rng.randint(1, 3), callees)
        st.equations.append(Def((v,), None, (expr,)))
        st.defined.append(v)
        pos += 1

    decls = st.decls
    return Node(name,
                tuple(decls[v] for v in st.inputs),
                tuple(decls[v] for v in st.outputs),
                tuple(decls[v] for v in st.locals),
                tuple(st.equations))


def _gen_const(rng: random.Random, ty: Ty) -> Const:
    if ty is Ty.BOOL:
        return Const(rng.random() < 0.5)
    return Const(rng.randint(0, 9))


def _avail_vars(st: _GenNode, ty: Ty, clock: Clock, delayed: bool) -> list[str]:
    pool = st.inputs + (st.outputs + st.locals if delayed else st.defined)
    return [v for v in pool if st.decls[v].ty is ty and st.decls[v].clock == clock]


def _gen_expr(rng: random.Random, st: _GenNode, ty: Ty, clock: Clock, depth: int,
              callees: list[Node], delayed: bool = False) -> Expr:
    choices = ["const"]
    vars_here = _avail_vars(st, ty, clock, delayed)
    if vars_here:
        choices += ["var"] * 3
    if depth > 0:
        choices += ["unop", "binop", "binop", "ite"]
        if isinstance(clock, ClockOn):
            choices += ["when"] * 3
        mergeable = _avail_vars(st, Ty.BOOL, clock, delayed=False)
        if mergeable:
            choices.append("merge")
        choices += ["fby", "fby"]
        ok_callees = [c for c in callees
                      if len(c.outputs) == 1 and c.outputs[0].ty is ty]
        if ok_callees:
            choices.append("call")

    match rng.choice(choices):
        case "const":
            return _gen_const(rng, ty)
        case "var":
            return Var(rng.choice(vars_here))
        case "unop":
            op = "not" if ty is Ty.BOOL else "-"
            return Unop(op, _gen_expr(rng, st, ty, clock, depth - 1, callees, delayed))
        case "binop":
            if ty is Ty.INT:
                op = rng.choice(("+", "-", "*"))
                lty = rty = Ty.INT
            else:
                op = rng.choice(("and", "or", "<", "<=", "=", ">"))
                lty = rty = Ty.BOOL if op in ("and", "or") else Ty.INT
            return Binop(op,
                         _gen_expr(rng, st, lty, clock, depth - 1, callees, delayed),
                         _gen_expr(rng, st, rty, clock, depth - 1, callees, delayed))
        case "ite":
            return Ite(_gen_expr(rng, st, Ty.BOOL, clock, depth - 1, callees, delayed),
                       (_gen_expr(rng, st, ty, clock, depth - 1, callees, delayed),),
                       (_gen_expr(rng, st, ty, clock, depth - 1, callees, delayed),))
        case "when":
            assert isinstance(clock, ClockOn)
            inner = _gen_expr(rng, st, ty, clock.base, depth - 1, callees, delayed)
            return When((inner,), clock.var, clock.value)
        case "merge":
            y = rng.choice(_avail_vars(st, Ty.BOOL, clock, delayed=False))
            return Merge(y,
                         (_gen_expr(rng, st, ty, ClockOn(clock, y, True), depth - 1,
                                    callees, delayed),),
                         (_gen_expr(rng, st, ty, ClockOn(clock, y, False), depth - 1,
                                    callees, delayed),))
        case "fby":
            head = _gen_expr(rng, st, ty, clock, depth - 1, callees, delayed)
            body = _gen_expr(rng, st, ty, clock, depth - 1, callees, delayed=True)
            return Fby((head,), (body,))
        case "call":
            ok_callees = [c for c in callees
                          if len(c.outputs) == 1 and c.outputs[0].ty is ty]
            callee = rng.choice(ok_callees)
            args = tuple(_gen_expr(rng, st, d.ty, clock, depth - 1, callees, delayed)
                         for d in callee.inputs)
            return Call(callee.name, args)
    raise AssertionError


def _input_order(node: Node) -> list[VarDecl]:
    """Inputs ordered so clock drivers come before the streams they gate."""
    remaining = list(node.inputs)
    done: list[VarDecl] = []
    names_done: set[str] = set()
    while remaining:
        for d in remaining:
            deps = set()
            ck = d.clock
            while isinstance(ck, ClockOn):
                deps.add(ck.var)
                ck = ck.base
            if deps <= names_done:
                done.append(d)
                names_done.add(d.name)
                remaining.remove(d)
                break
        else:
            raise InferError("clock-mismatch", f"circular input clocks in {node.name}")
    return done


def _clock_live(ck: Clock, streams: History, t: int) -> bool:
    while isinstance(ck, ClockOn):
        v = streams[ck.var][t]
        if not present(v) or v != ck.value:
            return False
        ck = ck.base
    return True


def gen_inputs(rng: random.Random, node: Node, ticks: int,
               shared: Mapping[str, list] | None = None) -> History:
    """Random input streams honouring declared clocks: a stream is present
    exactly where its clock (evaluated over the sampled drivers) is live.
    Streams named in `shared` are copied instead of sampled."""
    streams: History = {}
    for d in _input_order(node):
        if shared is not None and d.name in shared:
            streams[d.name] = list(shared[d.name])
            continue
        vs = []
        for t in range(ticks):
            if _clock_live(d.clock, streams, t):
                vs.append(rng.random() < 0.5 if d.ty is Ty.BOOL else rng.randint(-9, 9))
            else:
                vs.append(ABSENT)
        streams[d.name] = vs
    return streams


# ---------------------------------------------------------------------------
# Non-interference
# ---------------------------------------------------------------------------

@dataclass
class NIConfig:
    node: str
    lattice: Lattice
    assignment: dict[str, str]  # program variables and `base` -> class
    level: str
    trials: int = 100
    ticks: int = 64
    seed: int = 0
    force: bool = False


def project_history(history: History, levels: Mapping[str, str], level: str,
                    lat: Lattice) -> History:
    """Restrict a history to the variables at or below the given level."""
    return {x: vs for x, vs in history.items()
            if x in levels and lat.leq(levels[x], level)}


def _variable_levels(res: InferenceResult, interface_inst: Mapping[str, str],
                     lat: Lattice) -> dict[str, str]:
    """Security class of every node variable: the interface instantiation
    extended over locals by the least fixpoint of the full constraints."""
    full = least_fixpoint(res.full_constraints, interface_inst, lat)
    out = {}
    for prog_var, tv in res.gamma.items():
        out[prog_var] = full.get(tv, interface_inst.get(tv, lat.bottom))
    return out


def check_non_interference(prog: Program, cfg: NIConfig) -> CheckReport:
    """Paired-run test of the non-interference theorem at one level.

    Each trial draws two input histories that agree on every input at or
    below the level (and on the clock drivers of such inputs), runs the node
    on both, and compares the projections of the full histories.
    """
    prog = elaborate(prog)
    lat = cfg.lattice
    results = infer_program(prog)
    res = results[cfg.node]
    node = prog.node(cfg.node)
    sig = res.signature

    inst: dict[str, str] = {}
    for var, label in cfg.assignment.items():
        if var not in res.gamma:
            raise InferError("unbound-var", f"{cfg.node} has no variable {var}")
        inst[res.gamma[var]] = label
    interface = set(sig.interface_vars())
    inst = {v: c for v, c in inst.items() if v in interface}
    solved = least_solution(sig.constraints, inst, lat)
    satisfied = solved is not None
    if not satisfied and not cfg.force:
        return CheckReport("non-interference", SKIPPED, node=cfg.node, seed=cfg.seed,
                           reason="assignment does not satisfy the node constraints")
    if solved is None:
        solved = least_fixpoint(sig.constraints, inst, lat)
    for v in interface:
        solved.setdefault(v, lat.bottom)
    levels = _variable_levels(res, {v: solved[v] for v in interface}, lat)

    equal_inputs = _equal_closure(node, levels, cfg.level, lat)
    rng = random.Random(cfg.seed)
    for trial in range(cfg.trials):
        shared = gen_inputs(rng, node, cfg.ticks)
        ins1 = gen_inputs(rng, node, cfg.ticks, shared={x: shared[x] for x in equal_inputs})
        ins2 = gen_inputs(rng, node, cfg.ticks, shared={x: shared[x] for x in equal_inputs})
        try:
            h1, _ = run_node(prog, cfg.node, ins1, cfg.ticks)
            h2, _ = run_node(prog, cfg.node, ins2, cfg.ticks)
        except EvalError as exc:
            return CheckReport("non-interference", INCONCLUSIVE, node=cfg.node,
                               trials=trial + 1, seed=cfg.seed,
                               reason=str(exc))
        p1 = project_history(h1, levels, cfg.level, lat)
        p2 = project_history(h2, levels, cfg.level, lat)
        diff = _first_difference(p1, p2)
        if diff is not None:
            var, tick = diff
            return CheckReport(
                "non-interference", FAIL, node=cfg.node, trials=trial + 1, seed=cfg.seed,
                counterexample={
                    "variable": var, "tick": tick, "level": cfg.level,
                    "run1": [show_value(v) for v in h1[var]],
                    "run2": [show_value(v) for v in h2[var]],
                    "inputs1": {x: [show_value(v) for v in vs] for x, vs in ins1.items()},
                    "inputs2": {x: [show_value(v) for v in vs] for x, vs in ins2.items()},
                },
                details={"level": cfg.level, "satisfied": satisfied})
    return CheckReport("non-interference", PASS, node=cfg.node, trials=cfg.trials,
                       seed=cfg.seed, details={"level": cfg.level, "satisfied": satisfied})


def _equal_closure(node: Node, levels: Mapping[str, str], level: str,
                   lat: Lattice) -> set[str]:
    """Inputs that must agree between the two runs: everything at or below
    the observation level, closed under clock drivers (so that presence
    patterns of compared streams agree)."""
    equal = {d.name for d in node.inputs if lat.leq(levels[d.name], level)}
    changed = True
    while changed:
        changed = False
        for d in node.inputs:
            if d.name in equal:
                ck = d.clock
                while isinstance(ck, ClockOn):
                    if ck.var not in equal:
                        equal.add(ck.var)
                        changed = True
                    ck = ck.base
    return equal


def _first_difference(h1: History, h2: History) -> tuple[str, int] | None:
    if set(h1) != set(h2):
        stray = set(h1) ^ set(h2)
        return sorted(stray)[0], -1
    for x in sorted(h1):
        for t, (a, b) in enumerate(zip(h1[x], h2[x])):
            if not _values_equal(a, b):
                return x, t
    return None


def _values_equal(a, b) -> bool:
    if (a is ABSENT) != (b is ABSENT):
        return False
    if a is ABSENT:
        return True
    return type(a) is type(b) and a == b


def _streams_equal(xs, ys) -> bool:
    return len(xs) == len(ys) and all(_values_equal(a, b) for a, b in zip(xs, ys))


# ---------------------------------------------------------------------------
# Preservation checks
# ---------------------------------------------------------------------------

def check_semantics_preservation(prog: Program, node_name: str, trials: int = 100,
                                 ticks: int = 64, seed: int = 0) -> CheckReport:
    """Outputs of a node agree, value for value, before and after
    normalisation, over random clock-honouring input prefixes."""
    prog = elaborate(prog)
    try:
        nprog, _ = normalize_program(prog)
    except LusetError as exc:
        return CheckReport("semantics-preservation", INCONCLUSIVE, node=node_name,
                           seed=seed, reason=str(exc))
    node = prog.node(node_name)
    rng = random.Random(seed)
    for trial in range(trials):
        ins = gen_inputs(rng, node, ticks)
        positional = [ins[d.name] for d in node.inputs]
        try:
            out1 = eval_node(prog, node_name, positional, ticks)
            out2 = eval_node(nprog, node_name, [list(vs) for vs in positional], ticks)
        except EvalError as exc:
            return CheckReport("semantics-preservation", INCONCLUSIVE, node=node_name,
                               trials=trial + 1, seed=seed, reason=str(exc))
        for d, s1, s2 in zip(node.outputs, out1, out2):
            if not _streams_equal(s1, s2):
                tick = next(t for t, (a, b) in enumerate(zip(s1, s2))
                            if not _values_equal(a, b))
                return CheckReport(
                    "semantics-preservation", FAIL, node=node_name,
                    trials=trial + 1, seed=seed,
                    counterexample={
                        "variable": d.name, "tick": tick,
                        "source": [show_value(v) for v in s1],
                        "normalised": [show_value(v) for v in s2],
                        "inputs": {x: [show_value(v) for v in vs] for x, vs in ins.items()},
                    })
    return CheckReport("semantics-preservation", PASS, node=node_name,
                       trials=trials, seed=seed)


def check_type_preservation(prog: Program, node_name: str | None = None,
                            lattice_samples: int = 5, instantiation_samples: int = 10,
                            seed: int = 0) -> CheckReport:
    """Signatures before and after normalisation: report canonical equality
    and test that every satisfying instantiation of the source constraints
    satisfies the normalised ones."""
    prog = elaborate(prog)
    try:
        nprog, _ = normalize_program(prog)
    except LusetError as exc:
        return CheckReport("type-preservation", INCONCLUSIVE, node=node_name,
                           seed=seed, reason=str(exc))
    before = infer_program(prog)
    after = infer_program(nprog)
    names = [node_name] if node_name else list(prog.node_names)
    rng = random.Random(seed)
    equal: dict[str, bool] = {}
    trials = 0
    for name in names:
        s0, s1 = before[name].signature, after[name].signature
        assert (s0.inputs, s0.outputs, s0.clock) == (s1.inputs, s1.outputs, s1.clock)
        equal[name] = s0.constraints == s1.constraints
        vars_all = sorted(set(s0.interface_vars())
                          | s0.constraints.variables | s1.constraints.variables)
        for _ in range(lattice_samples):
            lat = gen_lattice(rng)
            for _ in range(instantiation_samples):
                s = {v: rng.choice(lat.elements) for v in vars_all}
                trials += 1
                if satisfies(s0.constraints, s, lat) and not satisfies(s1.constraints, s, lat):
                    return CheckReport(
                        "type-preservation", FAIL, node=name, trials=trials, seed=seed,
                        counterexample={"node": name, "instantiation": s,
                                        "lattice": lat.name,
                                        "source": str(s0.constraints),
                                        "normalised": str(s1.constraints)})
    return CheckReport("type-preservation", PASS, node=node_name, trials=trials,
                       seed=seed, details={"canonically_equal": equal})


# ---------------------------------------------------------------------------
# Equational theory
# ---------------------------------------------------------------------------

def _gen_raw_type(rng: random.Random, pool: list[str], depth: int) -> SecType:
    pick = rng.random()
    if depth <= 0 or pick < 0.35:
        return TVar(rng.choice(pool)) if rng.random() < 0.85 else Bot()
    if pick < 0.8:
        return Lub(_gen_raw_type(rng, pool, depth - 1), _gen_raw_type(rng, pool, depth - 1))
    pairs = tuple((_gen_raw_type(rng, pool, depth - 1), _gen_raw_type(rng, pool, depth - 1))
                  for _ in range(rng.randint(1, 2)))
    return Refine(_gen_raw_type(rng, pool, depth - 1), pairs)


def _restructure(rng: random.Random, t: SecType, depth: int = 4) -> SecType:
    """Rewrite t by random applications of the type equalities (both
    directions): commute, re-associate, duplicate, add/strip bottoms,
    split/merge refinements. The result is provably equal to t."""
    if depth <= 0:
        return t
    roll = rng.random()
    if roll < 0.15:
        t = Lub(t, Bot()) if rng.random() < 0.5 else Lub(Bot(), t)
    elif roll < 0.25:
        t = Lub(t, t)  # idempotence, read right to left
    elif roll < 0.3:
        t = Refine(t, ())  # empty refinement
    match t:
        case Lub(a, b):
            a2 = _restructure(rng, a, depth - 1)
            b2 = _restructure(rng, b, depth - 1)
            if rng.random() < 0.5:
                a2, b2 = b2, a2  # commutativity
            out = Lub(a2, b2)
            if isinstance(out.left, Lub) and rng.random() < 0.5:
                out = Lub(out.left.left, Lub(out.left.right, out.right))  # associativity
            return out
        case Refine(base, pairs):
            base2 = _restructure(rng, base, depth - 1)
            pairs2 = tuple((_restructure(rng, l, depth - 1), _restructure(rng, r, depth - 1))
                           for l, r in pairs)
            if len(pairs2) >= 2 and rng.random() < 0.5:
                k = rng.randint(1, len(pairs2) - 1)
                return Refine(Refine(base2, pairs2[:k]), pairs2[k:])  # nested refinements
            return Refine(base2, pairs2)
        case _:
            return t


def check_equational_soundness(samples: int = 1000, instantiations: int = 10,
                               seed: int = 0) -> CheckReport:
    """Rewrite-related raw types canonicalise identically and evaluate
    identically under random ground instantiations; their surfaced
    constraint sets are equi-satisfiable."""
    rng = random.Random(seed)
    pool = [f"δ{i}" for i in range(1, 7)]
    for trial in range(samples):
        t = _gen_raw_type(rng, pool, rng.randint(1, 4))
        t2 = _restructure(rng, t)
        c1, r1 = canon(t)
        c2, r2 = canon(t2)
        if c1 != c2:
            return CheckReport("equational-soundness", FAIL, trials=trial + 1, seed=seed,
                               counterexample={"type": repr(t), "rewritten": repr(t2),
                                               "canon1": str(c1), "canon2": str(c2)})
        for _ in range(instantiations):
            lat = gen_lattice(rng)
            s = {v: rng.choice(lat.elements) for v in pool}
            if eval_ground(c1, s, lat) != eval_ground(c2, s, lat) or \
                    satisfies(r1, s, lat) != satisfies(r2, s, lat):
                return CheckReport("equational-soundness", FAIL, trials=trial + 1,
                                   seed=seed,
                                   counterexample={"type": repr(t), "rewritten": repr(t2),
                                                   "instantiation": s, "lattice": lat.name})
    return CheckReport("equational-soundness", PASS, trials=samples, seed=seed)


def check_canonical_order_independence(samples: int = 100, seed: int = 0) -> CheckReport:
    """Canonicalisation does not depend on the shape of the join tree."""
    rng = random.Random(seed)
    pool = [f"δ{i}" for i in range(1, 7)]
    for trial in range(samples):
        leaves = [TVar(rng.choice(pool)) for _ in range(rng.randint(2, 8))]
        reference = None
        for _ in range(4):
            shuffled = list(leaves)
            rng.shuffle(shuffled)
            tree: SecType = shuffled[0]
            for leaf in shuffled[1:]:
                tree = Lub(tree, leaf) if rng.random() < 0.5 else Lub(leaf, tree)
            got = canon(tree)
            if reference is None:
                reference = got
            elif got != reference:
                return CheckReport("canonical-order-independence", FAIL,
                                   trials=trial + 1, seed=seed,
                                   counterexample={"leaves": [l.name for l in leaves]})
    return CheckReport("canonical-order-independence", PASS, trials=samples, seed=seed)


# ---------------------------------------------------------------------------
# Simple security
# ---------------------------------------------------------------------------

def _gen_plain_expr(rng: random.Random, vars_: list[str], depth: int) -> Expr:
    """Structure-only expression generator for the simple-security lemma
    (clocks and data types play no role in the security typing itself)."""
    if depth <= 0 or rng.random() < 0.3:
        return Var(rng.choice(vars_)) if rng.random() < 0.8 else Const(rng.randint(0, 9))
    match rng.randint(0, 5):
        case 0:
            return Unop("-", _gen_plain_expr(rng, vars_, depth - 1))
        case 1:
            return Binop("+", _gen_plain_expr(rng, vars_, depth - 1),
                         _gen_plain_expr(rng, vars_, depth - 1))
        case 2:
            return When((_gen_plain_expr(rng, vars_, depth - 1),),
                        rng.choice(vars_), rng.random() < 0.5)
        case 3:
            return Merge(rng.choice(vars_),
                         (_gen_plain_expr(rng, vars_, depth - 1),),
                         (_gen_plain_expr(rng, vars_, depth - 1),))
        case 4:
            return Ite(_gen_plain_expr(rng, vars_, depth - 1),
                       (_gen_plain_expr(rng, vars_, depth - 1),),
                       (_gen_plain_expr(rng, vars_, depth - 1),))
        case 5:
            return Fby((_gen_plain_expr(rng, vars_, depth - 1),),
                       (_gen_plain_expr(rng, vars_, depth - 1),))
    raise AssertionError


def check_simple_security(samples: int = 1000, seed: int = 0) -> CheckReport:
    """Every variable an expression may read has a security type bounded by
    the expression's type (variable-set inclusion on canonical types)."""
    rng = random.Random(seed)
    names = [f"x{i}" for i in range(5)]
    for trial in range(samples):
        env = {}
        for i, x in enumerate(names):
            k = rng.randint(1, 2)
            env[x] = (CanonType(tuple(rng.choice("abcdef") + str(i) for _ in range(k))), EMPTY)
        env[BASE] = (CanonType(("g",)), EMPTY)
        e = _gen_plain_expr(rng, names, rng.randint(1, 4))
        slots = type_expr(env, e, {})
        covered: set[str] = set()
        for t, _ in slots:
            covered |= set(t.vars)
        for x in free_vars(e):
            if not set(env[x][0].vars) <= covered:
                return CheckReport("simple-security", FAIL, trials=trial + 1, seed=seed,
                                   counterexample={"expr": repr(e), "variable": x})
    return CheckReport("simple-security", PASS, trials=samples, seed=seed)


# ---------------------------------------------------------------------------
# Generator post-condition
# ---------------------------------------------------------------------------

def generator_postcondition(samples: int = 50, seed: int = 0) -> CheckReport:
    """The random program generator only emits well-formed, well-clocked,
    causal programs that survive inference and a short run."""
    rng = random.Random(seed)
    for trial in range(samples):
        prog = gen_program(rng)
        try:
            assert well_formed(prog) == []
            eprog = elaborate(prog)
            for node in eprog.nodes:
                assert causality(node).ok
            infer_program(eprog)
            for node in eprog.nodes:
                ins = gen_inputs(rng, node, 8)
                run_node(eprog, node.name, ins, 8)
        except (AssertionError, LusetError) as exc:
            return CheckReport("generator-postcondition", FAIL, trials=trial + 1,
                               seed=seed, reason=str(exc))
    return CheckReport("generator-postcondition", PASS, trials=samples, seed=seed)


def sample_satisfying_assignment(rng: random.Random, res: InferenceResult,
                                 lat: Lattice) -> dict[str, str]:
    """Random interface assignment satisfying a node's signature: inputs and
    the clock drawn uniformly, outputs completed by the least solution."""
    sig = res.signature
    fixed = {v: rng.choice(lat.elements) for v in sig.inputs + (sig.clock,)}
    solved = least_solution(sig.constraints, fixed, lat)
    assert solved is not None, "output-free choice must be completable"
    for v in sig.interface_vars():
        solved.setdefault(v, lat.bottom)
    interface = {tv: label for tv, label in solved.items()}
    names = {}
    for prog_var, tv in res.gamma.items():
        if tv in interface and tv in set(sig.interface_vars()):
            names[prog_var] = interface[tv]
    return names
