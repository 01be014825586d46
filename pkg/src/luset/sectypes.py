"""Symbolic security types, their canonical forms, lattices and ground
instantiation.

A raw type is built from bottom, type variables, joins and refinements
(a type constrained by a set of orderings). The equational theory makes
join associative, commutative and idempotent with bottom as identity, and
floats refinements outward; canonical forms are therefore sorted
duplicate-free variable sets paired with a constraint set.

Note that flattening an ordering between refined types into a plain
ordering plus the union of both refinement sets makes the refinements
unconditional: a refinement carried by either side must hold outright,
not merely when the ordering is consulted. Inference only ever attaches
refinements that are required anyway (instantiated callee constraints),
so nothing is lost, but hand-built types should be written with this
reading in mind.
"""

from __future__ import annotations

import itertools
import json
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Mapping, Union

from .diagnostics import InferError, LatticeError


# ---------------------------------------------------------------------------
# Raw type syntax
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Bot:
    pass


@dataclass(frozen=True)
class TVar:
    name: str


@dataclass(frozen=True)
class Lub:
    left: "SecType"
    right: "SecType"


@dataclass(frozen=True)
class Refine:
    base: "SecType"
    constraints: tuple[tuple["SecType", "SecType"], ...]


SecType = Union[Bot, TVar, Lub, Refine]

BOT = Bot()


def lub(*parts: SecType) -> SecType:
    """Left-nested join of the given raw types (Bot when empty)."""
    if not parts:
        return BOT
    out = parts[0]
    for p in parts[1:]:
        out = Lub(out, p)
    return out


# ---------------------------------------------------------------------------
# Canonical forms
# ---------------------------------------------------------------------------

@dataclass(frozen=True, order=True)
class CanonType:
    """A canonical type: a sorted, duplicate-free tuple of type variables.
    The empty tuple is bottom."""

    vars: tuple[str, ...]

    def __post_init__(self):
        object.__setattr__(self, "vars", tuple(sorted(set(self.vars))))

    @property
    def is_bot(self) -> bool:
        return not self.vars

    def join(self, other: "CanonType") -> "CanonType":
        return CanonType(self.vars + other.vars)

    def without(self, names: Iterable[str]) -> "CanonType":
        drop = set(names)
        return CanonType(tuple(v for v in self.vars if v not in drop))

    def __str__(self) -> str:
        return "⊥" if self.is_bot else "⊔".join(self.vars)


TBOT = CanonType(())


def ct(*names: str) -> CanonType:
    return CanonType(names)


@dataclass(frozen=True, order=True)
class Constraint:
    """lhs ⊑ rhs between canonical types, meaning lhs ⊔ rhs = rhs.

    Kept in an absorbed form: variables of the rhs are dropped from the lhs
    (sound because lhs ⊑ rhs iff (lhs − rhs) ⊑ rhs)."""

    lhs: CanonType
    rhs: CanonType

    @staticmethod
    def make(lhs: CanonType, rhs: CanonType) -> "Constraint":
        return Constraint(lhs.without(rhs.vars), rhs)

    @property
    def trivial(self) -> bool:
        return self.lhs.is_bot

    def __str__(self) -> str:
        return f"{self.lhs} ⊑ {self.rhs}"


class ConstraintSet:
    """An immutable, deduplicated, deterministically ordered set of
    constraints; trivial constraints are dropped on construction."""

    __slots__ = ("_items",)

    def __init__(self, items: Iterable[Constraint] = ()):
        canon = {Constraint.make(c.lhs, c.rhs) for c in items}
        self._items: tuple[Constraint, ...] = tuple(sorted(c for c in canon if not c.trivial))

    def __iter__(self):
        return iter(self._items)

    def __len__(self):
        return len(self._items)

    def __bool__(self):
        return bool(self._items)

    def __eq__(self, other):
        return isinstance(other, ConstraintSet) and self._items == other._items

    def __hash__(self):
        return hash(self._items)

    def __or__(self, other: "ConstraintSet") -> "ConstraintSet":
        return ConstraintSet(self._items + tuple(other))

    def __str__(self) -> str:
        return "{" + ", ".join(str(c) for c in self._items) + "}"

    __repr__ = __str__

    @property
    def variables(self) -> set[str]:
        out: set[str] = set()
        for c in self._items:
            out |= set(c.lhs.vars) | set(c.rhs.vars)
        return out


EMPTY = ConstraintSet()


def cs(*pairs: tuple[CanonType, CanonType]) -> ConstraintSet:
    return ConstraintSet(Constraint.make(l, r) for l, r in pairs)


Typing = tuple[CanonType, ConstraintSet]  # a type together with surfaced refinements


def canon(t: SecType) -> Typing:
    """Normal form of a raw type: refinements floated to the top and unioned,
    joins flattened/sorted/deduplicated, bottom dropped."""
    match t:
        case Bot():
            return TBOT, EMPTY
        case TVar(name):
            return CanonType((name,)), EMPTY
        case Lub(a, b):
            ca, ra = canon(a)
            cb, rb = canon(b)
            return ca.join(cb), ra | rb
        case Refine(base, pairs):
            cb, rb = canon(base)
            return cb, rb | canon_constraints(pairs)
    raise TypeError(f"canon: unsupported {t!r}")


def canon_constraints(pairs: Iterable[tuple[SecType, SecType]]) -> ConstraintSet:
    """Canonicalise raw constraint pairs; refinements on either side are
    flattened into the resulting set."""
    out: list[Constraint] = []
    extra = EMPTY
    for l, r in pairs:
        cl, rl = canon(l)
        cr, rr = canon(r)
        out.append(Constraint.make(cl, cr))
        extra = extra | rl | rr
    return ConstraintSet(out) | extra


def join(a: Typing, b: Typing) -> Typing:
    return a[0].join(b[0]), a[1] | b[1]


def join_all(parts: Iterable[Typing]) -> Typing:
    out: Typing = (TBOT, EMPTY)
    for p in parts:
        out = join(out, p)
    return out


# ---------------------------------------------------------------------------
# Substitution
# ---------------------------------------------------------------------------

def substitute_type(t: CanonType, sub: Mapping[str, Typing]) -> Typing:
    """Simultaneous substitution into a canonical type. Refinements carried
    by the substituted types are surfaced into the returned set."""
    out = TBOT
    extra = EMPTY
    for v in t.vars:
        if v in sub:
            ty, rho = sub[v]
            out = out.join(ty)
            extra = extra | rho
        else:
            out = out.join(CanonType((v,)))
    return out, extra


def substitute_constraints(rho: ConstraintSet, sub: Mapping[str, Typing]) -> ConstraintSet:
    out: list[Constraint] = []
    extra = EMPTY
    for c in rho:
        lhs, el = substitute_type(c.lhs, sub)
        rhs, er = substitute_type(c.rhs, sub)
        out.append(Constraint.make(lhs, rhs))
        extra = extra | el | er
    return ConstraintSet(out) | extra


# ---------------------------------------------------------------------------
# Lattices
# ---------------------------------------------------------------------------

class Lattice:
    """A finite join-semilattice of security classes with a bottom element.

    Constructed from covering pairs; the order is their reflexive-transitive
    closure. Join-completeness (every pair has a unique least upper bound)
    is validated eagerly and a violating poset is rejected at load time.
    """

    def __init__(self, elements: Iterable[str], bottom: str, covers: Iterable[tuple[str, str]],
                 name: str = "custom"):
        self.name = name
        self.elements: tuple[str, ...] = tuple(dict.fromkeys(elements))
        if bottom not in self.elements:
            raise LatticeError(f"bottom {bottom!r} is not an element")
        self.bottom = bottom
        leq: dict[str, set[str]] = {e: {e} for e in self.elements}  # e -> upper set
        cov = list(covers)
        for lo, hi in cov:
            if lo not in leq or hi not in leq:
                raise LatticeError(f"cover ({lo!r}, {hi!r}) uses unknown elements")
        changed = True
        while changed:
            changed = False
            for lo, hi in cov:
                ups = leq[lo]
                new = leq[hi] - ups
                if new:
                    ups |= new
                    changed = True
        for a in self.elements:
            for b in self.elements:
                if a != b and b in leq[a] and a in leq[b]:
                    raise LatticeError(f"order is not antisymmetric: {a!r} and {b!r}")
        for e in self.elements:
            if e not in leq[self.bottom]:
                raise LatticeError(f"bottom is not below {e!r}")
        self._up = leq
        self._join: dict[tuple[str, str], str] = {}
        for a in self.elements:
            for b in self.elements:
                uppers = [x for x in self.elements if self._leq_raw(a, x) and self._leq_raw(b, x)]
                lubs = [x for x in uppers if all(self._leq_raw(x, y) for y in uppers)]
                if len(lubs) != 1:
                    raise LatticeError(f"elements {a!r} and {b!r} lack a unique join")
                self._join[(a, b)] = lubs[0]

    def _leq_raw(self, a: str, b: str) -> bool:
        return b in self._up[a]

    def leq(self, a: str, b: str) -> bool:
        self._check(a)
        self._check(b)
        return b in self._up[a]

    def join(self, a: str, b: str) -> str:
        self._check(a)
        self._check(b)
        return self._join[(a, b)]

    def _check(self, e: str):
        if e not in self._up:
            raise LatticeError(f"{e!r} is not an element of lattice {self.name}")

    @property
    def top(self) -> str | None:
        tops = [e for e in self.elements if all(self._leq_raw(x, e) for x in self.elements)]
        return tops[0] if tops else None

    # -- constructors --------------------------------------------------------
    @staticmethod
    def two_point() -> "Lattice":
        return Lattice(["L", "H"], "L", [("L", "H")], name="two-point")

    @staticmethod
    def powerset(n: int) -> "Lattice":
        if not 1 <= n <= 5:
            raise LatticeError("powerset lattice size must be between 1 and 5")
        atoms = "abcde"[:n]
        elems = ["bot"]
        for k in range(1, n + 1):
            elems.extend("".join(c) for c in itertools.combinations(atoms, k))
        covers = []
        for e in elems:
            for a in atoms:
                if e == "bot":
                    covers.append(("bot", a))
                elif a not in e:
                    covers.append((e, "".join(sorted(e + a))))
        return Lattice(elems, "bot", covers, name=f"powerset:{n}")

    @staticmethod
    def from_json(data: dict, name: str = "custom") -> "Lattice":
        try:
            elements = data["elements"]
            bottom = data["bottom"]
            covers = [tuple(p) for p in data["covers"]]
        except (KeyError, TypeError) as exc:
            raise LatticeError(f"malformed lattice description: {exc}") from exc
        return Lattice(elements, bottom, covers, name=name)

    @staticmethod
    def load(spec: str) -> "Lattice":
        """Resolve a lattice by built-in name ("two-point", "powerset:<n>")
        or by path to a JSON file."""
        if spec == "two-point":
            return Lattice.two_point()
        if spec.startswith("powerset:"):
            return Lattice.powerset(int(spec.split(":", 1)[1]))
        path = Path(spec)
        return Lattice.from_json(json.loads(path.read_text()), name=path.name)


# ---------------------------------------------------------------------------
# Ground instantiation
# ---------------------------------------------------------------------------

def eval_ground(t: CanonType, s: Mapping[str, str], lat: Lattice) -> str:
    """Homomorphic extension of s: fold the lattice join over the variables,
    starting from bottom."""
    out = lat.bottom
    for v in t.vars:
        if v not in s:
            raise InferError("unbound-type-var", f"no security class assigned to {v}")
        out = lat.join(out, s[v])
    return out


def satisfies(rho: ConstraintSet, s: Mapping[str, str], lat: Lattice) -> bool:
    return all(lat.leq(eval_ground(c.lhs, s, lat), eval_ground(c.rhs, s, lat)) for c in rho)


def violations(rho: ConstraintSet, s: Mapping[str, str], lat: Lattice) -> list[Constraint]:
    return [c for c in rho
            if not lat.leq(eval_ground(c.lhs, s, lat), eval_ground(c.rhs, s, lat))]


def least_fixpoint(rho: ConstraintSet, fixed: Mapping[str, str], lat: Lattice) -> dict[str, str]:
    """Pump x := x ⊔ eval(lhs) over constraints whose rhs is a single free
    variable, starting free variables at bottom. The result is the least
    candidate extension of `fixed`; it may still violate constraints whose
    rhs is fixed or compound."""
    s = {v: lat.bottom for v in rho.variables}
    s.update(fixed)
    fixed_vars = set(fixed)
    pumpable = [c for c in rho
                if len(c.rhs.vars) == 1 and c.rhs.vars[0] not in fixed_vars]
    changed = True
    while changed:
        changed = False
        for c in pumpable:
            target = c.rhs.vars[0]
            val = lat.join(s[target], eval_ground(c.lhs, s, lat))
            if val != s[target]:
                s[target] = val
                changed = True
    return s


def least_solution(rho: ConstraintSet, fixed: Mapping[str, str], lat: Lattice) -> dict[str, str] | None:
    """Least assignment extending `fixed` that satisfies rho, or None when
    the constraints cannot be met with the fixed part as given."""
    s = least_fixpoint(rho, fixed, lat)
    if violations(rho, s, lat):
        return None
    return s
