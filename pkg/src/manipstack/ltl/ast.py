"""Formula AST for the negation-free, next-free LTL fragment.

The same node classes double as guard formulas on automaton transitions,
where only ``Atom``/``And``/``Or``/``Top`` may appear.  A *symbol* is a
frozenset of :class:`Predicate`; guard satisfaction treats absent
predicates as false, which is well defined because the fragment has no
negation.
"""

from __future__ import annotations

from dataclasses import dataclass


@dataclass(frozen=True, order=True)
class Predicate:
    """Atomic manipulation predicate: grasp(i) or release(i, j)."""

    kind: str  # "grasp" | "release"
    obj: int
    region: int | None = None

    def __post_init__(self):
        if self.kind not in ("grasp", "release"):
            raise ValueError(f"unknown action kind {self.kind!r}")
        if self.obj < 1:
            raise ValueError("object index must be >= 1")
        if self.kind == "grasp" and self.region is not None:
            raise ValueError("grasp carries no region")
        if self.kind == "release" and (self.region is None or self.region < 1):
            raise ValueError("release carries exactly one region index >= 1")

    def __str__(self):
        if self.kind == "grasp":
            return f"grasp({self.obj})"
        return f"release({self.obj},{self.region})"

    def sort_key(self):
        return (self.kind, self.obj, self.region if self.region is not None else 0)


Symbol = frozenset  # frozenset[Predicate]

EMPTY_SYMBOL: Symbol = frozenset()


def symbol_key(sigma: Symbol):
    """Deterministic ordering: empty symbol first, then lexicographic."""
    return tuple(sorted(p.sort_key() for p in sigma))


def format_symbol(sigma: Symbol) -> str:
    if not sigma:
        return "{}"
    return "{" + ",".join(str(p) for p in sorted(sigma, key=Predicate.sort_key)) + "}"


class Formula:
    """Base class; subclasses are immutable and hashable."""

    __slots__ = ()

    def __repr__(self):
        return str(self)


@dataclass(frozen=True)
class Top(Formula):
    """Constant true (guards only)."""

    def __str__(self):
        return "true"


@dataclass(frozen=True)
class Atom(Formula):
    pred: Predicate

    def __str__(self):
        return str(self.pred)


@dataclass(frozen=True)
class And(Formula):
    left: Formula
    right: Formula

    def __str__(self):
        return f"({self.left} & {self.right})"


@dataclass(frozen=True)
class Or(Formula):
    left: Formula
    right: Formula

    def __str__(self):
        return f"({self.left} | {self.right})"


@dataclass(frozen=True)
class Eventually(Formula):
    sub: Formula

    def __str__(self):
        return f"F {self.sub}"


@dataclass(frozen=True)
class Always(Formula):
    sub: Formula

    def __str__(self):
        return f"G {self.sub}"


@dataclass(frozen=True)
class Until(Formula):
    left: Formula
    right: Formula

    def __str__(self):
        return f"({self.left} U {self.right})"


TRUE = Top()


def atoms_of(f: Formula) -> set[Predicate]:
    """All predicates mentioned in a formula."""
    out: set[Predicate] = set()
    stack = [f]
    while stack:
        node = stack.pop()
        if isinstance(node, Atom):
            out.add(node.pred)
        elif isinstance(node, (And, Or, Until)):
            stack.append(node.left)
            stack.append(node.right)
        elif isinstance(node, (Eventually, Always)):
            stack.append(node.sub)
    return out


def contains_always(f: Formula) -> bool:
    """True if the formula has a G node (mission repeats forever)."""
    stack = [f]
    while stack:
        node = stack.pop()
        if isinstance(node, Always):
            return True
        if isinstance(node, (And, Or, Until)):
            stack.append(node.left)
            stack.append(node.right)
        elif isinstance(node, Eventually):
            stack.append(node.sub)
    return False


def guard_satisfied(guard: Formula, sigma: Symbol) -> bool:
    """sigma |= guard with absent predicates read as false."""
    if isinstance(guard, Top):
        return True
    if isinstance(guard, Atom):
        return guard.pred in sigma
    if isinstance(guard, And):
        return guard_satisfied(guard.left, sigma) and guard_satisfied(guard.right, sigma)
    if isinstance(guard, Or):
        return guard_satisfied(guard.left, sigma) or guard_satisfied(guard.right, sigma)
    raise TypeError(f"not a guard formula: {guard!r}")


def guard_atoms(guard: Formula) -> set[Predicate]:
    return atoms_of(guard)


def conjoin(parts: list[Formula]) -> Formula:
    """Conjunction of guard formulas, dropping redundant `true`."""
    out: Formula | None = None
    for p in parts:
        if isinstance(p, Top):
            continue
        out = p if out is None else And(out, p)
    return out if out is not None else TRUE
