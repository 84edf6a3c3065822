"""Non-deterministic Büchi automata: representation, lasso-word membership,
and a line-oriented text format for interchange with external translators."""

from __future__ import annotations

from dataclasses import dataclass, field

from ..errors import NbaFormatError
from .ast import Formula, Predicate, Symbol, guard_atoms, guard_satisfied
from .parser import parse_guard, print_formula


@dataclass
class Nba:
    """States are 0..n_states-1; transitions[src] lists (guard, dst)."""

    n_states: int
    initial: frozenset[int]
    final: frozenset[int]
    transitions: dict[int, list[tuple[Formula, int]]] = field(default_factory=dict)
    aux: int | None = None  # auxiliary initial state, once added

    def __post_init__(self):
        if not self.initial:
            raise ValueError("initial state set must be nonempty")
        for q in list(self.initial) + list(self.final):
            if not (0 <= q < self.n_states):
                raise ValueError(f"state {q} out of range")
        for src, outs in self.transitions.items():
            if not (0 <= src < self.n_states):
                raise ValueError(f"transition source {src} out of range")
            for _, dst in outs:
                if not (0 <= dst < self.n_states):
                    raise ValueError(f"transition target {dst} out of range")

    def out_edges(self, q: int) -> list[tuple[Formula, int]]:
        return self.transitions.get(q, [])

    def predicates(self) -> set[Predicate]:
        preds: set[Predicate] = set()
        for outs in self.transitions.values():
            for guard, _ in outs:
                preds |= guard_atoms(guard)
        return preds

    def successors(self, q: int, sigma: Symbol) -> set[int]:
        return {dst for guard, dst in self.out_edges(q) if guard_satisfied(guard, sigma)}

    def has_self_loop(self, q: int, sigma: Symbol) -> bool:
        return any(dst == q and guard_satisfied(guard, sigma) for guard, dst in self.out_edges(q))


def accepts_lasso(nba: Nba, prefix: list[Symbol], cycle: list[Symbol]) -> bool:
    """Membership of the ultimately-periodic word prefix . cycle^omega.

    Decided on the product of the automaton with the lasso positions:
    accept iff some final product node on the cycle part is reachable from
    the initial front and lies on a product cycle.
    """
    if not cycle:
        raise ValueError("cycle must be nonempty")

    front = set(nba.initial)
    for sigma in prefix:
        front = {q2 for q in front for q2 in nba.successors(q, sigma)}
        if not front:
            return False

    n = len(cycle)

    def product_succ(node):
        q, i = node
        return {(q2, (i + 1) % n) for q2 in nba.successors(q, cycle[i])}

    # Reachable product nodes from the cycle entry front.
    seeds = {(q, 0) for q in front}
    reach = set(seeds)
    stack = list(seeds)
    while stack:
        node = stack.pop()
        for nxt in product_succ(node):
            if nxt not in reach:
                reach.add(nxt)
                stack.append(nxt)

    finals = [node for node in reach if node[0] in nba.final]
    for f in finals:
        # f must be reachable from itself by at least one step
        seen = set()
        stack = list(product_succ(f))
        while stack:
            node = stack.pop()
            if node == f:
                return True
            if node in seen:
                continue
            seen.add(node)
            stack.extend(product_succ(node))
    return False


def export_nba(nba: Nba) -> str:
    """Canonical text form (sorted transitions, normalized guards)."""
    lines = [f"states: {nba.n_states}"]
    lines.append("initial: " + " ".join(str(q) for q in sorted(nba.initial)))
    lines.append("final: " + " ".join(str(q) for q in sorted(nba.final)))
    rows = []
    for src in sorted(nba.transitions):
        for guard, dst in nba.transitions[src]:
            rows.append((src, dst, print_formula(guard)))
    rows.sort()
    for src, dst, guard in rows:
        lines.append(f"trans: {src} {guard} {dst}")
    return "\n".join(lines) + "\n"


def import_nba(text: str) -> Nba:
    """Parse the text format; see :func:`export_nba` for the layout.

    In a `trans:` line the first token is the source, the last token the
    destination, and everything between is the guard formula.
    """
    n_states = None
    initial: list[int] = []
    final: list[int] = []
    transitions: dict[int, list[tuple[Formula, int]]] = {}

    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if ":" not in line:
            raise NbaFormatError("expected `key: value`", lineno)
        key, _, rest = line.partition(":")
        key = key.strip()
        rest = rest.strip()
        if key == "states":
            try:
                n_states = int(rest)
            except ValueError:
                raise NbaFormatError("states must be an integer", lineno) from None
        elif key == "initial":
            initial = [int(tok) for tok in rest.split()]
        elif key == "final":
            final = [int(tok) for tok in rest.split()] if rest else []
        elif key == "trans":
            toks = rest.split()
            if len(toks) < 3:
                raise NbaFormatError("trans needs `src guard dst`", lineno)
            try:
                src = int(toks[0])
                dst = int(toks[-1])
            except ValueError:
                raise NbaFormatError("src/dst must be integers", lineno) from None
            guard_text = " ".join(toks[1:-1])
            try:
                guard = parse_guard(guard_text)
            except Exception as exc:
                raise NbaFormatError(f"bad guard {guard_text!r}: {exc}", lineno) from None
            transitions.setdefault(src, []).append((guard, dst))
        else:
            raise NbaFormatError(f"unknown key {key!r}", lineno)

    if n_states is None:
        raise NbaFormatError("missing `states:` line")
    for q in initial + final:
        if not (0 <= q < n_states):
            raise NbaFormatError(f"state {q} not in the declared state list")
    for src, outs in transitions.items():
        if not (0 <= src < n_states):
            raise NbaFormatError(f"transition source {src} not declared")
        for _, dst in outs:
            if not (0 <= dst < n_states):
                raise NbaFormatError(f"transition target {dst} not declared")
    return Nba(
        n_states=n_states,
        initial=frozenset(initial),
        final=frozenset(final),
        transitions=transitions,
    )


def import_nba_file(path) -> Nba:
    with open(path, encoding="utf-8") as fh:
        return import_nba(fh.read())
