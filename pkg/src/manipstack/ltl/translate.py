"""LTL-to-NBA translation for the positive fragment.

Classic node-splitting tableau: nodes carry (new, old, next) obligation
sets.  With negation excluded there are no contradictions, so every node
closes.  Transition guards into a node are the conjunction of the atoms
it committed to.  Until/Eventually subformulas each contribute a
generalized acceptance set; the generalized automaton is then degeneralized
with the usual counter product, plus a dedicated always-accepting layer for
states that belong to *every* acceptance set so that such states keep their
self-loops (the downstream graph construction depends on states the run can
remain in).
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .ast import (
    And,
    Atom,
    Always,
    Eventually,
    Formula,
    Or,
    Top,
    Until,
    conjoin,
)
from .nba import Nba


@dataclass
class _Node:
    incoming: set[int]
    new: frozenset
    old: frozenset
    nxt: frozenset


_INIT = -1  # virtual predecessor id for initial nodes


def _expand(new: set, old: set, nxt: set, incoming: set[int], done: list[_Node]):
    """Discharge obligations in `new`, splitting on disjunctive choices."""
    while new:
        f = new.pop()
        if f in old:
            continue
        if isinstance(f, (Atom, Top)):
            old.add(f)
        elif isinstance(f, And):
            old.add(f)
            new.add(f.left)
            new.add(f.right)
        elif isinstance(f, Or):
            old.add(f)
            _expand(new | {f.left}, set(old), set(nxt), set(incoming), done)
            _expand(new | {f.right}, set(old), set(nxt), set(incoming), done)
            return
        elif isinstance(f, Until):
            old.add(f)
            _expand(new | {f.right}, set(old), set(nxt), set(incoming), done)
            _expand(new | {f.left}, set(old), set(nxt) | {f}, set(incoming), done)
            return
        elif isinstance(f, Eventually):
            old.add(f)
            _expand(new | {f.sub}, set(old), set(nxt), set(incoming), done)
            _expand(set(new), set(old), set(nxt) | {f}, set(incoming), done)
            return
        elif isinstance(f, Always):
            old.add(f)
            new.add(f.sub)
            nxt.add(f)
        else:
            raise TypeError(f"unexpected formula node {f!r}")
    done.append(_Node(incoming, frozenset(), frozenset(old), frozenset(nxt)))


def _build_tableau(phi: Formula) -> list[_Node]:
    nodes: list[_Node] = []  # index = state id

    def close(candidates: list[_Node], incoming: set[int]):
        """Merge candidate closed nodes into the state list; returns ids."""
        ids = []
        for cand in candidates:
            for sid, existing in enumerate(nodes):
                if existing.old == cand.old and existing.nxt == cand.nxt:
                    existing.incoming |= incoming
                    ids.append(sid)
                    break
            else:
                cand.incoming = set(incoming)
                nodes.append(cand)
                ids.append(len(nodes) - 1)
        return ids

    pending: list[_Node] = []
    _expand({phi}, set(), set(), {_INIT}, pending)
    frontier = close(pending, {_INIT})
    seen: set[int] = set()
    while frontier:
        sid = frontier.pop()
        if sid in seen:
            continue
        seen.add(sid)
        succ: list[_Node] = []
        _expand(set(nodes[sid].nxt), set(), set(), {sid}, succ)
        frontier.extend(close(succ, {sid}))
    return nodes


def _atoms_guard(node: _Node) -> Formula:
    atoms = sorted((f for f in node.old if isinstance(f, Atom)), key=lambda a: a.pred.sort_key())
    return conjoin(list(atoms))


def translate_to_nba(phi: Formula) -> Nba:
    """Build an NBA whose omega-language equals the LTL semantics of phi.

    The result is not minimized.  State 0 is the unique initial state (a
    virtual root visited once, never accepting).
    """
    nodes = _build_tableau(phi)

    # Generalized acceptance: one set per Until/Eventually subformula.
    liveness: list[Formula] = []
    seenf: set[Formula] = set()

    def collect(f: Formula):
        if f in seenf:
            return
        seenf.add(f)
        if isinstance(f, (Until, Eventually)):
            liveness.append(f)
        if isinstance(f, (And, Or, Until)):
            collect(f.left)
            collect(f.right)
        elif isinstance(f, (Eventually, Always)):
            collect(f.sub)

    collect(phi)

    def in_set(node: _Node, g: Formula) -> bool:
        if g not in node.old:
            return True
        witness = g.right if isinstance(g, Until) else g.sub
        return witness in node.old

    k = len(liveness)
    n_nodes = len(nodes)

    if k <= 1:
        # Counter is degenerate; single-copy automaton.
        n_states = 1 + n_nodes  # 0 = virtual init
        transitions: dict[int, list[tuple[Formula, int]]] = {}
        for sid, node in enumerate(nodes):
            guard = _atoms_guard(node)
            for pred in node.incoming:
                src = 0 if pred == _INIT else 1 + pred
                transitions.setdefault(src, []).append((guard, 1 + sid))
        if k == 0:
            final = frozenset(range(1, n_states))
        else:
            g = liveness[0]
            final = frozenset(1 + sid for sid, node in enumerate(nodes) if in_set(node, g))
        return _trim(Nba(n_states, frozenset({0}), final, transitions))

    # Degeneralization: copies (node, c) for c in 0..k-1 plus a `top` copy
    # for nodes inside every acceptance set.
    in_all = [all(in_set(node, g) for g in liveness) for node in nodes]

    def advance(sid: int, c: int) -> int:
        # standard counter product: credit at most one set per step
        return (c + 1) % k if in_set(nodes[sid], liveness[c]) else c

    ids: dict[tuple[int, int], int] = {}  # (node, counter|-2 for top) -> state

    def sid_of(node: int, layer: int) -> int:
        key = (node, layer)
        if key not in ids:
            ids[key] = 1 + len(ids)
        return ids[key]

    transitions = {}

    def add(src: int, guard: Formula, dst: int):
        transitions.setdefault(src, []).append((guard, dst))

    TOP = -2
    for sid, node in enumerate(nodes):
        guard = _atoms_guard(node)
        for pred in node.incoming:
            if pred == _INIT:
                add(0, guard, sid_of(sid, 0))
                if in_all[sid]:
                    add(0, guard, sid_of(sid, TOP))
                continue
            for c in range(k):
                src = sid_of(pred, c)
                add(src, guard, sid_of(sid, advance(pred, c)))
                if in_all[sid]:
                    add(src, guard, sid_of(sid, TOP))
            if in_all[pred]:
                src = sid_of(pred, TOP)
                if in_all[sid]:
                    add(src, guard, sid_of(sid, TOP))
                else:
                    add(src, guard, sid_of(sid, 0))

    n_states = 1 + len(ids)
    final = set()
    for (node, layer), state in ids.items():
        if layer == TOP:
            final.add(state)
        elif layer == 0 and in_set(nodes[node], liveness[0]):
            # counter 0 states credited on set 0: standard final copies
            final.add(state)
    return _trim(Nba(n_states, frozenset({0}), frozenset(final), transitions))


def _trim(nba: Nba) -> Nba:
    """Drop states unreachable from the initial set and relabel densely."""
    reach = set(nba.initial)
    stack = list(nba.initial)
    while stack:
        q = stack.pop()
        for _, dst in nba.out_edges(q):
            if dst not in reach:
                reach.add(dst)
                stack.append(dst)
    order = sorted(reach)
    remap = {q: i for i, q in enumerate(order)}
    transitions: dict[int, list[tuple[Formula, int]]] = {}
    for q in order:
        outs = [(g, remap[d]) for g, d in nba.out_edges(q) if d in reach]
        if outs:
            transitions[remap[q]] = outs
    return Nba(
        n_states=len(order),
        initial=frozenset(remap[q] for q in nba.initial),
        final=frozenset(remap[q] for q in nba.final if q in reach),
        transitions=transitions,
    )
