"""Symbolic mission controller.

Prunes the Büchi automaton of physically impossible transitions, augments
it with an auxiliary initial state, condenses it into a reachability
graph whose edges are multi-hop runs enabled by a single repeated symbol,
and walks that graph online by always moving one hop closer to a state
with an outgoing accepting edge.

A symbol is feasible iff it asserts at most one manipulation predicate:
any two distinct predicates put the robot in two places or two actions at
once, so only the empty symbol and singletons survive.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .errors import (
    AlreadyAugmented,
    EmptyGraph,
    MissionUnrealizable,
    NoProgressEdge,
)
from .ltl.ast import (
    EMPTY_SYMBOL,
    Formula,
    Predicate,
    Symbol,
    TRUE,
    format_symbol,
    guard_satisfied,
    symbol_key,
)
from .ltl.nba import Nba

INF = float("inf")


def symbol_infeasible(sigma: Symbol) -> bool:
    """sigma |= b_inf: more than one predicate asserted simultaneously."""
    return len(sigma) >= 2


def feasible_symbols(predicates: set[Predicate]) -> list[Symbol]:
    """The empty symbol plus every singleton, deterministically ordered."""
    out = [EMPTY_SYMBOL]
    out.extend(frozenset({p}) for p in sorted(predicates, key=Predicate.sort_key))
    return out


def enabling_symbols(guard: Formula, predicates: set[Predicate]) -> list[Symbol]:
    """Feasible symbols satisfying the guard (Sigma^{q,q'} restricted to
    one transition's Boolean formula)."""
    return [s for s in feasible_symbols(predicates) if guard_satisfied(guard, s)]


def prune_nba(nba: Nba) -> Nba:
    """Drop transitions that no feasible symbol can enable."""
    preds = nba.predicates()
    transitions: dict[int, list[tuple[Formula, int]]] = {}
    for src in sorted(nba.transitions):
        kept = [
            (guard, dst)
            for guard, dst in nba.transitions[src]
            if enabling_symbols(guard, preds)
        ]
        if kept:
            transitions[src] = kept
    return Nba(
        n_states=nba.n_states,
        initial=nba.initial,
        final=nba.final,
        transitions=transitions,
        aux=nba.aux,
    )


def add_aux_state(nba: Nba, pi0: Symbol = EMPTY_SYMBOL) -> Nba:
    """Add the auxiliary initial state with a `true` self-loop and an edge
    to every previous initial state, guarded by the predicate satisfied at
    t = 0 (guard `true` for the empty symbol)."""
    if nba.aux is not None:
        raise AlreadyAugmented("auxiliary state already present")
    aux = nba.n_states
    if pi0:
        if len(pi0) != 1:
            raise ValueError("pi0 must be the empty symbol or a single predicate")
        from .ltl.ast import Atom

        out_guard: Formula = Atom(next(iter(pi0)))
    else:
        out_guard = TRUE
    transitions = {src: list(outs) for src, outs in nba.transitions.items()}
    transitions[aux] = [(TRUE, aux)] + [(out_guard, q0) for q0 in sorted(nba.initial)]
    return Nba(
        n_states=nba.n_states + 1,
        initial=frozenset({aux}),
        final=nba.final,
        transitions=transitions,
        aux=aux,
    )


@dataclass(frozen=True)
class EdgeRun:
    """One enabling symbol with its induced NBA run q .. q' q'."""

    sigma: Symbol
    states: tuple[int, ...]
    accepting: bool  # run passes through a final NBA state


@dataclass(frozen=True)
class GraphEdge:
    src: int
    dst: int
    accepting: bool  # some enabling run is accepting
    runs: tuple[EdgeRun, ...]

    def symbols(self) -> list[Symbol]:
        return [r.sigma for r in self.runs]

    def run_for(self, sigma: Symbol) -> EdgeRun:
        for r in self.runs:
            if r.sigma == sigma:
                return r
        raise KeyError(format_symbol(sigma))


@dataclass
class AutomatonGraph:
    nba: Nba
    nodes: list[int]
    edges: dict[tuple[int, int], GraphEdge]
    dist: dict[int, float]  # d_F hop distance, inf if unreachable
    accepting_nodes: frozenset[int]  # V_F

    @property
    def aux(self) -> int:
        return self.nba.aux

    def out_edges(self, q: int) -> list[GraphEdge]:
        return [e for (src, _), e in sorted(self.edges.items()) if src == q]


def _single_symbol_run(nba: Nba, src: int, dst: int, sigma: Symbol) -> EdgeRun | None:
    """Find a run src .. dst dst generated by repeating sigma.

    Constraints per the run definition: every hop guard is satisfied by
    sigma; intermediate states must not have a sigma-activated self-loop
    (the run cannot linger); dst must have one (the run ends by activating
    it).  The search runs on the product (state, seen-final) so that a run
    passing through a final state is preferred whenever one exists; hop
    count is bounded by twice the state count.
    """
    if not nba.has_self_loop(dst, sigma):
        return None

    def bfs(target_flag: bool | None) -> tuple[int, ...] | None:
        start = (src, src in nba.final)
        parent: dict[tuple[int, bool], tuple[int, bool]] = {}
        visited = {start}
        frontier = [start]
        while frontier:
            nxt = []
            for node in frontier:
                q, flag = node
                for q2 in sorted(nba.successors(q, sigma)):
                    flag2 = flag or (q2 in nba.final)
                    node2 = (q2, flag2)
                    if q2 == dst:
                        if target_flag is not None and flag2 != target_flag:
                            continue
                        path = [q2]
                        cur = node
                        while True:
                            path.append(cur[0])
                            if cur == start:
                                break
                            cur = parent[cur]
                        path.reverse()
                        return tuple(path + [dst])
                    if node2 in visited:
                        continue
                    # q2 is an intermediate: it must not linger under sigma
                    if nba.has_self_loop(q2, sigma):
                        continue
                    visited.add(node2)
                    parent[node2] = node
                    nxt.append(node2)
            frontier = nxt
        return None

    path = bfs(True)
    if path is not None:
        return EdgeRun(sigma, path, True)
    path = bfs(None)
    if path is not None:
        return EdgeRun(sigma, path, False)
    return None


def _recurrent_finals(nba: Nba, preds: set[Predicate]) -> frozenset[int]:
    """Final states on a feasible cycle.  Finals that cannot be revisited
    never witness acceptance, so dropping them preserves the language and
    keeps one-shot pass-through states from being miscounted as accepting."""
    out = set()
    for q in nba.final:
        seen: set[int] = set()
        stack = [
            dst
            for guard, dst in nba.out_edges(q)
            if enabling_symbols(guard, preds)
        ]
        while stack:
            cur = stack.pop()
            if cur == q:
                out.add(q)
                break
            if cur in seen:
                continue
            seen.add(cur)
            stack.extend(
                dst
                for guard, dst in nba.out_edges(cur)
                if enabling_symbols(guard, preds)
            )
    return frozenset(out)


def build_graph(nba: Nba) -> AutomatonGraph:
    """Construct the reachability graph over the pruned, augmented NBA."""
    if nba.aux is None:
        raise ValueError("augment the automaton with add_aux_state first")
    preds = nba.predicates()
    symbols = feasible_symbols(preds)
    recurrent = _recurrent_finals(nba, preds)
    if recurrent != nba.final:
        nba = Nba(
            n_states=nba.n_states,
            initial=nba.initial,
            final=recurrent,
            transitions=nba.transitions,
            aux=nba.aux,
        )

    # D_aux fixpoint: states with a feasible self-loop, reachable from aux
    # by a finite feasible word whose last symbol activates that self-loop.
    # Explore pairs (state, arrived-with-symbol-activating-self-loop).
    has_loop = {
        q: [s for s in symbols if nba.has_self_loop(q, s)] for q in range(nba.n_states)
    }
    candidates = {q for q, loops in has_loop.items() if loops}

    # Reachability over feasible transitions (any symbol per hop).
    reachable = {nba.aux}
    stack = [nba.aux]
    while stack:
        q = stack.pop()
        for guard, dst in nba.out_edges(q):
            if dst in reachable:
                continue
            if enabling_symbols(guard, preds):
                reachable.add(dst)
                stack.append(dst)

    # q is in D if reachable and some incoming feasible transition (or the
    # aux start itself) can be taken with a symbol that activates q's loop.
    members: set[int] = set()
    if has_loop[nba.aux]:
        members.add(nba.aux)
    for q in sorted(candidates & reachable):
        if q == nba.aux:
            continue
        ok = False
        for src in reachable:
            for guard, dst in nba.out_edges(src):
                if dst != q:
                    continue
                for s in has_loop[q]:
                    if guard_satisfied(guard, s):
                        ok = True
                        break
                if ok:
                    break
            if ok:
                break
        if ok:
            members.add(q)

    nodes = sorted(members)

    edges: dict[tuple[int, int], GraphEdge] = {}
    for src in nodes:
        for dst in nodes:
            runs: list[EdgeRun] = []
            for sigma in symbols:
                run = _single_symbol_run(nba, src, dst, sigma)
                if run is not None:
                    runs.append(run)
            if runs:
                runs.sort(key=lambda r: symbol_key(r.sigma))
                accepting = any(r.accepting for r in runs)
                edges[(src, dst)] = GraphEdge(src, dst, accepting, tuple(runs))

    accepting_nodes = frozenset(src for (src, _), e in edges.items() if e.accepting)
    if not accepting_nodes:
        raise EmptyGraph("no accepting edges survive pruning")

    graph = AutomatonGraph(nba, nodes, edges, {}, accepting_nodes)
    graph.dist = distance_to_accepting(graph)
    return graph


def distance_to_accepting(g: AutomatonGraph) -> dict[int, float]:
    """d_F: reverse BFS hop count from each node to V_F (0 on V_F itself)."""
    dist = {q: INF for q in g.nodes}
    frontier = sorted(g.accepting_nodes)
    for q in frontier:
        dist[q] = 0
    preds: dict[int, list[int]] = {q: [] for q in g.nodes}
    for (src, dst) in g.edges:
        preds[dst].append(src)
    d = 0
    while frontier:
        d += 1
        nxt = []
        for q in frontier:
            for p in preds[q]:
                if dist[p] == INF:
                    dist[p] = d
                    nxt.append(p)
        frontier = sorted(set(nxt))
    return dist


def dump_graph(g: AutomatonGraph) -> str:
    """Deterministic text dump for golden tests and the CLI."""
    lines = []
    for q in g.nodes:
        d = g.dist[q]
        mark = " aux" if q == g.aux else ""
        lines.append(f"node {q} d_F={'inf' if d == INF else int(d)}{mark}")
    for (src, dst) in sorted(g.edges):
        e = g.edges[(src, dst)]
        for r in e.runs:
            lines.append(
                f"edge {src} -> {dst} accepting={int(r.accepting)} "
                f"symbol={format_symbol(r.sigma)} run={list(r.states)}"
            )
    return "\n".join(lines) + "\n"


# ----------------------------------------------------------------- mission


@dataclass(frozen=True)
class SymbolicAction:
    """Manipulation command distilled from the chosen symbol."""

    kind: str  # "grasp" | "release" | "idle"
    obj: int | None = None
    region: int | None = None

    @staticmethod
    def from_symbol(sigma: Symbol) -> "SymbolicAction":
        if not sigma:
            return SymbolicAction("idle")
        (pred,) = sigma
        return SymbolicAction(pred.kind, pred.obj, pred.region)

    def __str__(self):
        if self.kind == "idle":
            return "Idle"
        if self.kind == "grasp":
            return f"GraspObject({self.obj})"
        return f"ReleaseObject({self.obj},{self.region})"


@dataclass
class PendingChoice:
    edge: GraphEdge
    run: EdgeRun

    @property
    def sigma(self) -> Symbol:
        return self.run.sigma


@dataclass
class MissionState:
    graph: AutomatonGraph
    current: int
    pending: PendingChoice | None = None
    dead: set[tuple[int, int, tuple]] = field(default_factory=set)
    accepting_history: list[tuple[int, int]] = field(default_factory=list)

    @classmethod
    def start(cls, graph: AutomatonGraph) -> "MissionState":
        return cls(graph=graph, current=graph.aux)

    def _dead_key(self, edge: GraphEdge, sigma: Symbol):
        return (edge.src, edge.dst, symbol_key(sigma))

    def _candidates(self) -> list[PendingChoice]:
        g = self.graph
        q = self.current
        here = g.dist.get(q, INF)
        out: list[PendingChoice] = []
        if q in g.accepting_nodes:
            # traverse an accepting run: only runs through a final state count
            for e in g.out_edges(q):
                for r in e.runs:
                    if r.accepting and self._dead_key(e, r.sigma) not in self.dead:
                        out.append(PendingChoice(e, r))
        else:
            if here == INF:
                return []
            for e in g.out_edges(q):
                if g.dist.get(e.dst, INF) != here - 1:
                    continue
                for r in e.runs:
                    if self._dead_key(e, r.sigma) not in self.dead:
                        out.append(PendingChoice(e, r))
        # deterministic policy: lowest destination id, then smallest symbol
        out.sort(key=lambda c: (c.edge.dst, symbol_key(c.sigma)))
        return out

    def next_action(self) -> tuple[int, Symbol, SymbolicAction]:
        """Choose the next target state, enabling symbol, and command."""
        cands = self._candidates()
        if not cands:
            raise NoProgressEdge(
                f"no live edge from state {self.current} makes progress"
            )
        choice = cands[0]
        self.pending = choice
        return choice.edge.dst, choice.sigma, SymbolicAction.from_symbol(choice.sigma)

    def report_outcome(self, satisfied: bool) -> None:
        """Feed back the action result.

        Satisfied advances the automaton along the stored run.  Infeasible
        kills the (edge, symbol) pair; when nothing remains at the current
        state the mission is unrealizable.
        """
        if self.pending is None:
            raise ValueError("no action outstanding")
        choice = self.pending
        self.pending = None
        if satisfied:
            self.current = choice.edge.dst
            if choice.run.accepting:
                self.accepting_history.append((choice.edge.src, choice.edge.dst))
            return
        self.dead.add(self._dead_key(choice.edge, choice.sigma))
        if not self._candidates():
            raise MissionUnrealizable(
                f"all alternatives exhausted at state {choice.edge.src}"
            )
