"""CDCL SAT solver on the trail/handler-frame engine.

Unit propagation uses suffix-walking two-watched-literal propagators that
accumulate the reasons of falsified literals.  Each binding carries an
implication-graph node with a (level, sublevel) pair; conflicts are
analysed either over the full graph (last-UIP) or by frontier reduction
(first-UIP) into a ground learnt clause, which a ball carries to the
backjump frame.  Learnt clauses live in a persistent store and are
re-watched after every backjump that unwound them; persistence is gated
by clause size (k-learning).  A no-learning mode runs the same
propagators with chronological backtracking and true/false decision
splits.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field
from typing import Callable, Iterator, Optional

from bjkit.cnf import CnfInstance, Lit
from bjkit.engine import Ball, Engine, SearchStats, Throw, UncaughtBallError, Watcher
from bjkit.trace import TraceSink

Level = tuple[int, int]

STRATEGIES = ("none", "last-uip", "first-uip")


class UnsatSignal(Exception):
    """Internal: conflict analysis found an inescapable (level-0) conflict."""


class ImpNode:
    """Implication-graph node: one variable binding and why it happened.

    Decision nodes have level (L, 0) and no reasons; propagated nodes sit
    one sublevel above their lexicographically greatest reason.
    """

    __slots__ = ("level", "var", "value", "reasons")

    def __init__(self, level: Level, var: int, value: bool, reasons: tuple):
        self.level = level
        self.var = var
        self.value = value
        self.reasons = reasons

    def __repr__(self) -> str:
        maj, sub = self.level
        return f"ImpNode({maj}-{sub}, x{self.var}, {self.value})"


def propagation_level(whys: list) -> Level:
    """Level for a propagated binding: greatest reason level, floored at
    (0, 0), with the sublevel incremented."""
    maj, sub = (0, 0)
    for node in whys:
        if node.level > (maj, sub):
            maj, sub = node.level
    return (maj, sub + 1)


def construct_clause(whys: list) -> tuple[list[Lit], list[int]]:
    """Walk the implication graph depth-first from the conflict reasons.

    Emits, per leaf (a node with no reasons), the negated literal and the
    leaf's major level, in first-visit order.  Shared subgraphs are
    visited once; revisits could only contribute duplicates.
    """
    lits: list[Lit] = []
    levels: list[int] = []
    seen: set[int] = set()
    stack = list(reversed(list(whys)))
    while stack:
        node = stack.pop()
        if id(node) in seen:
            continue
        seen.add(id(node))
        if node.reasons:
            stack.extend(reversed(node.reasons))
        else:
            lits.append((not node.value, node.var))
            levels.append(node.level[0])
    return lits, levels


def _backjump_level(distinct_levels: list[int]) -> Optional[int]:
    """Shared backjump rule: the single level, or the second-largest
    distinct level; None signals an inescapable level-0 conflict."""
    if len(distinct_levels) == 1:
        return None if distinct_levels[0] == 0 else distinct_levels[0]
    return distinct_levels[-2]


def analyse_conflict(whys: list) -> Optional[tuple[int, tuple[Lit, ...]]]:
    """Last-UIP analysis: learn the negation of the conflict's leaf
    bindings.  Returns (backjump level, ground clause), or None when every
    leaf sits at level 0 and no search remains."""
    lits, levels = construct_clause(whys)
    clause: list[Lit] = []
    seen_vars: set[int] = set()
    for pol, vid in lits:
        if vid not in seen_vars:
            seen_vars.add(vid)
            clause.append((pol, vid))
    target = _backjump_level(sorted(set(levels)))
    if target is None:
        return None
    return target, tuple(clause)


def first_uip(whys: list) -> Optional[tuple[int, tuple[Lit, ...]]]:
    """First-UIP analysis by frontier reduction.

    The frontier starts at the conflict reasons; the node with the
    lexicographically greatest (level, sublevel) is repeatedly replaced by
    its reasons until a single node remains at the greatest major level.
    The learnt clause negates the frontier.
    """
    frontier: list[ImpNode] = []
    on_frontier: set[int] = set()
    for node in whys:
        if node.var not in on_frontier:
            on_frontier.add(node.var)
            frontier.append(node)
    while True:
        top_major = max(node.level[0] for node in frontier)
        at_top = sum(1 for node in frontier if node.level[0] == top_major)
        if at_top == 1:
            break
        node = max(frontier, key=lambda n: (n.level, n.var))
        if not node.reasons:
            break
        idx = frontier.index(node)
        on_frontier.discard(node.var)
        replacements = [
            r for r in node.reasons if r.var not in on_frontier
        ]
        frontier[idx:idx + 1] = replacements
        for r in replacements:
            on_frontier.add(r.var)
    clause = tuple((not node.value, node.var) for node in frontier)
    target = _backjump_level(sorted({node.level[0] for node in frontier}))
    if target is None:
        return None
    return target, clause


@dataclass
class SolveOptions:
    """Knobs for one solve.

    `decision_script` forces a sequence of (var, value) decisions ahead of
    the default lowest-id-unbound-gets-true heuristic; entries whose
    variable is already bound are skipped.  `on_quiescence` is a test hook
    invoked whenever propagation reaches a fixpoint.
    """

    strategy: str = "last-uip"
    k: int = 8
    decision_script: Optional[list[tuple[int, bool]]] = None
    sink: Optional[TraceSink] = None
    keep_graphs: bool = False
    on_quiescence: Optional[Callable] = None

    def validate(self) -> None:
        if self.strategy not in STRATEGIES:
            raise ValueError(f"strategy must be one of {STRATEGIES}")
        if self.k < 1:
            raise ValueError("k must be at least 1")


@dataclass
class SatResult:
    status: str  # "SAT" | "UNSAT"
    model: Optional[dict[int, bool]]
    stats: SearchStats
    learnt: list[tuple[int, tuple[Lit, ...]]] = field(default_factory=list)
    conflict_graph: Optional[tuple] = None

    @property
    def sat(self) -> bool:
        return self.status == "SAT"


class ClauseWatcher(Watcher):
    """Two-watched-literal suspension for one clause suffix.

    Immutable once suspended: advancing the watch builds a fresh watcher,
    so trail rewinds restore earlier suspensions verbatim.  `whys` holds
    the reasons of the already-falsified literals before the watches.
    """

    __slots__ = ("run", "pol1", "vid1", "pol2", "vid2", "clause", "rest", "whys")

    def __init__(self, run, pol1, vid1, pol2, vid2, clause, rest, whys):
        super().__init__()
        self.run = run
        self.pol1 = pol1
        self.vid1 = vid1
        self.pol2 = pol2
        self.vid2 = vid2
        self.clause = clause
        self.rest = rest  # index into clause just past vid2
        self.whys = whys

    def wake(self) -> None:
        run = self.run
        cells = run.engine.cells
        if cells[self.vid1].value is not None:
            bvid, bpol = self.vid1, self.pol1
            ovid, opol = self.vid2, self.pol2
        else:
            bvid, bpol = self.vid2, self.pol2
            ovid, opol = self.vid1, self.pol1
        if cells[bvid].value == bpol:
            return  # clause satisfied; retire
        run.set_watch(self.clause, self.rest, ovid, opol,
                      [run.reason(bvid, bpol)] + self.whys)


class _SatRun:
    """One solver run over one engine (shared store for enumeration)."""

    def __init__(self, instance: CnfInstance, options: SolveOptions,
                 store: Optional[list] = None):
        instance.validate()
        options.validate()
        self.instance = instance
        self.options = options
        self.sink = options.sink
        self.tracking = options.strategy != "none"
        self.stats = SearchStats()
        self.engine = Engine()
        if store is not None:
            self.engine.store_put(store)
        for vid in range(1, instance.var_count + 1):
            self.engine.add_cell(vid)
        self.level = 0  # level of the deepest decision made so far
        self.learnt: list[tuple[int, tuple[Lit, ...]]] = []
        self.conflict_graphs: list[tuple] = []
        self.decisions_at_solution: list[tuple[int, bool]] = []

    # -- plumbing ------------------------------------------------------------

    def _emit(self, kind: str, **payload) -> None:
        if self.sink is not None:
            self.sink.emit(kind, **payload)

    def _drain(self) -> Optional[Ball]:
        ball = self.engine.drain()
        if ball is None and self.options.on_quiescence is not None:
            self.options.on_quiescence(self)
        return ball

    def reason(self, vid: int, pol: bool):
        """Reason token for a falsified literal: its implication node, or
        the ground literal itself in no-learning mode."""
        if self.tracking:
            return self.engine.cells[vid].info
        return (pol, vid)

    # -- propagators (shared by both modes) -----------------------------------

    def watch_clause(self, clause: tuple[Lit, ...]) -> None:
        """Start watching a clause; may unit-propagate or conflict."""
        if not clause:
            raise ValueError("cannot watch an empty clause")
        pol, vid = clause[0]
        self.set_watch(clause, 1, vid, pol, [])

    def set_watch(self, clause, rest, vid, pol, whys) -> None:
        """Walk the clause suffix to the next two unbound literals.

        Terminal cases: satisfied (retire), falsified (conflict carrying
        every falsified literal's reason), or unit (assign and record the
        propagation).
        """
        engine = self.engine
        cells = engine.cells
        while True:
            if rest == len(clause):
                cell = cells[vid]
                if cell.value is None:
                    self.unit_assign(vid, pol, whys)
                elif cell.value != pol:
                    self.on_conflict([self.reason(vid, pol)] + whys)
                return
            pol2, vid2 = clause[rest]
            c1 = cells[vid]
            c2 = cells[vid2]
            if c1.value is None and c2.value is None:
                watcher = ClauseWatcher(self, pol, vid, pol2, vid2,
                                        clause, rest + 1, whys)
                engine.suspend(watcher, (vid, vid2))
                return
            if c1.value is not None:
                if c1.value == pol:
                    return  # satisfied
                whys = [self.reason(vid, pol)] + whys
                vid, pol = vid2, pol2
                rest += 1
            else:
                if c2.value == pol2:
                    return  # satisfied
                whys = [self.reason(vid2, pol2)] + whys
                rest += 1

    def unit_assign(self, vid: int, pol: bool, whys: list) -> None:
        """Bind the last free literal of a clause so the clause holds."""
        self.stats.propagations += 1
        if self.tracking:
            level = propagation_level(whys)
            node = ImpNode(level, vid, pol, tuple(whys))
            self._emit("propagate", var=vid, value=pol, level=list(level))
            self.engine.bind(vid, pol, node)
        else:
            self._emit("propagate", var=vid, value=pol, level=self.level)
            self.engine.bind(vid, pol, None)

    def on_conflict(self, whys: list) -> None:
        """A clause went fully false: analyse and throw, or give up."""
        if self.tracking:
            lits = [[not n.value, n.var] for n in whys]
            self._emit("conflict", clause=lits)
            if self.options.keep_graphs or not self.conflict_graphs:
                self.conflict_graphs.append(tuple(whys))
            if self.options.strategy == "first-uip":
                outcome = first_uip(whys)
            else:
                outcome = analyse_conflict(whys)
            if outcome is None:
                raise UnsatSignal
            target, clause = outcome
            conflict_level = max(n.level[0] for n in whys)
            self.stats.throws += 1
            self.stats.jumps += conflict_level - target
            self._emit("throw", target=target,
                       payload=[list(lit) for lit in clause], cause="analysis")
            raise Throw(Ball(target, clause))
        # no-learning mode: chronological backtrack to the current decision
        self._emit("conflict", clause=[list(lit) for lit in whys])
        if not self.engine.frames:
            raise UnsatSignal
        target = self.engine.frames[-1].key
        self.stats.throws += 1
        self._emit("throw", target=target,
                   payload=[list(lit) for lit in whys], cause="chronological")
        raise Throw(Ball(target, tuple(whys)))

    def _register(self, clause: tuple[Lit, ...]) -> Optional[Ball]:
        """Watch one clause and run propagation to quiescence."""
        try:
            self.watch_clause(clause)
            return self._drain()
        except Throw as t:
            return t.ball

    # -- conflict recovery (learning mode) ------------------------------------

    def update_conflict(self, next_level: int, clause: tuple[Lit, ...],
                        level: int) -> Optional[Ball]:
        """Persist the learnt clause (if under the k bound) and re-watch
        every stored clause whose learn level is >= the catch level.

        Returns a ball if re-watching immediately conflicts again.
        """
        self.stats.learnt_count += 1
        self.stats.max_learnt_size = max(self.stats.max_learnt_size, len(clause))
        self.learnt.append((next_level, clause))
        persisted = len(clause) < self.options.k
        self._emit("learn", level=next_level,
                   clause=[list(lit) for lit in clause], persisted=persisted)
        store = self.engine.store_get()
        if persisted:
            store = [(next_level, clause)] + store
            self.engine.store_put(store)
            to_register = [c for (l, c) in store if l >= level]
        else:
            to_register = [clause] + [c for (l, c) in store if l >= level]
        for c in to_register:
            ball = self._register(c)
            if ball is not None:
                return ball
        return None

    def _recover(self, ball: Ball) -> Optional[Ball]:
        """Catch a ball: unwind, consume the frame, learn and re-watch.

        Leaves `self.level` at the catch level; search resumes one level
        higher.  Returns a fresh ball if recovery conflicted again.
        """
        frame = self.engine.throw(ball)
        self._emit("catch", key=frame.key)
        self.engine.pop_frame()
        follow_up = self.update_conflict(frame.key + 1, ball.payload, frame.key)
        self.level = frame.key
        if frame.key == 0:
            self.engine.push_frame(0)
        return follow_up

    # -- decision loops --------------------------------------------------------

    def _next_decision(self, script) -> Optional[tuple[int, bool]]:
        cells = self.engine.cells
        while script:
            vid, value = script[0]
            script.pop(0)
            if cells[vid].value is None:
                return vid, value
        for vid in range(1, self.instance.var_count + 1):
            if cells[vid].value is None:
                return vid, True
        return None

    def _model(self) -> dict[int, bool]:
        return {vid: cell.value for vid, cell in self.engine.cells.items()}

    def _setup(self) -> None:
        """Watch the input clauses, then any clauses carried over in the
        persistent store (learnt and blocking clauses on a restart).
        Conflicts here have no catcher and can only mean level-0
        unsatisfiability."""
        carried = [clause for _, clause in self.engine.store_get()]
        for clause in list(map(tuple, self.instance.clauses)) + carried:
            ball = self._register(clause)
            if ball is not None:
                raise UncaughtBallError(
                    f"ball targeting {ball.target} thrown during setup"
                )

    def solve(self) -> SatResult:
        start = time.perf_counter()
        try:
            if self.instance.trivially_unsat:
                raise UnsatSignal
            self._setup()
            if self.tracking:
                model = self._solve_cdcl()
            else:
                model = self._solve_vanilla()
            self._emit("solution", assignment=model)
            status, result_model = "SAT", model
        except UnsatSignal:
            self._emit("unsat")
            status, result_model = "UNSAT", None
        self.stats.wall_time_s = time.perf_counter() - start
        return SatResult(
            status=status,
            model=result_model,
            stats=self.stats,
            learnt=self.learnt,
            conflict_graph=self.conflict_graphs[0] if self.conflict_graphs else None,
        )

    def _solve_cdcl(self) -> dict[int, bool]:
        engine = self.engine
        script = list(self.options.decision_script or [])
        for vid, _ in script:
            if not 1 <= vid <= self.instance.var_count:
                raise ValueError(f"scripted variable {vid} out of range")
        engine.push_frame(0)
        self.level = 0
        while True:
            decision = self._next_decision(script)
            if decision is None:
                frames = engine.frames[1:]
                self.decisions_at_solution = [
                    (f.data, engine.cells[f.data].value) for f in frames
                ]
                return self._model()
            vid, value = decision
            level = self.level + 1
            engine.push_frame(level, data=vid)
            self.level = level
            self.stats.decisions += 1
            self._emit("decide", var=vid, value=value, level=level)
            node = ImpNode((level, 0), vid, value, ())
            engine.bind(vid, value, node)
            ball = self._drain()
            while ball is not None:
                ball = self._recover(ball)

    def _solve_vanilla(self) -> dict[int, bool]:
        engine = self.engine
        script = list(self.options.decision_script or [])
        while True:
            decision = self._next_decision(script)
            if decision is None:
                self.decisions_at_solution = [
                    (f.data[0], engine.cells[f.data[0]].value)
                    for f in engine.frames
                ]
                return self._model()
            vid, value = decision
            level = (engine.frames[-1].key if engine.frames else 0) + 1
            frame = engine.push_frame(level, data=(vid, [not value]))
            self.level = level
            self._bind_decision(frame, vid, value)
            ball = self._drain()
            while ball is not None:
                frame = engine.throw(ball)
                self._emit("catch", key=frame.key)
                untried_vid, rest = frame.data
                if rest:
                    self._bind_decision(frame, untried_vid, rest.pop(0))
                    ball = self._drain()
                else:
                    engine.pop_frame()
                    if not engine.frames:
                        raise UnsatSignal
                    target = engine.frames[-1].key
                    self.level = target
                    self.stats.throws += 1
                    self._emit("throw", target=target,
                               payload=[list(lit) for lit in ball.payload],
                               cause="chronological")
                    ball = Ball(target, ball.payload)
            self.level = engine.frames[-1].key

    def _bind_decision(self, frame, vid: int, value: bool) -> None:
        self.stats.decisions += 1
        self.level = frame.key
        self._emit("decide", var=vid, value=value, level=frame.key)
        self.engine.bind(vid, value, None)


def solve(instance: CnfInstance, options: Optional[SolveOptions] = None) -> SatResult:
    """Solve one instance with the configured strategy."""
    return _SatRun(instance, options or SolveOptions()).solve()


def enumerate_models(
    instance: CnfInstance,
    options: Optional[SolveOptions] = None,
    stats: Optional[SearchStats] = None,
) -> Iterator[dict[int, bool]]:
    """Stream models: after each one, block its decision assignments with
    a permanent level-0 clause and restart, reusing the learnt store."""
    options = options or SolveOptions()
    store: list = []
    while True:
        run = _SatRun(instance, options, store=store)
        result = run.solve()
        if stats is not None:
            stats.decisions += result.stats.decisions
            stats.propagations += result.stats.propagations
            stats.throws += result.stats.throws
            stats.jumps += result.stats.jumps
            stats.learnt_count += result.stats.learnt_count
            stats.max_learnt_size = max(stats.max_learnt_size,
                                        result.stats.max_learnt_size)
            stats.wall_time_s += result.stats.wall_time_s
        if not result.sat:
            return
        yield dict(result.model)
        decisions = run.decisions_at_solution
        if not decisions:
            return
        blocking = tuple((not value, vid) for vid, value in decisions)
        store = [(0, blocking)] + run.engine.store_get()
