"""Graph colouring with conflict-directed backjumping.

Edge constraints are checks that suspend until both endpoint vertices
are coloured, then throw a ball naming the two conflicting vertices.
Each vertex owns a handler frame that accumulates the conflict sets
caught there; when a vertex runs out of colours, the accumulated set
(minus the vertex itself) is re-thrown to its highest member, skipping
the vertices in between.
"""

from __future__ import annotations

import time
from dataclasses import dataclass
from typing import Iterator, Optional

from bjkit.engine import Ball, Engine, SearchStats, Throw, Watcher
from bjkit.trace import TraceSink


class Unsatisfiable(Exception):
    """Internal signal: conflict analysis exhausted the root vertex."""


@dataclass
class ColoringInstance:
    """Vertices 1..vertex_count, an ordered colour list, undirected edges."""

    vertex_count: int
    colors: list[str]
    edges: list[tuple[int, int]]

    def validate(self) -> None:
        if self.vertex_count < 1:
            raise ValueError("vertex count must be positive")
        if not self.colors:
            raise ValueError("colour list must be non-empty")
        if len(set(self.colors)) != len(self.colors):
            raise ValueError("colour labels must be distinct")
        for x, y in self.edges:
            if x == y:
                raise ValueError(f"self-loop edge on vertex {x}")
            for v in (x, y):
                if not 1 <= v <= self.vertex_count:
                    raise ValueError(f"edge endpoint {v} out of range")

    @classmethod
    def from_json_obj(cls, obj: dict) -> "ColoringInstance":
        inst = cls(
            vertex_count=obj["vertices"],
            colors=list(obj["colors"]),
            edges=[(int(a), int(b)) for a, b in obj["edges"]],
        )
        inst.validate()
        return inst


@dataclass
class ColoringSolution:
    assignment: dict[int, str]
    stats: SearchStats


class EdgeCheck(Watcher):
    """Disequality check for one edge; single-use, cloned on re-suspension."""

    __slots__ = ("engine", "xid", "yid")

    def __init__(self, engine: Engine, xid: int, yid: int):
        super().__init__()
        self.engine = engine
        self.xid = xid
        self.yid = yid

    def wake(self) -> None:
        engine = self.engine
        x = engine.cells[self.xid]
        y = engine.cells[self.yid]
        unbound = [c.vid for c in (x, y) if not c.bound]
        if unbound:
            engine.suspend(EdgeCheck(engine, self.xid, self.yid), unbound)
            return
        if x.value == y.value:
            lo, hi = min(self.xid, self.yid), max(self.xid, self.yid)
            raise Throw(Ball(hi, frozenset((lo, hi))))
        # satisfied: retire without re-suspending


def post_edge_check(engine: Engine, xid: int, yid: int) -> EdgeCheck:
    """Register the disequality check for edge (xid, yid).

    The check stays suspended until both endpoints are bound; equal
    colours throw ball(max(xid, yid), {min, max}).
    """
    if xid == yid:
        raise ValueError("self-loop edge")
    check = EdgeCheck(engine, xid, yid)
    engine.suspend(check, [xid, yid])
    return check


def update_conflict(
    rest_colors: list[str],
    conflict_ids: frozenset[int],
    accumulated: frozenset[int],
    vertex_id: int,
) -> frozenset[int]:
    """Merge a caught conflict into a frame's accumulator.

    Returns the merged set when colours remain to try at this vertex.
    With no colours left, removes the vertex and re-throws to the highest
    remaining id; an empty remainder means the conflict cannot be
    repaired anywhere, i.e. the instance is unsatisfiable.
    """
    merged = conflict_ids | accumulated
    if rest_colors:
        return merged
    rest = merged - {vertex_id}
    if not rest:
        raise Unsatisfiable
    raise Throw(Ball(max(rest), rest))


class _Search:
    """One colouring run over an engine; drives frames and recovery."""

    def __init__(self, instance: ColoringInstance, sink: Optional[TraceSink] = None):
        instance.validate()
        self.instance = instance
        self.sink = sink
        self.stats = SearchStats()
        self.engine = Engine()
        for vid in range(1, instance.vertex_count + 1):
            self.engine.add_cell(vid)
        for x, y in instance.edges:
            post_edge_check(self.engine, x, y)

    def _emit(self, kind: str, **payload) -> None:
        if self.sink is not None:
            self.sink.emit(kind, **payload)

    def _assignment(self) -> dict[int, str]:
        return {vid: cell.value for vid, cell in self.engine.cells.items()}

    def _recover(self, ball: Ball, cause: str) -> None:
        """Catch `ball`, merging conflicts until some frame can retry."""
        engine = self.engine
        while True:
            self.stats.throws += 1
            self._emit(
                "throw", target=ball.target, payload=sorted(ball.payload), cause=cause
            )
            frame = engine.throw(ball)
            self._emit("catch", key=frame.key)
            rest_colors = self.instance.colors[frame.data:]
            try:
                frame.conflict = update_conflict(
                    rest_colors, ball.payload, frame.conflict, frame.key
                )
                return
            except Throw as t:
                engine.pop_frame()
                ball = t.ball
                self.stats.jumps += frame.key - ball.target
                cause = "analysis"

    def run(self) -> Iterator[dict[int, str]]:
        """Yield solutions in search order until the space is exhausted."""
        engine = self.engine
        n = self.instance.vertex_count
        colors = self.instance.colors
        retry = None
        try:
            while True:
                if retry is None:
                    if len(engine.frames) == n:
                        assignment = self._assignment()
                        self._emit("solution", assignment=assignment)
                        yield assignment
                        all_ids = frozenset(range(1, n + 1))
                        self._recover(Ball(n, all_ids), cause="enumerate")
                        frame = engine.top_frame()
                    else:
                        vid = len(engine.frames) + 1
                        frame = engine.push_frame(vid, conflict=frozenset(), data=0)
                else:
                    frame = retry
                    retry = None
                color = colors[frame.data]
                frame.data += 1
                self.stats.decisions += 1
                self._emit("decide", var=frame.key, value=color, level=frame.key)
                engine.bind(frame.key, color)
                ball = engine.drain()
                if ball is not None:
                    self._emit("conflict", ids=sorted(ball.payload))
                    self._recover(ball, cause="check")
                    retry = engine.top_frame()
        except Unsatisfiable:
            self._emit("unsat")
            return


def solve(
    instance: ColoringInstance,
    sink: Optional[TraceSink] = None,
    stats: Optional[SearchStats] = None,
) -> Optional[ColoringSolution]:
    """First solution (vertices coloured in id order, colours in input
    order), or None when the instance is unsatisfiable.  An optional
    `stats` object receives the counters even when there is no solution."""
    start = time.perf_counter()
    search = _Search(instance, sink)
    if stats is not None:
        search.stats = stats
    for assignment in search.run():
        search.stats.wall_time_s = time.perf_counter() - start
        return ColoringSolution(assignment=assignment, stats=search.stats)
    search.stats.wall_time_s = time.perf_counter() - start
    return None


def enumerate_solutions(
    instance: ColoringInstance,
    sink: Optional[TraceSink] = None,
    stats: Optional[SearchStats] = None,
) -> Iterator[dict[int, str]]:
    """Stream every solution; exhaustion is driven by re-throwing a ball
    carrying all vertex ids, which degrades backjumping to chronological
    backtracking behind the last solution."""
    search = _Search(instance, sink)
    if stats is not None:
        search.stats = stats
    yield from search.run()
