"""Trail/handler-frame search engine with suspended watchers.

This is the control core shared by the colouring and SAT solvers.  It
provides:

* a variable store whose cells can suspend watcher goals,
* a trail that undoes bindings and watcher-registry mutations,
* a stack of handler frames, each keyed by an identifier, that a thrown
  Ball unwinds to while its payload survives the rewind,
* a FIFO wake queue drained between decisions, and
* a persistent store that is never touched by unwinding.

Wake discipline: the watchers woken by one binding run in registration
order, but a binding made *during* a watcher run schedules its own woken
batch ahead of the remainder (depth-first cascades).  This keeps the
sequence of watcher executions fully deterministic.

An Engine instance is single-threaded state; run concurrent solves on
separate instances.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from typing import Any, Iterable, Optional


class EngineError(RuntimeError):
    """Programming error inside a solver (hard fault, not a search failure)."""


class UncaughtBallError(EngineError):
    """A ball was thrown with no frame on the stack matching its target."""


@dataclass(frozen=True)
class Ball:
    """Payload-carrying jump request: unwind to the frame keyed `target`.

    The payload must be ground, immutable data (a frozenset of ids or a
    tuple of literal pairs) so that it survives the rewind unchanged.
    """

    target: int
    payload: Any


class Throw(Exception):
    """Raised by watchers to hand a Ball to the surrounding drain loop."""

    def __init__(self, ball: Ball):
        super().__init__(ball)
        self.ball = ball


@dataclass
class SearchStats:
    """Counters shared by every search mode."""

    decisions: int = 0
    propagations: int = 0
    throws: int = 0
    jumps: int = 0
    learnt_count: int = 0
    max_learnt_size: int = 0
    wall_time_s: float = 0.0

    def as_dict(self) -> dict:
        return {
            "decisions": self.decisions,
            "propagations": self.propagations,
            "throws": self.throws,
            "jumps": self.jumps,
            "learnt_count": self.learnt_count,
            "max_learnt_size": self.max_learnt_size,
            "wall_time_s": self.wall_time_s,
        }


class Watcher:
    """Base class for suspended goals.

    A watcher object is suspended at most once; re-suspension after a wake
    must use a fresh object so the trail can restore old registrations
    verbatim.  Subclasses implement `wake()`, which may bind variables,
    suspend new watchers, or raise Throw.
    """

    __slots__ = ("cells",)

    def __init__(self) -> None:
        self.cells: Optional[list] = None

    def wake(self) -> None:
        raise NotImplementedError


class Cell:
    """One solver variable: a value slot plus suspended watchers."""

    __slots__ = ("vid", "value", "info", "watchers")

    def __init__(self, vid: int):
        self.vid = vid
        self.value: Any = None
        self.info: Any = None
        self.watchers: list[Watcher] = []

    @property
    def bound(self) -> bool:
        return self.value is not None

    def __repr__(self) -> str:  # pragma: no cover - debugging aid
        return f"Cell({self.vid}={self.value!r})"


class TrailEntry:
    """One undoable mutation: a binding, a registration, or a removal."""

    __slots__ = ("kind", "slot", "data")

    BIND = "bind"
    REGISTER = "register"
    UNREGISTER = "unregister"

    def __init__(self, kind: str, slot: int, data: Any):
        self.kind = kind
        self.slot = slot
        self.data = data


@dataclass
class Frame:
    """Handler frame: a catch point keyed by vertex id or decision level.

    `conflict` accumulates the payloads caught at this frame so far;
    `data` is free for solver bookkeeping (e.g. untried values).
    """

    key: int
    mark: int
    conflict: Any = None
    data: Any = None


class Engine:
    """Trail, frames, wake queue and persistent store for one solve."""

    def __init__(self) -> None:
        self.cells: dict[int, Cell] = {}
        self.trail: list[TrailEntry] = []
        self.frames: list[Frame] = []
        self.queue: deque[Watcher] = deque()
        self._store: list = []

    # -- variable store ----------------------------------------------------

    def add_cell(self, vid: int) -> Cell:
        if vid in self.cells:
            raise EngineError(f"duplicate variable id {vid}")
        cell = Cell(vid)
        self.cells[vid] = cell
        return cell

    def bind(self, vid: int, value: Any, info: Any = None, wake: bool = True) -> None:
        """Bind a variable, record it on the trail, and wake its watchers.

        Binding an already-bound variable is a hard fault: search code must
        never attempt it (conflicts are signalled with balls instead).
        """
        cell = self.cells[vid]
        if cell.value is not None:
            raise EngineError(f"variable {vid} is already bound")
        cell.value = value
        cell.info = info
        self.trail.append(TrailEntry(TrailEntry.BIND, vid, cell))
        if wake and cell.watchers:
            batch = list(cell.watchers)
            for w in batch:
                self._detach(w)
            # Depth-first cascades: this batch runs before whatever an
            # enclosing watcher had left pending.
            self.queue.extendleft(reversed(batch))

    # -- watcher registry --------------------------------------------------

    def suspend(self, watcher: Watcher, vids: Iterable[int]) -> None:
        """Suspend `watcher` on every variable in `vids` (all unbound)."""
        if watcher.cells is not None:
            raise EngineError("watcher objects are single-use; clone to re-suspend")
        cells = []
        for vid in vids:
            cell = self.cells[vid]
            if cell.value is not None:
                raise EngineError(f"cannot suspend on bound variable {vid}")
            cell.watchers.append(watcher)
            cells.append(cell)
        watcher.cells = cells
        self.trail.append(TrailEntry(TrailEntry.REGISTER, id(watcher), watcher))

    def _detach(self, watcher: Watcher) -> None:
        """Remove a woken watcher from every suspension list (trailed)."""
        saved = []
        for cell in watcher.cells or ():
            pos = cell.watchers.index(watcher)
            cell.watchers.pop(pos)
            saved.append((cell, pos))
        self.trail.append(TrailEntry(TrailEntry.UNREGISTER, id(watcher), (watcher, saved)))

    def drain(self) -> Optional[Ball]:
        """Run woken watchers until quiescence or a thrown ball.

        Returns the ball of the first watcher that throws; the pending
        remainder of the queue is left for `throw()` to clear, and the
        rewind re-suspends those watchers via their trailed removals.
        """
        try:
            while self.queue:
                self.queue.popleft().wake()
        except Throw as t:
            return t.ball
        return None

    # -- trail -------------------------------------------------------------

    def mark(self) -> int:
        return len(self.trail)

    def rewind_to(self, mark: int) -> None:
        trail = self.trail
        while len(trail) > mark:
            entry = trail.pop()
            kind = entry.kind
            if kind == TrailEntry.BIND:
                cell = entry.data
                cell.value = None
                cell.info = None
            elif kind == TrailEntry.REGISTER:
                watcher = entry.data
                for cell in watcher.cells:
                    popped = cell.watchers.pop()
                    if popped is not watcher:  # pragma: no cover - sanity
                        raise EngineError("trail out of order")
            else:  # UNREGISTER: re-insert at recorded positions
                watcher, saved = entry.data
                for cell, pos in saved:
                    cell.watchers.insert(pos, watcher)

    # -- frames ------------------------------------------------------------

    def push_frame(self, key: int, conflict: Any = None, data: Any = None) -> Frame:
        if any(f.key == key for f in self.frames):
            raise EngineError(f"frame key {key} already on the stack")
        frame = Frame(key=key, mark=self.mark(), conflict=conflict, data=data)
        self.frames.append(frame)
        return frame

    def pop_frame(self) -> Frame:
        return self.frames.pop()

    def top_frame(self) -> Frame:
        return self.frames[-1]

    def throw(self, ball: Ball) -> Frame:
        """Unwind to the frame keyed `ball.target` and return it.

        Frames above the target are popped, the trail is rewound to the
        target frame's mark, and the wake queue is cleared.  The caller
        runs the recovery logic with `ball.payload`, which is untouched by
        the rewind.
        """
        frames = self.frames
        idx = len(frames) - 1
        while idx >= 0 and frames[idx].key != ball.target:
            idx -= 1
        if idx < 0:
            raise UncaughtBallError(f"no frame catches ball targeting {ball.target}")
        del frames[idx + 1:]
        self.rewind_to(frames[idx].mark)
        self.queue.clear()
        return frames[idx]

    # -- persistent store (survives unwinding) ------------------------------

    def store_get(self) -> list:
        return self._store

    def store_put(self, items: list) -> None:
        self._store = items

    # -- introspection (tests, invariant checks) ----------------------------

    def snapshot(self) -> dict:
        """Deep comparable view of the variable store and watcher registry."""
        return {
            vid: (cell.value, cell.info, tuple(id(w) for w in cell.watchers))
            for vid, cell in self.cells.items()
        }
