"""Acceptance suite: one test per criterion, each printing a PASS/FAIL
line and enforcing its wall-clock budget.

Run with `pytest tests/test_acceptance.py -v -s` to see the lines.
"""

import json
import os
import random
import statistics
import time
from contextlib import contextmanager
from itertools import combinations

from bjkit import cli
from bjkit.cnf import brute_force, entails, gen_random_3sat, parse_dimacs, satisfies
from bjkit.coloring import ColoringInstance, solve as color_solve
from bjkit.sat import (
    ImpNode,
    SolveOptions,
    _SatRun,
    propagation_level,
    solve as sat_solve,
)
from bjkit.trace import TraceSink

from conftest import (
    CASCADE_SCRIPT,
    cascade_formula,
    colorings_brute,
    six_vertex_instance,
)

F, T = False, True

G6_JSON = os.path.join(os.path.dirname(__file__), "data", "graph6.json")
FIXTURES = os.path.join(os.path.dirname(__file__), "fixtures")

# First 20 generator seeds at n=75, m=323 whose instance is satisfiable.
N75_SAT_SEEDS = [0, 2, 3, 4, 7, 8, 9, 11, 12, 14,
                 16, 17, 23, 25, 28, 29, 30, 31, 32, 33]


@contextmanager
def criterion(name: str, budget_s: float):
    start = time.perf_counter()
    try:
        yield
    except BaseException:
        print(f"ACCEPTANCE {name}: FAIL ({time.perf_counter() - start:.2f}s)")
        raise
    elapsed = time.perf_counter() - start
    status = "PASS" if elapsed < budget_s else "FAIL (over budget)"
    print(f"ACCEPTANCE {name}: {status} ({elapsed:.2f}s, budget {budget_s:.0f}s)")
    assert elapsed < budget_s, f"{name} exceeded {budget_s}s"


def test_colouring_golden_trace(tmp_path, capsys):
    with criterion("colouring-golden-trace", 1.0):
        trace = tmp_path / "trace.jsonl"
        code = cli.run(["color", "solve", G6_JSON, "--trace", str(trace)])
        out = capsys.readouterr().out
        assert code == 10
        assert "a 1=red 2=green 3=green 4=red 5=red 6=red" in out
        events = [json.loads(l) for l in trace.read_text().splitlines()]
        golden = []
        for e in events:
            if e["kind"] == "conflict":
                golden.append(("conflict", tuple(e["ids"])))
            elif e["kind"] == "throw" and e["cause"] == "analysis":
                golden.append(("ball", e["target"], tuple(e["payload"])))
        assert golden == [
            ("conflict", (1, 3)),
            ("conflict", (2, 5)),
            ("conflict", (2, 6)),
            ("conflict", (3, 6)),
            ("ball", 3, (2, 3)),
            ("ball", 2, (1, 2)),
            ("conflict", (1, 3)),
        ]


def test_implication_graph_golden():
    with criterion("implication-graph-golden", 1.0):
        cascade = cascade_formula()
        sink = TraceSink()
        res = sat_solve(cascade, SolveOptions(
            strategy="last-uip", decision_script=list(CASCADE_SCRIPT), sink=sink
        ))
        assert res.sat
        first_throw = sink.of_kind("throw")[0]
        levels = {e["var"]: tuple(e["level"])
                  for e in sink.of_kind("propagate")
                  if e["seq"] < first_throw["seq"]}
        assert levels == {2: (3, 1), 3: (3, 1), 4: (3, 2), 5: (3, 3), 6: (3, 4)}
        assert first_throw["target"] == 2
        assert [tuple(l) for l in first_throw["payload"]] == [(F, 1), (T, 8), (T, 7)]

        sink2 = TraceSink()
        sat_solve(cascade, SolveOptions(
            strategy="first-uip", decision_script=list(CASCADE_SCRIPT), sink=sink2
        ))
        fu_throw = sink2.of_kind("throw")[0]
        assert [tuple(l) for l in fu_throw["payload"]] == [(F, 4), (T, 7)]


def agreement_corpus():
    for s in range(500):
        n = 4 + s % 9                    # 4..12
        ratio = 2.0 + (s % 41) * 0.1     # 2.0..6.0
        m = max(1, round(n * ratio))
        yield gen_random_3sat(n, m, seed=1000 + s)


def test_oracle_agreement():
    with criterion("oracle-agreement", 60.0):
        for inst in agreement_corpus():
            want = brute_force(inst) is not None
            for strategy in ("none", "last-uip", "first-uip"):
                res = sat_solve(inst, SolveOptions(strategy=strategy))
                assert res.sat == want, (inst, strategy)
                if res.sat:
                    assert satisfies(inst, res.model), (inst, strategy)
                for _, clause in res.learnt:
                    assert entails(inst, clause), (inst, strategy, clause)


def test_colouring_completeness():
    with criterion("colouring-completeness", 60.0):
        instances = []
        for n in (4, 5):
            pairs = list(combinations(range(1, n + 1), 2))
            for bits in range(2 ** len(pairs)):
                edges = [pairs[i] for i in range(len(pairs)) if bits >> i & 1]
                instances.append((n, edges))
        rng = random.Random(2024)
        pairs6 = list(combinations(range(1, 7), 2))
        for _ in range(200):
            edges = [e for e in pairs6 if rng.random() < 0.5]
            instances.append((6, edges))
        palettes = (["red", "green"], ["red", "green", "blue"])
        for n, edges in instances:
            for colors in palettes:
                inst = ColoringInstance(n, list(colors), list(edges))
                got = color_solve(inst)
                want = colorings_brute(inst)
                assert (got is not None) == bool(want), inst
                if got is not None:
                    assert all(got.assignment[x] != got.assignment[y]
                               for x, y in inst.edges)


def test_learning_reduces_decisions():
    with criterion("learning-reduces-decisions", 120.0):
        rows = []
        for seed in N75_SAT_SEEDS:
            inst = gen_random_3sat(75, 323, seed)
            learning = sat_solve(inst, SolveOptions(strategy="last-uip", k=8))
            vanilla = sat_solve(inst, SolveOptions(strategy="none"))
            assert learning.sat and vanilla.sat, f"seed {seed} not satisfiable"
            assert satisfies(inst, learning.model)
            assert satisfies(inst, vanilla.model)
            rows.append((vanilla.stats.decisions, learning.stats.decisions))
        med_vanilla = statistics.median(r[0] for r in rows)
        med_learning = statistics.median(r[1] for r in rows)
        assert med_learning <= med_vanilla, rows
        reduced = sum(1 for v, l in rows if l < v)
        assert reduced >= 0.7 * len(rows), rows

        for name, expect_sat in (("uf100-0126.cnf", True), ("uuf100-0120.cnf", False)):
            path = os.path.join(FIXTURES, name)
            if not os.path.exists(path):
                continue
            with open(path) as f:
                inst = parse_dimacs(f.read())
            res = sat_solve(inst, SolveOptions(strategy="last-uip", k=8))
            assert res.sat == expect_sat, name


def _walk_nodes(snapshot):
    seen = {}
    work = list(snapshot)
    while work:
        node = work.pop()
        if id(node) in seen:
            continue
        seen[id(node)] = node
        work.extend(node.reasons)
    return list(seen.values())


def _leaf_majors(snapshot):
    return [n.level[0] for n in _walk_nodes(snapshot) if not n.reasons]


def test_invariant_suites():
    with criterion("invariant-suites", 120.0):
        corpus = list(agreement_corpus())

        # trail round-trip over solver-built state
        for inst in corpus[:100]:
            run = _SatRun(inst, SolveOptions(strategy="last-uip"))
            run._setup()
            mark = run.engine.mark()
            before = run.engine.snapshot()
            run.engine.push_frame(0)
            level = 0
            for vid in range(1, inst.var_count + 1):
                if run.engine.cells[vid].value is None and level < 3:
                    level += 1
                    run.engine.push_frame(level, data=vid)
                    run.level = level
                    run.engine.bind(vid, True, ImpNode((level, 0), vid, True, ()))
                    if run.engine.drain() is not None:
                        break
            run.engine.rewind_to(mark)
            assert run.engine.snapshot() == before

        # watcher suspension at every quiescence
        def check_suspended(run):
            for cell in run.engine.cells.values():
                for w in cell.watchers:
                    assert run.engine.cells[w.vid1].value is None
                    assert run.engine.cells[w.vid2].value is None

        for inst in corpus:
            sat_solve(inst, SolveOptions(strategy="last-uip",
                                         on_quiescence=check_suspended))

        # implication-node level law over every produced graph,
        # plus the backjump-target law against the traced balls
        for inst in corpus:
            sink = TraceSink()
            run = _SatRun(inst, SolveOptions(strategy="last-uip",
                                             keep_graphs=True, sink=sink))
            result = run.solve()
            for snapshot in run.conflict_graphs:
                for node in _walk_nodes(snapshot):
                    if node.reasons:
                        assert node.level == propagation_level(list(node.reasons))
                    else:
                        maj, sub = node.level
                        assert (sub == 0 and maj >= 1) or node.level == (0, 1)
            throws = sink.of_kind("throw")
            graphs = run.conflict_graphs
            if result.status == "UNSAT":
                assert all(m == 0 for m in _leaf_majors(graphs[-1]))
                graphs = graphs[:-1]
            assert len(graphs) == len(throws)
            for snapshot, throw in zip(graphs, throws):
                majors = sorted(set(_leaf_majors(snapshot)))
                target = majors[0] if len(majors) == 1 else majors[-2]
                assert throw["target"] == target
                if len(majors) > 1:
                    assert throw["target"] < max(majors)

        # colouring ball-target law on a colouring corpus
        rng = random.Random(5)
        colour_instances = [six_vertex_instance()]
        for _ in range(30):
            n = rng.randint(3, 6)
            pairs = list(combinations(range(1, n + 1), 2))
            edges = [e for e in pairs if rng.random() < 0.5]
            colour_instances.append(ColoringInstance(n, ["red", "green"], edges))
        for inst in colour_instances:
            sink = TraceSink()
            color_solve(inst, sink)
            for e in sink.of_kind("throw"):
                if e["cause"] in ("check", "analysis"):
                    assert e["target"] == max(e["payload"])

        # determinism: two traced runs are identical
        for inst in corpus[:150]:
            traces = []
            for _ in range(2):
                sink = TraceSink()
                sat_solve(inst, SolveOptions(strategy="last-uip", sink=sink))
                traces.append(sink.events)
            assert traces[0] == traces[1]
