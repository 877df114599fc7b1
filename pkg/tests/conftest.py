"""Shared instances and oracles for the test suite."""

from itertools import product

import pytest

from bjkit.cnf import CnfInstance
from bjkit.coloring import ColoringInstance

F, T = False, True


def six_vertex_instance() -> ColoringInstance:
    """Two-colourable 6-vertex graph whose search trace is pinned in the
    golden tests."""
    return ColoringInstance(
        vertex_count=6,
        colors=["red", "green"],
        edges=[(1, 3), (2, 5), (2, 6), (3, 4), (3, 6)],
    )


def cascade_formula() -> CnfInstance:
    """Eight-variable formula where one decision triggers a propagation
    cascade into a conflict; used for the golden implication graph."""
    return CnfInstance(8, [
        [(F, 1), (T, 8), (F, 2)],
        [(F, 1), (F, 3)],
        [(T, 2), (T, 3), (T, 4)],
        [(F, 4), (F, 5)],
        [(T, 5), (T, 6)],
        [(T, 7), (F, 4), (F, 6)],
    ])


CASCADE_SCRIPT = [(7, F), (8, F), (1, T)]


def chain_formula() -> CnfInstance:
    """Six-variable chain: two units propagate, the rest needs search."""
    return CnfInstance(6, [
        [(F, 1), (T, 3), (F, 2)],
        [(F, 3), (F, 4)],
        [(T, 4), (T, 6), (F, 5)],
        [(F, 6), (T, 5)],
    ])


@pytest.fixture
def g6():
    return six_vertex_instance()


@pytest.fixture
def cascade():
    return cascade_formula()


@pytest.fixture
def chain():
    return chain_formula()


# -- colouring oracles -------------------------------------------------------

def colorings_brute(instance: ColoringInstance):
    """Every valid colouring, vertices in id order, colours in input order."""
    n = instance.vertex_count
    out = []
    for combo in product(instance.colors, repeat=n):
        assignment = {vid: combo[vid - 1] for vid in range(1, n + 1)}
        if all(assignment[x] != assignment[y] for x, y in instance.edges):
            out.append(assignment)
    return out


def coloring_extendable(instance: ColoringInstance, partial: dict[int, str]) -> bool:
    """Can the partial assignment be completed to a full valid colouring?"""
    n = instance.vertex_count
    free = [vid for vid in range(1, n + 1) if vid not in partial]
    for combo in product(instance.colors, repeat=len(free)):
        assignment = dict(partial)
        assignment.update(zip(free, combo))
        if all(assignment[x] != assignment[y] for x, y in instance.edges):
            return True
    return False
