"""Implication-graph exports (DOT text and rendered figures) and a
coloured-graph figure for the colouring solver.

Matplotlib is imported lazily so solver-only runs never pay for it.
"""

from __future__ import annotations

import math
from typing import Optional


def _collect_nodes(snapshot: tuple) -> list:
    """Reachable implication nodes, ordered by (level, var id)."""
    seen: dict[int, object] = {}
    stack = list(snapshot)
    while stack:
        node = stack.pop()
        if id(node) in seen:
            continue
        seen[id(node)] = node
        stack.extend(node.reasons)
    return sorted(seen.values(), key=lambda n: (n.level, n.var))


def _edges(nodes: list, snapshot: tuple) -> list[tuple]:
    """(source, dest) pairs; dest None stands for the conflict node."""
    out = []
    for node in nodes:
        for reason in node.reasons:
            out.append((reason, node))
    conflict_sources = []
    seen_vars = set()
    for node in snapshot:
        if node.var not in seen_vars:
            seen_vars.add(node.var)
            conflict_sources.append(node)
    for node in sorted(conflict_sources, key=lambda n: (n.level, n.var)):
        out.append((node, None))
    return out


def _label(node) -> str:
    maj, sub = node.level
    return f"({maj}-{sub}, x{node.var}, {str(node.value).lower()})"


def export_dot(snapshot: Optional[tuple]) -> str:
    """DOT text for a conflict-time implication graph snapshot.

    One node per binding labelled "(major-sub, var, value)", edges from
    reasons to consequents, and a distinguished conflict node fed by the
    falsified clause's reasons.
    """
    if not snapshot:
        raise ValueError("no conflict snapshot to export")
    nodes = _collect_nodes(snapshot)
    lines = ["digraph implications {", "  rankdir=LR;"]
    for node in nodes:
        lines.append(f'  x{node.var} [label="{_label(node)}"];')
    lines.append('  kappa [label="kappa", shape=doublecircle];')
    for src, dst in _edges(nodes, snapshot):
        dst_name = "kappa" if dst is None else f"x{dst.var}"
        lines.append(f"  x{src.var} -> {dst_name};")
    lines.append("}")
    return "\n".join(lines) + "\n"


def render_implication_graph(snapshot: Optional[tuple], path: str) -> None:
    """Draw the conflict-time implication graph to an image file."""
    if not snapshot:
        raise ValueError("no conflict snapshot to render")
    import matplotlib
    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    nodes = _collect_nodes(snapshot)
    edges = _edges(nodes, snapshot)
    pos = {}
    for i, node in enumerate(nodes):
        pos[id(node)] = (i, (i % 2) * 0.8 - 0.4)
    kappa_pos = (len(nodes), 0.0)

    fig, ax = plt.subplots(figsize=(max(6, 1.4 * len(nodes)), 3.5))
    for src, dst in edges:
        x0, y0 = pos[id(src)]
        x1, y1 = kappa_pos if dst is None else pos[id(dst)]
        ax.annotate("", xy=(x1, y1), xytext=(x0, y0),
                    arrowprops=dict(arrowstyle="->", color="gray", lw=1.2))
    for node in nodes:
        x, y = pos[id(node)]
        decision = not node.reasons
        ax.scatter([x], [y], s=900, zorder=3,
                   facecolor="white", edgecolor="black",
                   linewidth=2.0 if decision else 1.0)
        ax.annotate(_label(node), (x, y), ha="center", va="center",
                    fontsize=7, zorder=4)
    ax.scatter([kappa_pos[0]], [kappa_pos[1]], s=900, zorder=3,
               facecolor="#ffdddd", edgecolor="black")
    ax.annotate("conflict", kappa_pos, ha="center", va="center",
                fontsize=7, zorder=4)
    ax.set_axis_off()
    ax.margins(0.08)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def render_coloring(instance, assignment: dict[int, str], path: str) -> None:
    """Draw the coloured graph (circular layout) to an image file."""
    import matplotlib
    matplotlib.use("Agg")
    import matplotlib.pyplot as plt
    from matplotlib.colors import is_color_like

    n = instance.vertex_count
    pos = {
        vid: (math.cos(2 * math.pi * (vid - 1) / n),
              math.sin(2 * math.pi * (vid - 1) / n))
        for vid in range(1, n + 1)
    }
    palette = plt.rcParams["axes.prop_cycle"].by_key()["color"]
    fill = {}
    for i, color in enumerate(instance.colors):
        fill[color] = color if is_color_like(color) else palette[i % len(palette)]

    fig, ax = plt.subplots(figsize=(5, 5))
    for x, y in instance.edges:
        ax.plot([pos[x][0], pos[y][0]], [pos[x][1], pos[y][1]],
                color="gray", lw=1.2, zorder=1)
    for vid in range(1, n + 1):
        x, y = pos[vid]
        ax.scatter([x], [y], s=700, zorder=2,
                   facecolor=fill[assignment[vid]], edgecolor="black")
        ax.annotate(str(vid), (x, y), ha="center", va="center",
                    fontsize=10, zorder=3)
    ax.set_aspect("equal")
    ax.set_axis_off()
    ax.margins(0.1)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
