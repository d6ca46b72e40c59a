"""Machine-readable output: JSON documents and DOT renderings.

All documents are byte-deterministic for a fixed (input, command, seed,
caps) tuple: keys are sorted, collections are emitted in canonical order,
and rationals appear as exact "p/q" strings next to float renderings.
"""

from __future__ import annotations

import json
from fractions import Fraction
from importlib import resources
from typing import Optional

from .effective import EffectiveGraph, GroundSolution, SampleReport
from .model import Mask, render_support
from .termgraph import (
    ASSIGNMENT,
    CLAUSE,
    CLAUSE_CLUSTER,
    GENERATOR,
    LITERAL,
    PAIR,
    WEIGHT_CLUSTER,
    WEIGHT_GENERATOR,
    ColoredDigraph,
    TermVertex,
)


def exact_str(value: Fraction) -> str:
    return f"{value.numerator}/{value.denominator}"


def dumps(doc: dict) -> str:
    return json.dumps(doc, sort_keys=True, indent=2) + "\n"


def effective_doc(
    eg: EffectiveGraph, gs: GroundSolution, probabilities, backend: str
) -> dict:
    n = eg.n
    return {
        "command": "effective",
        "n": n,
        "seed_vertex": render_support(eg.seed_vertex, n),
        "reps": [render_support(r, n) for r in eg.reps],
        "omega": {
            "exact": [[exact_str(x) for x in row] for row in eg.omega],
            "float": [[float(x) for x in row] for row in eg.omega],
        },
        "boundary": {
            "exact": [exact_str(x) for x in eg.boundary],
            "float": [float(x) for x in eg.boundary],
        },
        "class_sizes": list(eg.class_sizes),
        "component_size": eg.component_size,
        "visited_count": eg.visited_count,
        "energy": gs.energy,
        "gap": gs.gap,
        "residual": gs.residual,
        "iterations": gs.iterations,
        "degenerate": gs.degenerate,
        "probabilities": list(probabilities),
        "backend": backend,
    }


def sample_doc(report: SampleReport, include_shots: bool) -> dict:
    n = report.n
    doc = {
        "command": "sample",
        "n": n,
        "shots": report.shots,
        "seed": report.seed,
        "member_uniformity": report.member_uniformity,
        "components": [
            {
                "seed_vertex": render_support(c.effective.seed_vertex, n),
                "reps": [render_support(r, n) for r in c.effective.reps],
                "class_sizes": list(c.effective.class_sizes),
                "component_size": c.effective.component_size,
                "probabilities": list(c.probabilities),
                "energy": c.ground.energy,
            }
            for c in report.components
        ],
        "probabilities": dict(sorted(report.probabilities.items())),
    }
    if include_shots:
        doc["emitted"] = [
            {"rep": render_support(r, n), "member": render_support(m, n)}
            for r, m in report.shot_pairs()
        ]
    return doc


_SHAPES = {
    LITERAL: "ellipse",
    ASSIGNMENT: "doublecircle",
    GENERATOR: "box",
    WEIGHT_GENERATOR: "diamond",
    WEIGHT_CLUSTER: "hexagon",
    CLAUSE: "trapezium",
    CLAUSE_CLUSTER: "octagon",
    PAIR: "point",
}


def _vertex_name(v: TermVertex, n: int) -> str:
    if v.kind == LITERAL:
        sign, qubit = v.label
        return f"{'-' if sign < 0 else ''}Z{qubit}"
    if v.kind == ASSIGNMENT:
        return f"A_{render_support(v.label[0], n)}"
    if v.kind in (GENERATOR, WEIGHT_CLUSTER, CLAUSE_CLUSTER):
        prefix = {GENERATOR: "X", WEIGHT_CLUSTER: "Y", CLAUSE_CLUSTER: "Z"}[v.kind]
        return f"{prefix}_{render_support(v.label[0], n)}"
    if v.kind in (WEIGHT_GENERATOR, CLAUSE):
        prefix = "u" if v.kind == WEIGHT_GENERATOR else "c"
        b, pattern = v.label
        return f"{prefix}_{render_support(b, n)}_{render_support(pattern, n)}"
    if v.kind == PAIR:
        return f"p{v.label[0]}"
    return str(v.label)


def termgraph_dot(graph: ColoredDigraph, n: int) -> str:
    """DOT rendering: one node per vertex (shape by kind, color value in the
    label), bidirected pairs as plain edges, one-way pairs with arrowheads."""
    vertices = graph.sorted_vertices()
    lines = ["digraph termgraph {"]
    for v in vertices:
        label = _vertex_name(v, n)
        if v.value is not None:
            label += f" ({exact_str(v.value)})"
        shape = _SHAPES.get(v.kind, "ellipse")
        lines.append(f'  "{_vertex_name(v, n)}" [label="{label}", shape={shape}];')
    seen = set()
    edge_lines = []
    for a, b in graph.edges:
        if (b, a) in graph.edges:
            key = tuple(sorted((_vertex_name(a, n), _vertex_name(b, n))))
            if key in seen:
                continue
            seen.add(key)
            edge_lines.append(f'  "{key[0]}" -> "{key[1]}" [dir=none];')
        else:
            edge_lines.append(
                f'  "{_vertex_name(a, n)}" -> "{_vertex_name(b, n)}";'
            )
    lines.extend(sorted(edge_lines))
    lines.append("}")
    return "\n".join(lines) + "\n"


def termgraph_doc(graph: ColoredDigraph, n: int) -> dict:
    vertices = graph.sorted_vertices()
    index = {v: i for i, v in enumerate(vertices)}
    return {
        "command": "export-ctg",
        "n": n,
        "vertices": [
            {
                "kind": v.kind,
                "name": _vertex_name(v, n),
                "color": None if v.value is None else exact_str(v.value),
            }
            for v in vertices
        ],
        "edges": sorted([index[a], index[b]] for a, b in graph.edges),
    }


def gamma_dot(ham) -> str:
    """Explicit hypercube rendering with boundary-edge weights as labels."""
    from .hypercube import boundary_weight, neighbors

    n = ham.n
    lines = ["graph gamma {"]
    for x in range(1 << n):
        lines.append(f'  "{render_support(x, n)}";')
    lines.append('  "inf" [shape=box];')
    edge_lines = []
    for x in range(1 << n):
        for y, w in neighbors(ham, x):
            if x < y:
                edge_lines.append(
                    f'  "{render_support(x, n)}" -- "{render_support(y, n)}"'
                    f' [label="{exact_str(w)}"];'
                )
        bw = boundary_weight(ham, x)
        if bw != 0:
            edge_lines.append(
                f'  "{render_support(x, n)}" -- "inf" [label="{exact_str(bw)}"];'
            )
    lines.extend(edge_lines)
    lines.append("}")
    return "\n".join(lines) + "\n"


def load_schema() -> dict:
    text = resources.files("stoqsym").joinpath("schemas/result.schema.json").read_text()
    return json.loads(text)
