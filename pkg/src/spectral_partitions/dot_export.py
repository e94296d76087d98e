"""DOT rendering of nodal domains and partitions with graphviz."""
from __future__ import annotations

import logging
from pathlib import Path
from typing import Sequence

import graphviz
import numpy as np

from .graph_core import Edge, Partition, WeightedGraph
from .signed import Signature, boundary_signature
from .spectral import NodalReport


logger = logging.getLogger(__name__)


PALETTE = (
    "lightblue",
    "lightcoral",
    "lightgreen",
    "khaki",
    "plum",
    "lightsalmon",
    "paleturquoise",
    "thistle",
    "wheat",
    "lightpink",
)


def _sign_mark(value: float, zero: bool) -> str:
    if zero:
        return "0"
    return "+" if value > 0 else "-"


def _render(
    graph: WeightedGraph,
    labels: Sequence[int],
    dashed: frozenset[Edge],
    *,
    signature: Signature | None,
    values: np.ndarray | None,
    zero_vertices: frozenset[int],
    comment: str,
    path: Path | None,
) -> str:
    dot = graphviz.Graph(comment=comment)
    dot.attr(bgcolor="white", fontname="Arial")
    dot.attr("node", shape="circle", style="filled", fontname="Arial")

    for v in range(graph.vertex_count):
        label = str(v)
        if values is not None:
            label += f"\\n{_sign_mark(values[v], v in zero_vertices)}"
        if labels[v] < 0:
            dot.node(str(v), label, style="", color="gray40")
        else:
            dot.node(str(v), label, fillcolor=PALETTE[labels[v] % len(PALETTE)])

    for i, j, w in graph.edges:
        attrs = {"label": f"{w:g}"}
        if (i, j) in dashed:
            attrs["style"] = "dashed"
        if signature is not None and signature.sigma(i, j) < 0:
            attrs["color"] = "red"
        dot.edge(str(i), str(j), **attrs)

    if path is not None:
        dot.save(filename=str(path))
        logger.info("dot written path=%s", path)
    return dot.source


def nodal_dot(
    signature: Signature,
    report: NodalReport,
    u: np.ndarray | None = None,
    *,
    path: Path | None = None,
) -> str:
    """Strong nodal domains filled by color, nodal edges dashed, negative edges red."""
    return _render(
        signature.graph,
        report.domain_labels,
        frozenset(report.nodal_set),
        signature=signature,
        values=None if u is None else np.asarray(u, dtype=float),
        zero_vertices=frozenset(report.zero_vertices),
        comment=f"nodal domains count={report.domain_count}",
        path=path,
    )


def partition_dot(partition: Partition, *, path: Path | None = None) -> str:
    return _render(
        partition.graph,
        partition.labels,
        partition.boundary_set,
        signature=boundary_signature(partition),
        values=None,
        zero_vertices=frozenset(),
        comment=f"partition nu={partition.nu}",
        path=path,
    )
