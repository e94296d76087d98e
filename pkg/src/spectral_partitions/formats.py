"""JSON input files and report serialization.

Floats are written as strings: eigenvalues with 15 significant digits, every
other number as its shortest round-trip repr, so reports are byte-stable.
"""
from __future__ import annotations

import json
import logging
from pathlib import Path
from typing import Any, Iterable, Sequence

import numpy as np

from .bounds import BoundReport, RayleighCertificate, SignedEquipartition
from .critical import CriticalPoint, RestorationReport
from .graph_core import Edge, Partition, SpectralPartitionError, WeightedGraph, build_graph, make_partition
from .param_partition import ParamPoint, make_param_point
from .signed import Signature, make_signature
from .spectral import CourantRow, NodalReport, SpectrumReport


logger = logging.getLogger(__name__)


class ParseError(SpectralPartitionError):
    def __init__(self, *, path: str, detail: str):
        super().__init__(f"{path}: {detail}")
        self.path = path
        self.detail = detail


def eigen_str(value: float) -> str:
    return format(float(value), ".15g")


def num_str(value: float) -> str:
    return repr(float(value))


def edge_key(edge: Sequence[int]) -> str:
    return f"{edge[0]}-{edge[1]}"


def load_json(path: Path | str) -> Any:
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise ParseError(path=str(path), detail=f"cannot read file ({exc.strerror})") from exc
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(path=str(path), detail=f"invalid JSON at line {exc.lineno} column {exc.colno}") from exc


def _require(data: Any, key: str, path: str) -> Any:
    if not isinstance(data, dict):
        raise ParseError(path=path, detail="expected a JSON object")
    if key not in data:
        raise ParseError(path=path, detail=f"missing '{key}'")
    return data[key]


def _int(value: Any, path: str, what: str) -> int:
    if isinstance(value, bool) or not isinstance(value, int):
        raise ParseError(path=path, detail=f"{what} must be an integer")
    return value


def _float(value: Any, path: str, what: str) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float, str)):
        raise ParseError(path=path, detail=f"{what} must be a number")
    try:
        return float(value)
    except ValueError as exc:
        raise ParseError(path=path, detail=f"{what} must be a number") from exc


def _pairs(value: Any, path: str, what: str) -> list[Edge]:
    if not isinstance(value, list):
        raise ParseError(path=path, detail=f"{what} must be a list")
    pairs: list[Edge] = []
    for entry in value:
        if not isinstance(entry, list) or len(entry) != 2:
            raise ParseError(path=path, detail=f"{what} entries must be [i, j] pairs")
        pairs.append((_int(entry[0], path, "vertex"), _int(entry[1], path, "vertex")))
    return pairs


def parse_graph(data: Any, path: str = "<graph>") -> WeightedGraph:
    """{"vertices": N, "edges": [[i, j, w], ...]}"""
    vertices = _int(_require(data, "vertices", path), path, "vertices")
    raw_edges = _require(data, "edges", path)
    if not isinstance(raw_edges, list):
        raise ParseError(path=path, detail="edges must be a list")
    edges = []
    for entry in raw_edges:
        if not isinstance(entry, list) or len(entry) != 3:
            raise ParseError(path=path, detail="edges entries must be [i, j, w] triples")
        edges.append((_int(entry[0], path, "vertex"), _int(entry[1], path, "vertex"), _float(entry[2], path, "weight")))
    return build_graph(vertices, edges)


def parse_partition(data: Any, graph: WeightedGraph, path: str = "<partition>") -> Partition:
    labels = _require(data, "labels", path)
    if not isinstance(labels, list):
        raise ParseError(path=path, detail="labels must be a list")
    return make_partition(graph, [_int(label, path, "label") for label in labels])


def parse_signature(data: Any, graph: WeightedGraph, path: str = "<signature>") -> Signature:
    return make_signature(graph, _pairs(_require(data, "negative_edges", path), path, "negative_edges"))


def parse_vector(data: Any, size: int, path: str = "<vector>") -> np.ndarray:
    values = _require(data, "vector", path)
    if not isinstance(values, list) or len(values) != size:
        raise ParseError(path=path, detail=f"vector must be a list of {size} numbers")
    return np.array([_float(v, path, "vector entry") for v in values])


def parse_alpha(data: Any, partition: Partition, path: str = "<alpha>") -> ParamPoint:
    """{"alpha": {"i-j": value, ...}} with one key per boundary edge."""
    mapping = _require(data, "alpha", path)
    if not isinstance(mapping, dict):
        raise ParseError(path=path, detail="alpha must be an object keyed by 'i-j'")
    expected = {edge_key(edge) for edge in partition.boundary}
    if set(mapping) != expected:
        missing = sorted(expected - set(mapping))
        extra = sorted(set(mapping) - expected)
        raise ParseError(path=path, detail=f"alpha keys do not match the boundary (missing {missing}, extra {extra})")
    return make_param_point(partition, [_float(mapping[edge_key(edge)], path, "alpha") for edge in partition.boundary])


def dumps(payload: Any) -> str:
    return json.dumps(payload, indent=2) + "\n"


def _edges(edges: Iterable[Sequence[int]]) -> list[list[int]]:
    return [[int(i), int(j)] for i, j in edges]


def _vector(values: Iterable[float]) -> list[str]:
    return [num_str(v) for v in values]


def spectrum_to_dict(report: SpectrumReport) -> dict[str, Any]:
    return {
        "eigenvalues": [eigen_str(v) for v in report.eigenvalues],
        "eigenvectors": [_vector(report.vector(n)) for n in range(1, report.size + 1)],
        "simple": [report.is_simple(n) for n in range(1, report.size + 1)],
    }


def nodal_to_dict(report: NodalReport) -> dict[str, Any]:
    return {
        "nodal_set": _edges(report.nodal_set),
        "domain_labels": list(report.domain_labels),
        "domain_count": report.domain_count,
        "zero_vertices": list(report.zero_vertices),
        "eigen_index": report.eigen_index,
        "deficiency": report.deficiency,
    }


def courant_rows_to_list(rows: Iterable[CourantRow]) -> list[dict[str, int]]:
    return [{"index": r.index, "nodal_count": r.nodal_count, "deficiency": r.deficiency} for r in rows]


def param_point_to_dict(point: ParamPoint) -> dict[str, Any]:
    return {"alpha": {edge_key(edge): num_str(a) for edge, a in point.items()}}


def critical_to_dict(
    critical: CriticalPoint,
    certificate: Sequence[float] | None = None,
    restoration: RestorationReport | None = None,
) -> dict[str, Any]:
    payload: dict[str, Any] = {
        **param_point_to_dict(critical.point),
        "energy": eigen_str(critical.energy),
        "eigen_index": critical.eigen_index,
        "nu": critical.nu,
        "deficiency": critical.deficiency,
        "morse_index": critical.morse_index,
        "hessian_eigenvalues": (
            None if critical.hessian_eigenvalues is None else _vector(critical.hessian_eigenvalues)
        ),
        "certificate_c": None if certificate is None else _vector(certificate),
    }
    if restoration is not None:
        payload["edge_restoration"] = {
            "removed_edges": _edges(restoration.removed_edges),
            "maximum_flags": list(restoration.maximum_flags),
            "predicted_index": restoration.predicted_index,
            "consistent": restoration.consistent,
        }
    return payload


def bound_to_dict(report: BoundReport) -> dict[str, Any]:
    return {
        "gamma": _edges(report.gamma),
        "labels": list(report.labels),
        "lambda_nu": eigen_str(report.lambda_nu),
        "inf_energy_estimate": eigen_str(report.inf_energy_estimate),
        "slack": num_str(report.slack),
        "equality_case": report.equality_case,
        "witness_subset": _edges(report.witness_subset),
        "best_point": None if report.best_point is None else param_point_to_dict(report.best_point)["alpha"],
    }


def certificate_to_dict(certificate: RayleighCertificate) -> dict[str, Any]:
    return {
        "quotient": eigen_str(certificate.quotient),
        "lambda_nu": eigen_str(certificate.lambda_nu),
        "energy": eigen_str(certificate.energy),
        "remainder_min_eigenvalue": num_str(certificate.remainder_min_eigenvalue),
        "holds": certificate.holds,
    }


def signed_equipartition_to_dict(found: SignedEquipartition) -> dict[str, Any]:
    return {
        "labels": list(found.partition.labels),
        **param_point_to_dict(found.point),
        "energy": eigen_str(found.energy),
        "eigenvalue": eigen_str(found.eigenvalue),
    }
