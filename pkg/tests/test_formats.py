from __future__ import annotations

import json
import math

import numpy as np
import pytest

from spectral_partitions.critical import critical_points_from_spectrum
from spectral_partitions.formats import (
    ParseError,
    critical_to_dict,
    dumps,
    edge_key,
    eigen_str,
    load_json,
    nodal_to_dict,
    num_str,
    parse_alpha,
    parse_graph,
    parse_partition,
    parse_signature,
    parse_vector,
    spectrum_to_dict,
)
from spectral_partitions.graph_core import DuplicateEdge, EmptyComponent
from spectral_partitions.signed import UnknownEdge, all_positive, plain_laplacian
from spectral_partitions.spectral import eigendecompose, nodal_report


def test_number_formats():
    assert eigen_str(3 - math.sqrt(3)) == "1.26794919243112"
    assert eigen_str(4.0) == "4"
    assert num_str(0.1) == "0.1"
    assert num_str(2) == "2.0"
    assert edge_key((0, 2)) == "0-2"


def test_parse_graph():
    graph = parse_graph({"vertices": 3, "edges": [[0, 1, 1], [1, 2, "2.5"]]})
    assert graph.edges == ((0, 1, 1.0), (1, 2, 2.5))


@pytest.mark.parametrize(
    "data",
    [
        [],
        {"edges": [[0, 1, 1.0]]},
        {"vertices": "3", "edges": [[0, 1, 1.0]]},
        {"vertices": 2, "edges": {"0": [1, 1.0]}},
        {"vertices": 2, "edges": [[0, 1]]},
        {"vertices": 2, "edges": [[0, 1, "heavy"]]},
        {"vertices": 2, "edges": [[True, 1, 1.0]]},
    ],
)
def test_parse_graph_rejects_malformed_documents(data):
    with pytest.raises(ParseError):
        parse_graph(data, "graph.json")


def test_parse_graph_keeps_structural_errors():
    with pytest.raises(DuplicateEdge):
        parse_graph({"vertices": 2, "edges": [[0, 1, 1.0], [1, 0, 1.0]]})


def test_parse_partition_signature_and_vector(weighted_path):
    partition = parse_partition({"labels": [1, 1, 0]}, weighted_path)
    assert partition.labels == (0, 0, 1)
    with pytest.raises(EmptyComponent):
        parse_partition({"labels": [0, 2, 2]}, weighted_path)
    with pytest.raises(ParseError):
        parse_partition({"labels": "001"}, weighted_path)

    assert parse_signature({"negative_edges": [[1, 0]]}, weighted_path).sorted_edges() == [(0, 1)]
    with pytest.raises(UnknownEdge):
        parse_signature({"negative_edges": [[0, 2]]}, weighted_path)
    with pytest.raises(ParseError):
        parse_signature({"negative_edges": [[0, 1, 2]]}, weighted_path)

    assert parse_vector({"vector": [1, -2.5, "3"]}, 3).tolist() == [1.0, -2.5, 3.0]
    with pytest.raises(ParseError):
        parse_vector({"vector": [1, 2]}, 3)


def test_parse_alpha(singletons):
    point = parse_alpha({"alpha": {"0-1": 1.0, "0-2": "2", "1-2": 0.5}}, singletons)
    assert point.alpha == (1.0, 2.0, 0.5)
    with pytest.raises(ParseError) as info:
        parse_alpha({"alpha": {"0-1": 1.0, "0-2": 2.0}}, singletons)
    assert "1-2" in info.value.detail


def test_load_json(tmp_path):
    good = tmp_path / "good.json"
    good.write_text('{"vertices": 2}', encoding="utf-8")
    assert load_json(good) == {"vertices": 2}
    bad = tmp_path / "bad.json"
    bad.write_text("{not json", encoding="utf-8")
    with pytest.raises(ParseError) as info:
        load_json(bad)
    assert info.value.path == str(bad)
    with pytest.raises(ParseError):
        load_json(tmp_path / "missing.json")


def test_spectrum_serialization(weighted_path):
    payload = spectrum_to_dict(eigendecompose(plain_laplacian(weighted_path)))
    assert payload["eigenvalues"][2] == eigen_str(3 + math.sqrt(3))
    assert len(payload["eigenvectors"]) == 3
    assert payload["simple"] == [True, True, True]
    assert json.loads(dumps(payload)) == payload
    assert dumps(payload).endswith("\n")


def test_nodal_serialization(star4):
    report = nodal_report(all_positive(star4), np.array([0.0, 1.0, 1.0, -1.0, -1.0]), 2)
    payload = nodal_to_dict(report)
    assert payload["domain_count"] == 4
    assert payload["zero_vertices"] == [0]
    assert payload["deficiency"] is None


def test_critical_serialization(singletons):
    critical = critical_points_from_spectrum(singletons)[0]
    payload = critical_to_dict(critical, (1 / 3, 1 / 3, 1 / 3))
    assert set(payload["alpha"]) == {"0-1", "0-2", "1-2"}
    assert payload["energy"] == "4"
    assert payload["eigen_index"] == 3
    assert payload["deficiency"] == 0
    assert payload["morse_index"] is None
    assert len(payload["certificate_c"]) == 3
    assert "edge_restoration" not in payload
