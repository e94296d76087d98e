from __future__ import annotations

import numpy as np

from spectral_partitions.dot_export import nodal_dot, partition_dot
from spectral_partitions.signed import all_positive
from spectral_partitions.spectral import nodal_report


def test_partition_dot_dashes_the_boundary(singletons, tmp_path):
    target = tmp_path / "partition.dot"
    source = partition_dot(singletons, path=target)
    assert source.startswith("// partition nu=3")
    assert source.count("style=dashed") == 3
    assert source.count("color=red") == 3
    assert "fillcolor=lightblue" in source
    assert "fillcolor=lightcoral" in source
    assert target.read_text(encoding="utf-8") == source


def test_nodal_dot_marks_zero_vertices(star4):
    u = np.array([0.0, 1.0, 1.0, -1.0, -1.0])
    report = nodal_report(all_positive(star4), u, 2)
    source = nodal_dot(all_positive(star4), report, u)
    assert "color=gray40" in source
    assert "style=dashed" not in source
    assert "color=red" not in source
    assert source.count(" -- ") == 4


def test_nodal_dot_without_values(weighted_path):
    u = np.array([1.0, -1.0, -2.0])
    report = nodal_report(all_positive(weighted_path), u)
    source = nodal_dot(all_positive(weighted_path), report)
    assert source.count("style=dashed") == 1
    assert "// nodal domains count=2" in source
