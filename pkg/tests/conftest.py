from __future__ import annotations

import pytest

from spectral_partitions.config import Profile, load_profile
from spectral_partitions.graph_core import Partition, WeightedGraph, make_partition
from spectral_partitions.instances import path, star, three_component_example, triangle


@pytest.fixture
def tri() -> WeightedGraph:
    return triangle()


@pytest.fixture
def weighted_path() -> WeightedGraph:
    """0 -1- 1 -2- 2"""
    return path([1.0, 2.0])


@pytest.fixture
def star4() -> WeightedGraph:
    return star(4)


@pytest.fixture
def singletons(tri: WeightedGraph) -> Partition:
    return make_partition(tri, [0, 1, 2])


@pytest.fixture
def tree_split(weighted_path: WeightedGraph) -> Partition:
    return make_partition(weighted_path, [0, 1, 1])


@pytest.fixture
def three_component() -> Partition:
    return three_component_example()[1]


@pytest.fixture
def profile() -> Profile:
    return load_profile()
