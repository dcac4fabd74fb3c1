"""Tests for interaction-graph analysis.

Tests verify the confidence graph structure, its summary metrics and graph
export.
"""

import json
from pathlib import Path

import networkx as nx
import numpy as np
import pytest
from noisyhk.metrics.consensus import clusters
from noisyhk.metrics.graph import (
    InteractionGraphAnalyzer,
    export_graph,
    graph_summary,
    interaction_graph,
)
from noisyhk.models import OpinionState


def test_build_confidence_graph():
    """Test that edges join agents within eps."""
    graph = interaction_graph(OpinionState(values=[0.0, 0.1, 0.5]), 0.2)

    assert isinstance(graph, nx.Graph)
    assert graph.number_of_nodes() == 3
    assert graph.has_edge(0, 1)
    assert not graph.has_edge(0, 2)
    assert graph.nodes[2]["opinion"] == 0.5


def test_components_match_clusters():
    """Test that connected components equal the chain-rule clusters."""
    values = np.random.default_rng(2).random(25)
    analyzer = InteractionGraphAnalyzer()
    graph = analyzer.build_graph(values, 0.06)
    components = analyzer.calculate_components(graph)
    groups = clusters(values, 0.06).groups
    assert sorted(map(sorted, components)) == sorted(g.members for g in groups)


def test_summary_of_consensus_graph():
    """Test that a synchronized state gives a complete graph."""
    summary = graph_summary(interaction_graph(np.array([0.5, 0.52, 0.55, 0.51]), 0.1))
    assert summary.complete
    assert summary.density == 1.0
    assert summary.n_components == 1
    assert summary.avg_clustering == 1.0


def test_summary_of_fragmented_graph():
    """Test density and component counts of a fragmented state."""
    summary = graph_summary(interaction_graph(np.array([0.0, 0.05, 0.5, 0.95]), 0.1))
    assert summary.num_edges == 1
    assert summary.n_components == 3
    assert summary.largest_component == 2
    assert summary.density == pytest.approx(1 / 6)
    assert not summary.complete


def test_analyzer_without_graph_raises():
    """Test that metrics need a built graph."""
    with pytest.raises(ValueError):
        InteractionGraphAnalyzer().calculate_density()


def test_export_graph_json(tmp_path: Path):
    """Test node-link JSON export."""
    graph = interaction_graph(np.array([0.1, 0.2]), 0.2)
    output = tmp_path / "graph.json"
    data = export_graph(graph, output)

    assert output.exists()
    assert json.loads(output.read_text()) == data
    assert len(data["links"]) == 1


def test_export_graph_rejects_unknown_format():
    """Test that unsupported formats raise ValueError."""
    with pytest.raises(ValueError, match="Unsupported format"):
        export_graph(nx.Graph(), format="dot")
