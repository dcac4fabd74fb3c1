"""Interaction-graph analysis of an opinion state.

Agents are nodes; i and j are linked when |x_i - x_j| <= eps. Connected
components of this graph are exactly the gap-chained clusters.
"""

import json
from pathlib import Path
from typing import Any

import networkx as nx
import numpy as np
from pydantic import BaseModel, Field

from noisyhk.models import OpinionState, check_epsilon, confidence_limit


class InteractionGraphMetrics(BaseModel):
    """Summary statistics of one interaction graph."""

    num_nodes: int
    num_edges: int
    density: float = Field(..., ge=0.0, le=1.0)
    n_components: int
    largest_component: int
    avg_degree_centrality: float
    avg_clustering: float
    complete: bool


class InteractionGraphAnalyzer:
    """Builds and measures confidence graphs of opinion states."""

    def __init__(self) -> None:
        self.graph: nx.Graph | None = None

    def build_graph(self, state: OpinionState | np.ndarray, eps: float) -> nx.Graph:
        """Build the undirected confidence graph.

        Args:
            state: Opinion vector
            eps: Confidence threshold

        Returns:
            Graph with one node per agent (attribute "opinion")
        """
        eps = check_epsilon(eps)
        values = state.values if isinstance(state, OpinionState) else np.asarray(state)
        self.graph = nx.Graph()
        for agent, opinion in enumerate(values.tolist()):
            self.graph.add_node(agent, opinion=opinion)
        linked = np.abs(values[:, None] - values[None, :]) <= confidence_limit(eps)
        for i, j in np.argwhere(np.triu(linked, k=1)).tolist():
            self.graph.add_edge(i, j)
        return self.graph

    def _resolve(self, graph: nx.Graph | None) -> nx.Graph:
        g = graph if graph is not None else self.graph
        if g is None:
            raise ValueError("no graph built yet")
        return g

    def calculate_density(self, graph: nx.Graph | None = None) -> float:
        return float(nx.density(self._resolve(graph)))

    def calculate_components(self, graph: nx.Graph | None = None) -> list[set[int]]:
        """Connected components, ordered by their smallest agent index."""
        components = nx.connected_components(self._resolve(graph))
        return sorted((set(c) for c in components), key=min)

    def calculate_avg_centrality(self, graph: nx.Graph | None = None) -> float:
        centrality = nx.degree_centrality(self._resolve(graph))
        return sum(centrality.values()) / len(centrality) if centrality else 0.0

    def calculate_clustering_coefficient(self, graph: nx.Graph | None = None) -> float:
        return float(nx.average_clustering(self._resolve(graph)))

    def calculate_all_metrics(self, graph: nx.Graph | None = None) -> InteractionGraphMetrics:
        g = self._resolve(graph)
        components = self.calculate_components(g)
        n = g.number_of_nodes()
        return InteractionGraphMetrics(
            num_nodes=n,
            num_edges=g.number_of_edges(),
            density=self.calculate_density(g),
            n_components=len(components),
            largest_component=max(len(c) for c in components),
            avg_degree_centrality=self.calculate_avg_centrality(g),
            avg_clustering=self.calculate_clustering_coefficient(g),
            complete=g.number_of_edges() == n * (n - 1) // 2,
        )


def interaction_graph(state: OpinionState | np.ndarray, eps: float) -> nx.Graph:
    """Return the confidence graph of a state."""
    return InteractionGraphAnalyzer().build_graph(state, eps)


def graph_summary(graph: nx.Graph) -> InteractionGraphMetrics:
    """Return summary metrics of a confidence graph."""
    return InteractionGraphAnalyzer().calculate_all_metrics(graph)


def export_graph(graph: nx.Graph, output_path: Path | None = None, format: str = "json") -> Any:
    """Export a graph as node-link JSON or GraphML.

    Args:
        graph: Graph to export
        output_path: Optional output file path
        format: "json" or "graphml"

    Returns:
        Node-link data for json, None for graphml

    Raises:
        ValueError: If the format is unsupported
    """
    if format == "json":
        data = nx.node_link_data(graph, edges="links")
        if output_path:
            with open(output_path, "w") as f:
                json.dump(data, f, indent=2)
        return data
    if format == "graphml":
        if output_path:
            nx.write_graphml(graph, output_path)
        return None
    raise ValueError(f"Unsupported format: {format}")
