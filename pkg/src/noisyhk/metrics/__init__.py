"""Consensus and interaction-graph metrics."""
