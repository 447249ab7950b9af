"""Compressive data collection over lossy links.

Sparse random projections for sensor traces, packet-loss channel
simulation, greedy and l1 sparse recovery, and empirical isometry
analysis, behind a deterministic seeded experiment harness.
"""

__version__ = "0.1.0"
