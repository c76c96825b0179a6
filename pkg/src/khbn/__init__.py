"""Khovanov homology and its characteristic-two one-parameter deformations,
with a combinatorial branched-double-cover model and verification tooling."""

__version__ = "0.1.0"
