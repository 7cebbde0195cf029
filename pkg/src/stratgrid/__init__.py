"""stratgrid: exact-arithmetic verifier for stratified degree grids.

Layers, bottom up: embeddings (indexing), strata (admissible pairs and faces),
degrees (rational degree vectors and valuation inequalities), regions
(membership predicates and coverage), hecke (correspondence sweeps), characters
(cyclotomic integers and character-sum identities), cli (reports).
"""
from __future__ import annotations

__version__ = "0.1.0"
