"""Exact verification workbench for two-body gadget Hamiltonians of topological codes.

Submodules: ``pauli`` and ``groups`` (algebra), ``lattice``, ``model``
(term construction), ``configspace`` and ``subspace`` (invariant-subspace
engine), ``double`` (finite-group variant), ``spectral`` (eigensolvers),
``certify`` (gap bounds), ``checks`` and ``cli``.
"""

__version__ = "0.1.0"
