"""Lieb-Robinson bounds for commutator-bounded lattice Hamiltonians.

The package splits into operator algebra (`operators`), lattice structure and
bound constants (`lattice`), concrete models (`models`), chain combinatorics
(`chains`), the bound formulas themselves (`bounds`), exact Heisenberg
dynamics and verification (`dynamics`), and a JSON-config CLI (`cli`).
"""

__version__ = "0.1.0"
