"""Numerical laboratory for stability analysis of noncharacteristic
hyperbolic boundary-value and shock problems.

Subpackages and modules:

- ``spectral``: eigenvalue clustering, Riesz projectors, invariant subspaces
- ``poly`` / ``symbol``: exact characteristic polynomials and symbol checks
- ``classify``: multiple-root regularity and glancing classification
- ``boundary``: boundary symbol, stable subspaces and their boundary limits
- ``lopatinski``: Lopatinski determinants, uniform scans, reduced conditions
- ``symmetrizer``: dissipative/Kreiss symmetrizer verification and 2x2 theory
- ``models``: bundled magnetohydrodynamics, Euler, and biaxial Maxwell systems
- ``cli``: command-line front end
"""

__version__ = "0.1.0"
