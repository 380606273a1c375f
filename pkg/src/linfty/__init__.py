"""Exact computations for L-infinity algebroids and their higher holonomy.

Submodules:

* ``graded``, ``cdga``, ``linalg``: graded modules, free graded-commutative algebras, rational linear algebra
* ``linfty``, ``ce_dual``: brackets, Jacobiators, the homological vector field Q and derived brackets
* ``transfer``: L-infinity structures transferred onto resolutions
* ``zconn``: Z-connections, curvature, Chern-Weil forms, transgression, Atiyah cocycles
* ``simplicial``: finite simplicial sets, nerves, Kan conditions, prisms, path objects
* ``locsys``: infinity-local systems, Maurer-Cartan, shift and cone
* ``holonomy``: Chen iterated integrals, A-infinity de Rham maps, Riemann-Hilbert holonomy
* ``cli``: batch front end
"""
from .graded import InputError, StructureError

__all__ = ["InputError", "StructureError"]
__version__ = "0.1.0"
