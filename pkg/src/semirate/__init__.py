"""Approximation of operator semigroups through Bernstein functions.

Subpackages, by layer:

* ``bernstein``, ``measures``, ``quadrature``: Bernstein functions, Levy
  triples and signed measures on the half line with total-variation norms.
* ``a1plus``, ``specfun``: the measure algebra kernels, Laguerre and Kummer
  functions, and the interpolation constants ``c_beta``.
* ``opcalc``, ``families``: matrix functional calculus and test generators.
* ``rates``, ``suite``, ``cli``: the bound-checking harness and its reports.
"""

__version__ = "0.1.0"
