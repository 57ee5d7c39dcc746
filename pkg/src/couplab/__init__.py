"""Coupling constructions and Monte-Carlo checks for mixing of SDEs and a stochastic CGL equation.

Subpackages: ``measures`` and ``sampling`` (maximal couplings), ``dynamics``
(time-discretized models), ``coupling`` (block scheduler and l0 bookkeeping),
``estimators`` (verification batteries and decay curves), ``cli``.
"""

__version__ = "0.1.0"
