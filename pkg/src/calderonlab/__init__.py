"""Numerical laboratory for the planar Calderon inverse conductivity problem.

Submodules
----------
grid          uniform complex grids, FFT transforms, Beurling/Cauchy operators
modulus       integral moduli of continuity and Besov-type gauges
conductivity  gamma <-> mu dictionary, ellipticity, named coefficient families
dtn           disk FEM forward solver, DtN matrices, radial transfer oracle
cgos          Beltrami solvers: principal map, linear psi_k, nonlinear CGOS
scattering    scattering transform and the spectral transport equation
experiments   orchestrated sweeps with deterministic tables and summaries
cli           command-line front end
"""

from . import cgos, cli, conductivity, dtn, experiments, grid, modulus, scattering  # noqa: F401

__version__ = "0.1.0"
