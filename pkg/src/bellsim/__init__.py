"""Bell-inequality simulations for lossy optical entangled states.

Subpackages by layer:

* :mod:`bellsim.numerics`  -- Faddeeva/erf/erfi, Gauss-Hermite rules,
  Nelder-Mead simplex, bisection.
* :mod:`bellsim.fockspace` -- exact density-matrix pipeline for the
  polarization-entangled n-photon state under beam-splitter loss.
* :mod:`bellsim.catstates` -- coherent-state dyad pipeline for entangled
  coherent states with homodyne sign readout.
* :mod:`bellsim.thermal`   -- entangled thermal states (Gaussian mixtures of
  displaced coherent states) via quadrature over the dyad pipeline.
* :mod:`bellsim.bell`      -- CHSH optimization, closed forms, loss thresholds.
* :mod:`bellsim.figures`   -- named report datasets (CSV emission).
* :mod:`bellsim.plotting`  -- PNG rendering of the report datasets.
* :mod:`bellsim.sweep`     -- INI-configured parameter sweeps.
* :mod:`bellsim.validate`  -- oracle cross-check suite.
* :mod:`bellsim.cli`       -- ``bellsim`` command line entry point.
"""

__version__ = "0.1.0"
