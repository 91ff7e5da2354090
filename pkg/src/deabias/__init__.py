"""Conical dielectric elastomer actuators with mass, spring and magnetic bias.

Modules, bottom up: ``specs`` (validated parameter records), ``magnetics``
(ring-magnet field and PM-MRE / PM-PM forces), ``membrane`` (lumped Gent
cone), ``bias`` (bias laws and classification), ``equilibrium`` (roots,
working range, offset search), ``dynamics`` (RK4 transients), ``fitting``
(force-gap regression), ``config``, ``csvio``, ``svg`` and ``cli``.
"""
from .bias import (BiasClass, ExponentialBias, LinearSpring, Mass, NonlinearSpring, PmMre,
                   PmPm, bias_force, classify_bias)
from .config import build_scenario, default_paper_scenario, load_scenario
from .equilibrium import find_equilibria, optimize_offset, steady_state_sweep, working_range
from .errors import ModelError
from .specs import ElectricalSpec, MembraneSpec, MreDiscSpec, RingMagnetSpec, Scenario

__version__ = "0.1.0"
