"""Optimal WDM power allocation for radio-on-FSO links.

Two solvers for maximizing expected weighted capacity under an average
total-power budget and a per-wavelength peak:

* :mod:`.sdg` - model-based stochastic dual gradient with an exact 1-D primal step;
* :mod:`.pddl` - model-free primal-dual learning of per-wavelength policy networks
  from observed capacities only.
"""
from .capacity import (CapacityOracle, ModelOracle, NoisyOracle, SystemParams, capacity, cnr,
                       weighted_sum_capacity)
from .channel import ChannelParams, attenuation_gain, sample_csi, sample_turbulence
from .config import ExperimentConfig
from .experiment import EqualPowerPolicy, equal_power_baseline, evaluate, run_experiment
from .mlp import MlpSpec
from .pddl import PddlConfig
from .policy import PolicyHead, TruncatedGaussian
from .sdg import SdgConfig

__version__ = "0.1.0"
