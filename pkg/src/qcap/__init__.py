"""Single-letter quantum and private capacities of finite-dimensional channels."""

from ._version import __version__
from .capacities import (
    coherent_information,
    compute_delta,
    holevo_information,
    maximize_coherent_information,
    maximize_private_information,
    private_information_value,
)
from .channels import complementary_channel, kraus_to_choi, wiretap
from .degradability import is_antidegradable, is_degradable, is_partially_degradable
from .models import KrausChannel, OptimizerConfig, QcapError, QuantumState
from .zoo import builtin

__all__ = [
    "KrausChannel",
    "OptimizerConfig",
    "QcapError",
    "QuantumState",
    "__version__",
    "builtin",
    "coherent_information",
    "complementary_channel",
    "compute_delta",
    "holevo_information",
    "is_antidegradable",
    "is_degradable",
    "is_partially_degradable",
    "kraus_to_choi",
    "maximize_coherent_information",
    "maximize_private_information",
    "private_information_value",
    "wiretap",
]
