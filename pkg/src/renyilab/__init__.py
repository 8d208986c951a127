"""Renyi resolvability, noise stability and anti-contractivity toolkit."""

from .prob import (
    Channel,
    ExtendedOrder,
    FiniteDistribution,
    JointDistribution,
    RealFunction,
    conjugate_order,
    renyi_divergence,
)

__version__ = "0.1.0"

__all__ = [
    "Channel",
    "ExtendedOrder",
    "FiniteDistribution",
    "JointDistribution",
    "RealFunction",
    "conjugate_order",
    "renyi_divergence",
    "__version__",
]
