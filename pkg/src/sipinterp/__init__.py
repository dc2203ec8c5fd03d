"""Minimal-norm interpolation in L^p-type spaces through semi-inner products.

Modules
-------
sip
    Semi-inner products and the duality (star) map on weighted l^p and l^p_S.
kernels
    Reproducing kernels and closed-form single-point interpolants.
hardy
    Multi-point interpolation in H^p of the unit disk.
lpspace
    Minimal-norm interpolation in l^p_S.
lift
    The even-exponent shortcut ``g^(2/p)``.
tde
    Time-delay estimation by l^p filter fitting.
io, cli
    Serialisation and the ``sipinterp`` command.
"""

from . import hardy, kernels, lift, lpspace, sip, tde
from ._numerics import ConvergenceError
from .kernels import Family, SpaceDescriptor
from .sip import Exponent, WeightedSample

__version__ = "0.1.0"

__all__ = [
    "sip",
    "kernels",
    "hardy",
    "lpspace",
    "lift",
    "tde",
    "ConvergenceError",
    "Exponent",
    "Family",
    "SpaceDescriptor",
    "WeightedSample",
]
