"""Exponential functionals of Lévy processes and factorizations of the exponential law.

Submodules
----------
levy, families
    Laplace exponents of subordinators and spectrally negative processes.
transforms
    Maps between the two classes of exponents.
moments
    Exact moment sequences of the functionals.
samplers
    Seeded Monte Carlo draws of the functionals and elementary laws.
verify, suite
    Statistical checks of the distributional identities.
cli
    The ``expfun`` command.
"""

from .families import FAMILIES, build
from .levy import SNExponent, SubordinatorExponent, eval_phi, eval_psi, validate
from .moments import entrance_moments, expfun_neg_moments, expfun_pos_moments
from .transforms import prop1_transform, special_bernstein_dual, theorem1_converse, theorem1_forward

__version__ = "0.1.0"

__all__ = [
    "FAMILIES",
    "build",
    "SubordinatorExponent",
    "SNExponent",
    "eval_phi",
    "eval_psi",
    "validate",
    "expfun_pos_moments",
    "expfun_neg_moments",
    "entrance_moments",
    "theorem1_forward",
    "theorem1_converse",
    "prop1_transform",
    "special_bernstein_dual",
]
