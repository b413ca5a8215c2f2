"""Logarithmic class groups of Q and quadratic fields, and what they say
about the 3-parts of wild etale kernels."""

from .errors import (InvalidInput, LogKernelError, NotTorsionCertified, PrecisionExhausted,
                     ResourceLimit, Unsupported)
from .logarith import AbelianGroupStructure, log_class_group
from .padic import PadicInt, iwasawa_log, smith_normal_form, teichmuller
from .quadfield import RATIONAL, QuadField, make_field
from .wildkernel import reflection_check, wk_structure

__version__ = "0.1.0"

__all__ = [
    "AbelianGroupStructure", "InvalidInput", "LogKernelError", "NotTorsionCertified",
    "PadicInt", "PrecisionExhausted", "QuadField", "RATIONAL", "ResourceLimit", "Unsupported",
    "iwasawa_log", "log_class_group", "make_field", "reflection_check", "smith_normal_form",
    "teichmuller", "wk_structure",
]
