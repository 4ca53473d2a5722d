"""Verified existence and multiplicity certificates for positive solutions of
second-order two-point boundary value problems and 2x2 systems."""

from .certify import Certificate, Ladder, certify
from .conditions import Condition, ConditionResult, Kind, Verdict, check_condition
from .cone import Constants, constants_for, optimize_window
from .expr import Box, evaluate, evaluate_interval, parse
from .kernel import DIRICHLET, ROBIN, KernelSpec
from .problem import Problem

__all__ = [
    "Box",
    "Certificate",
    "Condition",
    "ConditionResult",
    "Constants",
    "DIRICHLET",
    "Kind",
    "KernelSpec",
    "Ladder",
    "Problem",
    "ROBIN",
    "Verdict",
    "certify",
    "check_condition",
    "constants_for",
    "evaluate",
    "evaluate_interval",
    "optimize_window",
    "parse",
]
