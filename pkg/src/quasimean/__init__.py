"""Means, quasi-means and the tools to test, measure and iterate them."""

from . import catalog
from .classify import ClassificationReport, PropertyVerdict
from .core import DomainBox, MeanFunction
from .errors import (ArityError, CatalogError, ContractViolation, Diverged, DomainError, EmptyDomain,
                     ParseError, QuasiMeanError)
from .exact import ExactDecimal, render, to_exact
from .iterate import IterationTrace, bessel_onset, compose, compound, extend3, idempotent_closure, iterated

__all__ = [
    "ArityError", "CatalogError", "ClassificationReport", "ContractViolation", "Diverged", "DomainBox", "DomainError", "EmptyDomain",
    "ExactDecimal", "IterationTrace", "MeanFunction", "ParseError", "PropertyVerdict", "QuasiMeanError",
    "bessel_onset", "catalog", "compose", "compound", "extend3", "idempotent_closure", "iterated",
    "render", "to_exact",
]
