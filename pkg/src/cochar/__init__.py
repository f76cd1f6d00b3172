"""Exact cocharacter-multiplicity computations for small matrix sizes."""

ENGINE_VERSION = "1.0.0"

from .algebra import (  # noqa: F401
    FactoredRational,
    InexactDivision,
    LaurentPolynomial,
    VarTable,
    VarTableMismatch,
)
