"""Explicit projections in the noncommutative 2-torus and their numerical verification."""

from .algebra import K0Class, TorusElement, ThetaMismatch
from .builders import (
    BandCollision,
    BuilderError,
    Edit,
    InfeasibleEpsilon,
    NoBumpToDeform,
    PlacementError,
    ProjectionSpec,
    add_bump,
    build,
    complement,
    cut,
    epsilon_feasible,
    glue,
    homotopy,
    power_rieffel,
)
from .circlefn import BumpProfile, CircleFunction
from .verifier import VerificationReport, VerifyConfig, verify

__all__ = [
    "BandCollision", "BuilderError", "BumpProfile", "CircleFunction", "Edit", "InfeasibleEpsilon",
    "K0Class", "NoBumpToDeform", "PlacementError", "ProjectionSpec", "ThetaMismatch", "TorusElement",
    "VerificationReport", "VerifyConfig", "add_bump", "build", "complement", "cut", "epsilon_feasible",
    "glue", "homotopy", "power_rieffel", "verify",
]
