"""Bundled benchmark systems.

Two families: a three-actor ring whose signed appraisal matrix has zero row
sums ("example1"), and a four-actor influence network taken from a classic
interpersonal-influence experiment, paired with cooperative and antagonistic
appraisal matrices and two-issue coupling variants ("sec5-coop",
"sec5-antag").
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ValidationError
from .netcore import SystemSpec

EXAMPLE1_LAPLACIAN = np.array(
    [
        [2.0, -1.0, -1.0],
        [-1.0, 2.0, -1.0],
        [-1.0, -1.0, 2.0],
    ]
)

EXAMPLE1_APPRAISAL = np.array(
    [
        [0.5, -0.5, 0.0],
        [0.0, 0.5, -0.5],
        [-0.5, 0.0, 0.5],
    ]
)

EXAMPLE1_LAM = np.array([-0.05, 0.5, 0.5])
EXAMPLE1_LAM_FLAT = np.array([0.5, 0.5, 0.5])
EXAMPLE1_X0 = np.array([25.0, 75.0, 85.0])

# Interpersonal-influence weights measured on a four-member group; row 3 is
# the absorbing leader.
INFLUENCE_P = np.array(
    [
        [0.22, 0.12, 0.36, 0.3],
        [0.147, 0.215, 0.344, 0.294],
        [0.0, 0.0, 1.0, 0.0],
        [0.09, 0.178, 0.446, 0.286],
    ]
)

INFLUENCE_LAPLACIAN = np.eye(4) - INFLUENCE_P  # conversion step size 1

COOP_APPRAISAL = np.array(
    [
        [0.2, 0.2, 0.3, 0.3],
        [0.1, 0.5, 0.0, 0.4],
        [0.1, 0.4, 0.0, 0.5],
        [0.4, 0.3, 0.2, 0.1],
    ]
)

ANTAG_APPRAISAL = np.array(
    [
        [0.2, -0.2, -0.3, -0.3],
        [0.1, 0.5, 0.0, 0.4],
        [-0.1, 0.4, 0.0, 0.5],
        [0.4, 0.3, -0.2, 0.1],
    ]
)

COOP_LAM = np.array([-1.0, 1.0, 1.0, -1.0])
ANTAG_LAM = np.array([-1.5, 2.0, 1.0, -0.5])

ISSUE_COUPLING_COOP = np.array([[0.9, 0.1], [0.1, 0.9]])
ISSUE_COUPLING_ANTAG = np.array([[0.6, 0.4], [0.3, 0.7]])
ISSUE_COUPLING_COOP_DAMPED = 0.85 * ISSUE_COUPLING_COOP
ISSUE_COUPLING_ANTAG_DAMPED = 0.95 * ISSUE_COUPLING_ANTAG

# Agent-major two-issue initial opinions: (agent 1 issues, agent 2 issues, ...).
X0_MULTI = np.array([25.0, 25.0, 25.0, 15.0, 75.0, -50.0, 85.0, 5.0])
X0_ISSUE_FREE = X0_MULTI[0::2].copy()


@dataclass(frozen=True)
class Fixture:
    """A named benchmark bundle: the issue-free system plus coupling variants."""

    name: str
    system: SystemSpec
    mids: np.ndarray | None
    mids_damped: np.ndarray | None
    x0: np.ndarray
    x0_multi: np.ndarray | None
    description: str

    def with_mids(self, damped: bool = False) -> SystemSpec:
        C = self.mids_damped if damped else self.mids
        if C is None:
            raise ValidationError(f"fixture {self.name!r} has no issue coupling")
        return SystemSpec(
            lam=self.system.lam,
            laplacian=self.system.laplacian,
            appraisal=self.system.appraisal,
            mids=C,
        )


def catalog() -> dict[str, Fixture]:
    items = [
        Fixture(
            name="example1",
            system=SystemSpec(EXAMPLE1_LAM, EXAMPLE1_LAPLACIAN, EXAMPLE1_APPRAISAL),
            mids=None,
            mids_damped=None,
            x0=EXAMPLE1_X0,
            x0_multi=None,
            description=(
                "three-actor ring, antagonistic appraisal with zero row sums; "
                "mixed-sign susceptibility drives consensus outside the initial hull"
            ),
        ),
        Fixture(
            name="sec5-coop",
            system=SystemSpec(COOP_LAM, INFLUENCE_LAPLACIAN, COOP_APPRAISAL),
            mids=ISSUE_COUPLING_COOP,
            mids_damped=ISSUE_COUPLING_COOP_DAMPED,
            x0=X0_ISSUE_FREE,
            x0_multi=X0_MULTI,
            description=(
                "four-actor measured influence network with a cooperative appraisal; "
                "opinions aggregate to the leader's"
            ),
        ),
        Fixture(
            name="sec5-antag",
            system=SystemSpec(ANTAG_LAM, INFLUENCE_LAPLACIAN, ANTAG_APPRAISAL),
            mids=ISSUE_COUPLING_ANTAG,
            mids_damped=ISSUE_COUPLING_ANTAG_DAMPED,
            x0=X0_ISSUE_FREE,
            x0_multi=X0_MULTI,
            description=(
                "same influence network with an antagonistic appraisal; opinions "
                "settle into clusters"
            ),
        ),
    ]
    return {f.name: f for f in items}


def fixture(name: str) -> Fixture:
    items = catalog()
    if name not in items:
        known = ", ".join(sorted(items))
        raise ValidationError(f"unknown fixture {name!r}; known fixtures: {known}")
    return items[name]


def validate_catalog() -> None:
    """Run every fixture through the strict structural validators."""
    for f in catalog().values():
        f.system.validate_structure()
        if f.mids is not None:
            f.with_mids().validate_structure()
            f.with_mids(damped=True).validate_structure()
