"""Scenario-based identification of the private appraisal matrix.

From i.i.d. one-step opinion pairs and the known susceptibility/Laplacian
pair, the appraisal weights enter linearly through a Kronecker regressor, so
the residual program reduces to least squares.  The module also carries the
try-once-grow sampling loop, exact binomial-tail sample-size bounds, and a
Monte-Carlo check of the violation probability.

A structural caution that shapes the outputs here: the Laplacian annihilates
the all-ones vector, so the data can never distinguish the true appraisal
matrix from a copy with a constant row vector added (the regressor kernel is
exactly that gauge).  Estimates therefore recover the action ``L @ D``
uniquely, while ``D`` itself is pinned only up to the gauge;
:func:`gauge_distance` measures recovery modulo it.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass

import numpy as np

from .errors import NumericalError, ValidationError
from .netcore import SystemSpec, as_matrix, as_vector

logger = logging.getLogger(__name__)

SV_RCOND = 1e-10
CAMPI_GARATTI = "campi_garatti"
PAPER_LITERAL = "paper_literal"


@dataclass(frozen=True)
class ScenarioSet:
    """m observed one-step opinion pairs, reproducible from the seed."""

    prev: np.ndarray
    next: np.ndarray
    seed: int
    box: float

    @property
    def m(self) -> int:
        return self.prev.shape[0]

    @property
    def n_agents(self) -> int:
        return self.prev.shape[1]


@dataclass(frozen=True)
class EstimationResult:
    """Least-squares appraisal estimate with its residual level and rank report."""

    zeta_hat: np.ndarray
    d_hat: np.ndarray
    gamma_star: float
    m_used: int
    rank: int
    unique: bool

    def to_json_dict(self) -> dict:
        return {
            "d_hat": self.d_hat.tolist(),
            "gamma_star": float(self.gamma_star),
            "m_used": int(self.m_used),
            "rank": int(self.rank),
            "unique": bool(self.unique),
        }


@dataclass(frozen=True)
class SampleBoundQuery:
    """Inputs of the exact scenario sample-size bound."""

    d: int
    epsilon: float
    beta: float
    formula: str = CAMPI_GARATTI

    def __post_init__(self):
        if self.d < 1:
            raise ValidationError("decision dimension d must be >= 1")
        if not 0.0 < self.epsilon < 1.0:
            raise ValidationError("epsilon must lie in (0, 1)")
        if not 0.0 < self.beta < 1.0:
            raise ValidationError("beta must lie in (0, 1)")
        if self.formula not in (CAMPI_GARATTI, PAPER_LITERAL):
            raise ValidationError(f"unknown bound formula {self.formula!r}")


def vec(M) -> np.ndarray:
    """Column-stacking vectorization."""
    return np.asarray(M).flatten(order="F")


def unvec(v, p: int, q: int) -> np.ndarray:
    v = np.asarray(v).reshape(-1)
    if v.size != p * q:
        raise ValidationError(f"cannot reshape length {v.size} into {p}x{q}")
    return v.reshape((p, q), order="F")


def regressor(xi_prev, lam, L) -> np.ndarray:
    """Kronecker regressor mapping vec(D) to Lambda L D xi for one observation."""
    xi_prev = as_vector(xi_prev, "xi_prev")
    lam = as_vector(lam, "lambda")
    L = as_matrix(L, "laplacian")
    if not (xi_prev.size == lam.size == L.shape[0]):
        raise ValidationError("regressor inputs have inconsistent dimensions")
    return np.kron(xi_prev[None, :], lam[:, None] * L)


def draw_scenarios(
    truth: SystemSpec, m: int, seed: int, box: float = 1.0, noise: float = 0.0
) -> ScenarioSet:
    """Sample m i.i.d. pairs: uniform starts on [-box, box]^N, one exact true step.

    Each sample uses its own spawned substream, so a draw of m+1 scenarios
    extends a draw of m without disturbing the earlier samples.  ``noise``
    adds a uniform perturbation of that amplitude to the observed next
    opinions (a fixed measurement-error harness; the default is noiseless).
    """
    if m < 1:
        raise ValidationError("need at least one scenario")
    if box <= 0:
        raise ValidationError("box must be positive")
    n = truth.n_agents
    M = truth.iteration_matrix()
    children = np.random.SeedSequence(seed).spawn(m)
    prev = np.empty((m, n))
    nxt = np.empty((m, n))
    for t, child in enumerate(children):
        rng = np.random.default_rng(child)
        prev[t] = rng.uniform(-box, box, n)
        nxt[t] = M @ prev[t]
        if noise:
            nxt[t] += rng.uniform(-noise, noise, n)
    return ScenarioSet(prev=prev, next=nxt, seed=int(seed), box=float(box))


def residual_level(scen: ScenarioSet, lam, L, zeta) -> float:
    """Mean squared residual of a candidate vec(D) on a scenario set."""
    lam = as_vector(lam, "lambda")
    L = as_matrix(L, "laplacian")
    K = lam[:, None] * L
    D = unvec(zeta, scen.n_agents, scen.n_agents)
    X = scen.next - scen.prev + scen.prev @ (K @ D).T
    return float(np.mean(np.sum(X * X, axis=1)))


def solve_estimation(scen: ScenarioSet, lam, L) -> EstimationResult:
    """Minimize the mean squared one-step residual over vec(D) by least squares.

    When the stacked regressor is column-rank deficient (it always is by at
    least N, see the module note) the minimum-norm candidate is returned and
    flagged non-unique.
    """
    lam = as_vector(lam, "lambda")
    L = as_matrix(L, "laplacian")
    n = scen.n_agents
    if lam.size != n or L.shape[0] != n:
        raise ValidationError("scenario dimension does not match lambda/laplacian")
    K = lam[:, None] * L
    A = np.vstack([np.kron(scen.prev[t][None, :], K) for t in range(scen.m)])
    r = (scen.next - scen.prev).reshape(-1)
    zeta, _, rank, _ = np.linalg.lstsq(A, -r, rcond=SV_RCOND)
    resid = r + A @ zeta
    gamma = float(np.mean(np.sum(resid.reshape(scen.m, n) ** 2, axis=1)))
    unique = int(rank) == n * n
    if not unique:
        logger.info(
            "estimation regressor rank %d < %d unknowns; returning the minimum-norm "
            "candidate (appraisal identified modulo a constant row vector)",
            rank,
            n * n,
        )
    return EstimationResult(
        zeta_hat=zeta,
        d_hat=unvec(zeta, n, n),
        gamma_star=gamma,
        m_used=scen.m,
        rank=int(rank),
        unique=unique,
    )


def grow_sample_estimate(
    truth: SystemSpec,
    gamma0: float,
    m0: int = 1,
    m_cap: int = 200,
    seed: int = 0,
    box: float = 1.0,
    noise: float = 0.0,
) -> tuple[int, EstimationResult]:
    """Grow the scenario set one sample at a time until the residual target holds.

    Earlier samples are kept on every growth step; fails when the cap is
    reached with the residual still above ``gamma0``.
    """
    if gamma0 <= 0:
        raise ValidationError("gamma0 must be positive")
    if not 1 <= m0 <= m_cap:
        raise ValidationError("need 1 <= m0 <= m_cap")
    m = m0
    while True:
        scen = draw_scenarios(truth, m, seed, box=box, noise=noise)
        result = solve_estimation(scen, truth.lam, truth.laplacian)
        if result.gamma_star <= gamma0:
            return m, result
        if m >= m_cap:
            raise NumericalError(
                f"residual {result.gamma_star:.3e} still above {gamma0:.3e} at the "
                f"sample cap m={m_cap}"
            )
        logger.debug("residual %.3e > %.3e at m=%d; appending a scenario", result.gamma_star, gamma0, m)
        m += 1


def _log_binom(n: int, k: int) -> float:
    return math.lgamma(n + 1) - math.lgamma(k + 1) - math.lgamma(n - k + 1)


def binomial_tail(m: int, d: int, epsilon: float) -> float:
    """P[Binomial(m, epsilon) <= d-1], evaluated in the log domain."""
    if m < d:
        return 1.0
    total = 0.0
    for k in range(d):
        total += math.exp(
            _log_binom(m, k) + k * math.log(epsilon) + (m - k) * math.log1p(-epsilon)
        )
    return min(total, 1.0)


def paper_tail(m: int, d: int, epsilon: float) -> float:
    """Alternate tail convention: sum_{l=0..m} C(d, l) eps^l (1-eps)^(m-l)."""
    total = 0.0
    for k in range(min(m, d) + 1):
        total += math.exp(
            _log_binom(d, k) + k * math.log(epsilon) + (m - k) * math.log1p(-epsilon)
        )
    return total


def sample_bound(query: SampleBoundQuery) -> int:
    """Smallest sample count whose tail value drops below the confidence level."""
    eps, beta = query.epsilon, query.beta
    if query.formula == CAMPI_GARATTI:
        m = max(1, math.ceil(math.log(beta) / math.log1p(-eps)))
        while binomial_tail(m, query.d, eps) > beta:
            m += 1
        return m
    m = 1
    while paper_tail(m, query.d, eps) > beta:
        m += 1
    return m


def empirical_violation(
    result: EstimationResult,
    truth: SystemSpec,
    trials: int,
    seed: int,
    gamma_star: float | None = None,
    box: float = 1.0,
    tol: float = 1e-12,
) -> float:
    """Fraction of fresh same-size scenario batches whose residual exceeds the level."""
    if trials < 1:
        raise ValidationError("need at least one trial")
    level = result.gamma_star if gamma_star is None else float(gamma_star)
    children = np.random.SeedSequence(seed).spawn(trials)
    hits = 0
    for child in children:
        batch_seed = int(np.random.default_rng(child).integers(0, 2**63 - 1))
        scen = draw_scenarios(truth, result.m_used, batch_seed, box=box)
        f = residual_level(scen, truth.lam, truth.laplacian, result.zeta_hat)
        if f > level + tol:
            hits += 1
    return hits / trials


def gauge_distance(d_hat, d_ref) -> float:
    """Sup-norm distance between appraisal matrices modulo the constant-row gauge.

    Minimizes ``max |d_hat + 1c' - d_ref|`` over the shift vector c; zero
    means the two matrices generate identical dynamics through any row-sum-zero
    Laplacian.
    """
    A = as_matrix(d_hat, "d_hat")
    B = as_matrix(d_ref, "d_ref")
    if A.shape != B.shape:
        raise ValidationError(f"shape mismatch {A.shape} vs {B.shape}")
    delta = B - A
    half_ranges = (delta.max(axis=0) - delta.min(axis=0)) / 2.0
    return float(half_ranges.max())
