"""Eigenstructure of the opinion update matrix and the consensus classifiers.

All verdicts here are spectral: the issue-free update ``I - Lambda L D``
reaches consensus exactly when its unit eigenvalue is simple with the rest of
the spectrum strictly inside the unit disk and the unit right eigenvector is
the all-ones direction; it merely converges (to clusters) when that direction
condition fails; attaching an issue-coupling matrix turns the question into
one about eigenvalue products of the Kronecker map.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np

from .errors import AmbiguousSpectrumError, NumericalError, ValidationError
from .netcore import TOL_STRUCT, SystemSpec, appraisal_kind, as_matrix

logger = logging.getLogger(__name__)

TOL_EIG = 1e-8
SV_NULL_THRESHOLD = 1e-10

CONSENSUS = "consensus"
CONVERGENCE = "convergence"
STABILITY = "stability"
DIVERGENT = "divergent-or-marginal"

ROW_SUMS_ZERO = "row_sums_zero"
ROW_SUMS_MINUS_ONE = "row_sums_minus_one"
NEITHER = "neither"


@dataclass(frozen=True)
class SpectralReport:
    """Eigenvalues and verdict for one issue-free system.

    ``left_vec``/``right_vec`` are the unit-eigenvalue pair, normalized so
    that ``left_vec @ right_vec == 1``; they are None unless the system was
    classified consensus or convergence.
    """

    eigenvalues: np.ndarray
    unit_eigen_count: int
    rho_rest: float
    left_vec: np.ndarray | None
    right_vec: np.ndarray | None
    classification: str

    def to_json_dict(self) -> dict:
        return {
            "eigenvalues": [[float(z.real), float(z.imag)] for z in self.eigenvalues],
            "classification": self.classification,
            "rho_rest": float(self.rho_rest),
        }


@dataclass(frozen=True)
class LimitPrediction:
    """Predicted steady opinion vector; ``alpha`` is the common value under consensus."""

    phi: np.ndarray
    alpha: float | None


def eigen(M) -> np.ndarray:
    """Eigenvalues of a square real matrix, sorted by decreasing magnitude."""
    M = as_matrix(M)
    try:
        w = np.linalg.eigvals(M)
    except np.linalg.LinAlgError as exc:
        raise NumericalError(f"eigensolver did not converge: {exc}")
    order = np.lexsort((-w.imag, -w.real, -np.abs(w)))
    return w[order]


def eigenvector(M, target: complex, side: str = "right") -> np.ndarray:
    """Unit-norm eigenvector for the eigenvalue nearest ``target``.

    Computed as the smallest right singular vector of ``M - target*I`` (or of
    its conjugate transpose for ``side='left'``), which is rank-revealing and
    robust for nearly defective spectra.
    """
    M = as_matrix(M).astype(complex)
    n = M.shape[0]
    S = M - target * np.eye(n)
    if side == "left":
        S = S.conj().T
    elif side != "right":
        raise ValidationError(f"side must be 'left' or 'right', got {side!r}")
    _, sv, Vh = np.linalg.svd(S)
    v = Vh[-1].conj()
    resid = np.abs(M @ v - target * v).max() if side == "right" else np.abs(v @ M - target * v).max()
    scale = max(1.0, float(np.abs(M).max()))
    if resid > 1e-8 * scale:
        raise NumericalError(
            f"eigenvector residual {resid:.3e} exceeds 1e-8*|M| for target {target}"
        )
    return v


def _realify(v: np.ndarray) -> np.ndarray:
    # Rotate a complex eigenvector onto the real axis when it is real up to phase.
    k = int(np.argmax(np.abs(v)))
    v = v * np.exp(-1j * np.angle(v[k]))
    if np.abs(v.imag).max() <= 1e-9 * np.abs(v.real).max():
        return v.real.copy()
    return v


def _unit_pair(M: np.ndarray):
    """Left/right eigenvectors for eigenvalue 1, normalized to left@right = 1."""
    iota = _realify(eigenvector(M, 1.0, side="right"))
    sigma = _realify(eigenvector(M, 1.0, side="left"))
    if abs(sigma @ iota) < 1e-12:  # unit-norm vectors here
        raise NumericalError(
            "unit eigenvalue appears defective: left/right eigenvectors are orthogonal"
        )
    iota = iota / iota[np.argmax(np.abs(iota))]
    sigma = sigma / (sigma @ iota)
    return sigma, iota


def classify_system(sys: SystemSpec, tol_eig: float = TOL_EIG) -> SpectralReport:
    """Classify the issue-free system: consensus, convergence, stability, or neither.

    Raises :class:`AmbiguousSpectrumError` when several distinct eigenvalues
    crowd the unit point too closely to call the multiplicity.
    """
    M = sys.iteration_matrix()
    w = eigen(M)
    unit = np.abs(w - 1.0) <= tol_eig
    count = int(unit.sum())

    if count == 0:
        rho = float(np.abs(w).max())
        if rho < 1.0 - tol_eig:
            cls = STABILITY
        else:
            cls = DIVERGENT
        return SpectralReport(w, 0, rho, None, None, cls)

    if count > 1:
        cluster = w[unit]
        spread = max(
            abs(a - b) for i, a in enumerate(cluster) for b in cluster[i + 1 :]
        )
        if spread > tol_eig / 10.0:
            raise AmbiguousSpectrumError(
                f"{count} eigenvalues lie within {tol_eig} of 1 but are separated by "
                f"{spread:.3e}; refine tol_eig to resolve the multiplicity"
            )
        rest = np.abs(w[~unit])
        rho = float(rest.max()) if rest.size else 0.0
        logger.info("unit eigenvalue has multiplicity %d; not a simple-consensus system", count)
        return SpectralReport(w, count, rho, None, None, DIVERGENT)

    rest = np.abs(w[~unit])
    rho = float(rest.max()) if rest.size else 0.0
    if rho >= 1.0 - tol_eig:
        return SpectralReport(w, 1, rho, None, None, DIVERGENT)

    sigma, iota = _unit_pair(M)
    mu = float(np.mean(iota))
    aligned = np.abs(iota - mu).max() <= tol_eig * max(1.0, float(np.abs(iota).max()))
    cls = CONSENSUS if aligned else CONVERGENCE
    return SpectralReport(w, 1, rho, sigma, iota, cls)


def predict_limit(
    sys: SystemSpec,
    xi0,
    tol_eig: float = TOL_EIG,
    report: SpectralReport | None = None,
) -> LimitPrediction:
    """Steady-state opinion vector from the unit-eigenvalue projector."""
    xi0 = np.asarray(xi0, dtype=float).reshape(-1)
    if xi0.shape[0] != sys.n_agents:
        raise ValidationError(
            f"initial opinions have length {xi0.shape[0]}, expected {sys.n_agents}"
        )
    if report is None:
        report = classify_system(sys, tol_eig=tol_eig)
    if report.classification not in (CONSENSUS, CONVERGENCE):
        raise ValidationError(
            f"cannot predict a limit for a {report.classification!r} system"
        )
    alpha = float(report.left_vec @ xi0)
    phi = alpha * report.right_vec
    return LimitPrediction(phi=phi, alpha=alpha if report.classification == CONSENSUS else None)


def antagonistic_consensus_structure(D, tol: float = TOL_STRUCT) -> str:
    """Row-sum signature that decides whether an antagonistic appraisal can reach consensus."""
    D = np.asarray(D, dtype=float)
    if appraisal_kind(D, tol=tol) != "antagonistic":
        raise ValidationError("structure test applies to antagonistic appraisal matrices")
    sums = D.sum(axis=1)
    if np.abs(sums).max() <= tol:
        return ROW_SUMS_ZERO
    if np.abs(sums + 1.0).max() <= tol:
        return ROW_SUMS_MINUS_ONE
    return NEITHER


def classify_multi_issue(sys: SystemSpec, tol_eig: float = TOL_EIG) -> str:
    """Verdict for the issue-coupled Kronecker system.

    Requires the issue-free part to carry a simple unit eigenvalue; the
    coupled system is stable when the coupling spectrum sits strictly inside
    the unit disk, and convergent when the coupling's dominant eigenvalue
    (magnitude at most one) pairs with the issue-free second-largest mode to
    a product inside the disk.
    """
    if sys.mids is None:
        raise ValidationError("system has no issue-coupling matrix")
    base = classify_system(sys, tol_eig=tol_eig)
    if base.classification not in (CONSENSUS, CONVERGENCE):
        raise ValidationError(
            "issue-free system must have a simple unit eigenvalue with the rest "
            f"inside the unit disk; got {base.classification!r}"
        )
    mu_max = float(np.abs(eigen(sys.mids)).max())
    if mu_max < 1.0 - tol_eig:
        return "stable"
    if base.rho_rest * mu_max < 1.0 - tol_eig and mu_max <= 1.0 + tol_eig:
        return "convergent"
    if mu_max > 1.0 + tol_eig:
        logger.info(
            "coupling spectral radius %.6g exceeds 1; unit mode of the issue-free "
            "system amplifies and the product test is moot",
            mu_max,
        )
    return DIVERGENT


def powers_converge(C, tol_eig: float = TOL_EIG) -> bool:
    """True when the powers of the coupling matrix have a limit.

    This needs every eigenvalue strictly inside the unit disk except possibly
    a semisimple eigenvalue 1.
    """
    C = as_matrix(C, "issue coupling")
    w = eigen(C)
    unit = np.abs(w - 1.0) <= tol_eig
    others = np.abs(w[~unit])
    if others.size and others.max() >= 1.0 - tol_eig:
        return False
    k = int(unit.sum())
    if k == 0:
        return True
    sv = np.linalg.svd(C - np.eye(C.shape[0]), compute_uv=False)
    rank = int((sv > SV_NULL_THRESHOLD * max(1.0, sv[0])).sum())
    geometric = C.shape[0] - rank
    return geometric == k
