"""Matrix and graph primitives for the two-network opinion model.

The model couples a public interacting network (a directed-graph Laplacian
``L``), a private appraisal network (a signed, row-normalized matrix ``D``),
per-agent susceptibility gains (a nonsingular diagonal ``Lambda``), and an
optional issue-coupling matrix ``C``.  This module owns the validated
representations, CSV/JSON ingestion, conversions between stochastic and
Laplacian forms, and the graph-topology predicates the analysis layers rely
on.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import ValidationError

TOL_STRUCT = 1e-12

COOPERATIVE = "cooperative"
ANTAGONISTIC = "antagonistic"


def as_matrix(values, name: str = "matrix") -> np.ndarray:
    """Coerce to a finite, square, float64 2-D array."""
    M = np.array(values, dtype=float)
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        raise ValidationError(f"{name} must be square, got shape {M.shape}")
    if M.shape[0] == 0:
        raise ValidationError(f"{name} is empty")
    if not np.isfinite(M).all():
        raise ValidationError(f"{name} contains non-finite entries")
    return M


def as_vector(values, name: str = "vector") -> np.ndarray:
    v = np.array(values, dtype=float).reshape(-1)
    if v.size == 0:
        raise ValidationError(f"{name} is empty")
    if not np.isfinite(v).all():
        raise ValidationError(f"{name} contains non-finite entries")
    return v


@dataclass(frozen=True)
class ConversionParams:
    """Step size used to move between stochastic and Laplacian forms."""

    epsilon: float

    def __post_init__(self):
        if not np.isfinite(self.epsilon) or self.epsilon <= 0:
            raise ValidationError(f"epsilon must be positive, got {self.epsilon}")


@dataclass(frozen=True)
class InteractingLaplacian:
    """Row-sum-zero influence Laplacian of the public network.

    Off-diagonal entries are nonpositive (edge weights enter negated) and the
    diagonal is nonnegative; every row sums to zero within ``tol``.
    """

    entries: np.ndarray
    tol: float = TOL_STRUCT

    def __post_init__(self):
        M = as_matrix(self.entries, "laplacian")
        scale = max(1.0, float(np.abs(M).max()))
        rows = M.sum(axis=1)
        if np.abs(rows).max() > self.tol * scale:
            raise ValidationError(
                f"laplacian rows must sum to 0, worst residual {np.abs(rows).max():.3e}"
            )
        off = M - np.diag(np.diag(M))
        if off.max() > self.tol * scale:
            raise ValidationError("laplacian off-diagonal entries must be <= 0")
        if np.diag(M).min() < -self.tol * scale:
            raise ValidationError("laplacian diagonal entries must be >= 0")
        object.__setattr__(self, "entries", M)

    @property
    def n(self) -> int:
        return self.entries.shape[0]


@dataclass(frozen=True)
class StochasticMatrix:
    """Nonnegative matrix whose rows each sum to one within ``tol``."""

    entries: np.ndarray
    tol: float = TOL_STRUCT

    def __post_init__(self):
        M = as_matrix(self.entries, "stochastic matrix")
        if M.min() < -self.tol:
            raise ValidationError("stochastic matrix entries must be >= 0")
        rows = M.sum(axis=1)
        if np.abs(rows - 1.0).max() > self.tol * max(1.0, float(np.abs(M).max())):
            raise ValidationError(
                f"stochastic matrix rows must sum to 1, worst residual "
                f"{np.abs(rows - 1.0).max():.3e}"
            )
        object.__setattr__(self, "entries", M)

    @property
    def n(self) -> int:
        return self.entries.shape[0]


@dataclass(frozen=True)
class AppraisalMatrix:
    """Signed private-appraisal weights with row-normalized total influence.

    Every row's absolute sum lies in (0, 1]; an antagonistic matrix (one with
    any negative weight) must have absolute row sums exactly 1.  ``kind`` is
    inferred when not given and cross-checked when it is.
    """

    entries: np.ndarray
    kind: str | None = None
    tol: float = TOL_STRUCT

    def __post_init__(self):
        M = as_matrix(self.entries, "appraisal matrix")
        inferred = appraisal_kind(M, tol=self.tol)
        if self.kind is None:
            object.__setattr__(self, "kind", inferred)
        elif self.kind != inferred:
            raise ValidationError(
                f"declared appraisal kind {self.kind!r} but entries are {inferred!r}"
            )
        if self.kind == ANTAGONISTIC:
            sums = np.abs(M).sum(axis=1)
            if np.abs(sums - 1.0).max() > self.tol:
                raise ValidationError(
                    "antagonistic appraisal rows must have absolute sum exactly 1"
                )
        object.__setattr__(self, "entries", M)

    @property
    def n(self) -> int:
        return self.entries.shape[0]


@dataclass(frozen=True)
class SusceptibilityMatrix:
    """Diagonal of per-agent susceptibility gains; every entry is nonzero."""

    diag: np.ndarray
    tol: float = TOL_STRUCT

    def __post_init__(self):
        d = as_vector(self.diag, "susceptibility diagonal")
        if np.abs(d).min() <= self.tol:
            raise ValidationError("susceptibility factors must be nonzero")
        object.__setattr__(self, "diag", d)

    @property
    def n(self) -> int:
        return self.diag.shape[0]

    def matrix(self) -> np.ndarray:
        return np.diag(self.diag)


@dataclass(frozen=True)
class MiDSMatrix:
    """Issue-coupling matrix over the n interdependent topics."""

    entries: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "entries", as_matrix(self.entries, "issue coupling"))

    @property
    def n(self) -> int:
        return self.entries.shape[0]


def _entries(x, wrapper, name: str) -> np.ndarray:
    if isinstance(x, wrapper):
        return x.entries
    return wrapper(x).entries  # validates raw input


def _epsilon(params) -> float:
    if isinstance(params, ConversionParams):
        return params.epsilon
    return ConversionParams(float(params)).epsilon


# ---------------------------------------------------------------------------
# conversions and predicates
# ---------------------------------------------------------------------------


def stochastic_to_laplacian(P, params) -> InteractingLaplacian:
    """Return the Laplacian L with I - eps*L = P."""
    M = _entries(P, StochasticMatrix, "stochastic matrix")
    eps = _epsilon(params)
    return InteractingLaplacian((np.eye(M.shape[0]) - M) / eps)


def laplacian_to_stochastic(L, params) -> StochasticMatrix:
    """Invert :func:`stochastic_to_laplacian`; eps must keep I - eps*L nonnegative."""
    M = _entries(L, InteractingLaplacian, "laplacian")
    eps = _epsilon(params)
    P = np.eye(M.shape[0]) - eps * M
    if P.min() < -TOL_STRUCT:
        raise ValidationError(
            f"eps={eps} produces a negative entry ({P.min():.3e}); "
            f"need eps*max(diag) <= 1"
        )
    return StochasticMatrix(np.clip(P, 0.0, None))


def abs_matrix(D) -> StochasticMatrix:
    """Entrywise absolute value of a unit-row-normalized appraisal matrix."""
    M = D.entries if isinstance(D, AppraisalMatrix) else as_matrix(D, "appraisal matrix")
    sums = np.abs(M).sum(axis=1)
    if np.abs(sums - 1.0).max() > TOL_STRUCT:
        raise ValidationError(
            "absolute row sums must equal 1 to form the unsigned companion matrix"
        )
    return StochasticMatrix(np.abs(M))


def appraisal_kind(D, tol: float = TOL_STRUCT) -> str:
    """Classify an appraisal matrix as cooperative (all weights >= 0) or antagonistic."""
    M = D.entries if isinstance(D, AppraisalMatrix) else as_matrix(D, "appraisal matrix")
    sums = np.abs(M).sum(axis=1)
    if sums.min() <= tol:
        raise ValidationError("every appraisal row needs at least one nonzero weight")
    if sums.max() > 1.0 + tol:
        raise ValidationError(
            f"appraisal row absolute sums must be <= 1, worst {sums.max():.12g}"
        )
    return COOPERATIVE if M.min() >= -tol else ANTAGONISTIC


def same_topology(A, B, tol: float = TOL_STRUCT) -> bool:
    """True when the two matrices carry edges (nonzero entries) at the same positions."""
    A = np.asarray(A, dtype=float)
    B = np.asarray(B, dtype=float)
    if A.shape != B.shape:
        raise ValidationError(f"shape mismatch {A.shape} vs {B.shape}")
    return bool(np.array_equal(np.abs(A) > tol, np.abs(B) > tol))


def _adjacency(L: np.ndarray, tol: float) -> np.ndarray:
    # Edge j -> i whenever l_ij is a genuine negative weight.
    A = np.zeros_like(L, dtype=bool)
    np.copyto(A, L < -tol)
    np.fill_diagonal(A, False)
    return A.T  # A[j, i]: j influences i


def spanning_tree_root(L, tol: float = TOL_STRUCT) -> int | None:
    """Index of a node that reaches every other node, or None if there is none."""
    M = _entries(L, InteractingLaplacian, "laplacian")
    n = M.shape[0]
    if n == 1:
        return 0
    adj = _adjacency(M, tol)
    for root in range(n):
        seen = np.zeros(n, dtype=bool)
        seen[root] = True
        frontier = [root]
        while frontier:
            nxt = []
            for u in frontier:
                for v in np.nonzero(adj[u] & ~seen)[0]:
                    seen[v] = True
                    nxt.append(int(v))
            frontier = nxt
        if seen.all():
            return root
    return None


def has_spanning_tree(L, tol: float = TOL_STRUCT) -> bool:
    return spanning_tree_root(L, tol=tol) is not None


# ---------------------------------------------------------------------------
# system bundle and file formats
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class SystemSpec:
    """One analyzable system: susceptibility, Laplacian, appraisal, optional coupling.

    The constructor only checks shapes and finiteness so that synthetic
    systems (for example the induced appraisal ``I - rho*L``) can be built
    freely; :meth:`from_json` applies the full structural validation.
    """

    lam: np.ndarray
    laplacian: np.ndarray
    appraisal: np.ndarray
    mids: np.ndarray | None = None

    def __post_init__(self):
        lam = as_vector(self.lam, "lambda")
        L = as_matrix(self.laplacian, "laplacian")
        D = as_matrix(self.appraisal, "appraisal")
        n = lam.shape[0]
        if L.shape[0] != n or D.shape[0] != n:
            raise ValidationError(
                f"inconsistent dimensions: lambda {n}, laplacian {L.shape[0]}, "
                f"appraisal {D.shape[0]}"
            )
        C = None if self.mids is None else as_matrix(self.mids, "issue coupling")
        object.__setattr__(self, "lam", lam)
        object.__setattr__(self, "laplacian", L)
        object.__setattr__(self, "appraisal", D)
        object.__setattr__(self, "mids", C)

    @property
    def n_agents(self) -> int:
        return self.lam.shape[0]

    @property
    def n_issues(self) -> int:
        return 1 if self.mids is None else self.mids.shape[0]

    def iteration_matrix(self) -> np.ndarray:
        """The one-step issue-free update matrix I - Lambda L D."""
        n = self.n_agents
        return np.eye(n) - (self.lam[:, None] * self.laplacian) @ self.appraisal

    def multi_issue_matrix(self) -> np.ndarray:
        """Materialized Kronecker update matrix (oracle-sized systems only)."""
        if self.mids is None:
            raise ValidationError("system has no issue-coupling matrix")
        return np.kron(self.iteration_matrix(), self.mids)

    def validate_structure(self, tol: float = TOL_STRUCT) -> str:
        """Run the full structural checks; returns the appraisal kind."""
        InteractingLaplacian(self.laplacian, tol=tol)
        SusceptibilityMatrix(self.lam, tol=tol)
        kind = AppraisalMatrix(self.appraisal, tol=tol).kind
        if self.mids is not None:
            MiDSMatrix(self.mids)
        return kind

    def to_json_dict(self) -> dict:
        doc = {
            "lambda": self.lam.tolist(),
            "laplacian": self.laplacian.tolist(),
            "appraisal": self.appraisal.tolist(),
        }
        if self.mids is not None:
            doc["mids"] = self.mids.tolist()
            doc["n_issues"] = int(self.mids.shape[0])
        return doc

    def save_json(self, path) -> None:
        Path(path).write_text(json.dumps(self.to_json_dict(), indent=2) + "\n")

    @classmethod
    def from_json_dict(cls, doc: dict, tol: float = TOL_STRUCT) -> "SystemSpec":
        for key in ("lambda", "laplacian", "appraisal"):
            if key not in doc:
                raise ValidationError(f"system document is missing field {key!r}")
        mids = doc.get("mids")
        if mids is not None and "n_issues" in doc:
            if int(doc["n_issues"]) != len(mids):
                raise ValidationError(
                    f"n_issues={doc['n_issues']} does not match mids dimension {len(mids)}"
                )
        spec = cls(
            lam=doc["lambda"],
            laplacian=doc["laplacian"],
            appraisal=doc["appraisal"],
            mids=mids,
        )
        spec.validate_structure(tol=tol)
        return spec

    @classmethod
    def from_json(cls, path, tol: float = TOL_STRUCT) -> "SystemSpec":
        p = Path(path)
        if not p.exists():
            raise ValidationError(f"system file not found: {p}")
        try:
            doc = json.loads(p.read_text())
        except json.JSONDecodeError as exc:
            raise ValidationError(f"{p}: invalid JSON at line {exc.lineno}: {exc.msg}")
        if not isinstance(doc, dict):
            raise ValidationError(f"{p}: expected a JSON object")
        return cls.from_json_dict(doc, tol=tol)


def load_matrix_csv(path) -> np.ndarray:
    """Read a comma-separated matrix; '#' starts a comment, blank lines skipped."""
    p = Path(path)
    if not p.exists():
        raise ValidationError(f"matrix file not found: {p}")
    rows = []
    width = None
    for lineno, raw in enumerate(p.read_text().splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        try:
            row = [float(tok) for tok in line.split(",")]
        except ValueError as exc:
            raise ValidationError(f"{p}:{lineno}: {exc}")
        if width is None:
            width = len(row)
        elif len(row) != width:
            raise ValidationError(
                f"{p}:{lineno}: expected {width} columns, found {len(row)}"
            )
        rows.append(row)
    if not rows:
        raise ValidationError(f"{p}: no data rows")
    return np.array(rows, dtype=float)


def save_matrix_csv(path, M, header: str | None = None) -> None:
    M = np.atleast_2d(np.asarray(M, dtype=float))
    lines = [] if header is None else [f"# {header}"]
    for row in M:
        lines.append(",".join(repr(float(v)) for v in row))
    Path(path).write_text("\n".join(lines) + "\n")


def parse_vector_arg(text: str) -> np.ndarray:
    """Parse an initial-opinion argument: inline comma list or a CSV file path."""
    try:
        return as_vector([float(tok) for tok in text.split(",") if tok.strip() != ""])
    except (ValueError, ValidationError):
        pass
    if Path(text).exists():
        return as_vector(load_matrix_csv(text).reshape(-1))
    raise ValidationError(f"cannot parse vector {text!r} (not numbers, not a file)")
