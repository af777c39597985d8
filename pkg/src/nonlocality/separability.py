"""Separability verdicts and the entanglement-versus-nonlocality scan.

Separability is decided with the partial-transpose test, which is exact only
for total dimension at most 6; larger PPT states are reported as
``"inconclusive"``.  :func:`scan_family` sweeps a one-parameter family of
two-qubit states and sorts each point into one of three classes:

``separable``
    positive partial transpose,
``entangled-local-CHSH``
    entangled but with maximal CHSH value at most 2,
``entangled-CHSH-violating``
    maximal CHSH value above 2.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .exceptions import DomainError, ShapeError
from .linalg import hermitian_eigenvalues, kron, partial_transpose
from .locality import (
    LhvResult,
    behavior_from_state,
    chsh_max,
    chsh_optimal_settings,
    lhv_membership,
)
from .quantum import (
    DensityOperator,
    SeparableComponents,
    bell_state,
    noisy_state,
    qubit_state,
    werner_state,
)

PPT_TOL = 1e-9
MAX_BISECTIONS = 60

SEPARABLE = "separable"
ENTANGLED_LOCAL = "entangled-local-CHSH"
ENTANGLED_VIOLATING = "entangled-CHSH-violating"

SETTINGS_CAVEAT = (
    "LHV verdict uses only the CHSH-optimal settings; feasibility at finitely "
    "many settings does not certify a local model for all measurements"
)


@dataclass(frozen=True)
class PptReport:
    min_eigenvalue: float
    verdict: str
    dims: tuple[int, int]
    tol: float


def ppt_test(rho: DensityOperator, tol: float = PPT_TOL) -> PptReport:
    """Partial-transpose separability test on party B.

    ``entangled`` iff the smallest eigenvalue of ``ρ^{T_B}`` is below
    ``-tol``; otherwise ``separable`` when ``dimA*dimB <= 6`` and
    ``inconclusive`` above that.
    """
    if not rho.is_bipartite:
        raise ShapeError("PPT test needs a bipartite state")
    pt = partial_transpose(rho.matrix, rho.dim_a, rho.dim_b, "B")
    lam = float(hermitian_eigenvalues(pt)[0])
    if lam < -tol:
        verdict = "entangled"
    elif rho.dim <= 6:
        verdict = SEPARABLE
    else:
        verdict = "inconclusive"
    return PptReport(lam, verdict, rho.dims, tol)


def verify_separable_decomposition(rho: DensityOperator, c: SeparableComponents) -> float:
    """``max |ρ - Σ_μ λ_μ ρ_Aμ ⊗ ρ_Bμ|`` over matrix entries.

    A small residual certifies ``rho`` as a convex mixture of product states.
    Weights are validated by :class:`SeparableComponents` itself.
    """
    if c.dims != rho.dims:
        raise ShapeError(f"decomposition dims {c.dims} do not match state dims {rho.dims}")
    recon = sum(w * kron(a.matrix, b.matrix) for w, a, b in c.components)
    return float(np.max(np.abs(rho.matrix - recon)))


_AXES = (
    np.array([1.0, 0.0, 0.0]),
    np.array([-1.0, 0.0, 0.0]),
    np.array([0.0, 1.0, 0.0]),
    np.array([0.0, -1.0, 0.0]),
    np.array([0.0, 0.0, 1.0]),
    np.array([0.0, 0.0, -1.0]),
)


def werner_decomposition(p: float) -> SeparableComponents:
    """Six-term product decomposition of ``werner_state(p)`` for ``p <= 1/3``.

    Each term pairs the pure state along a signed Pauli axis ``n`` with the
    B state of Bloch vector ``-3p n``, all with weight 1/6.  Averaging over
    the six axes cancels the local Bloch vectors and leaves the correlation
    matrix ``-p I`` of the Werner state.
    """
    p = float(p)
    if not 0.0 <= p <= 1.0 / 3.0:
        raise DomainError(f"Werner state is entangled or out of range for p = {p}")
    comps = [(1.0 / 6.0, qubit_state(n), qubit_state(-3.0 * p * n)) for n in _AXES]
    return SeparableComponents(tuple(comps))


def _bisect(is_upper: Callable[[float], bool], lo: float, hi: float, tol: float) -> float:
    # invariant: is_upper(lo) is False, is_upper(hi) is True
    for _ in range(MAX_BISECTIONS):
        if hi - lo <= tol:
            break
        mid = 0.5 * (lo + hi)
        if is_upper(mid):
            hi = mid
        else:
            lo = mid
    return 0.5 * (lo + hi)


def werner_ppt_threshold(tol: float = 1e-9) -> float:
    """Bisect the Werner parameter at which the PPT verdict turns to entangled."""
    if tol <= 0:
        raise DomainError("tolerance must be positive")
    return _bisect(lambda p: ppt_test(werner_state(p)).verdict == "entangled", 0.0, 1.0, tol)


def werner_chsh_threshold(tol: float = 1e-9) -> float:
    """Bisect the Werner parameter at which ``chsh_max`` first exceeds 2."""
    if tol <= 0:
        raise DomainError("tolerance must be positive")
    return _bisect(lambda p: chsh_max(werner_state(p)) > 2.0, 0.0, 1.0, tol)


@dataclass(frozen=True)
class ScanRow:
    parameter: float
    ppt: PptReport
    chsh_max: float
    lhv: LhvResult
    classification: str
    note: str = SETTINGS_CAVEAT

    @property
    def lhv_verdict(self) -> str:
        return self.lhv.verdict


FAMILIES = ("werner", "isotropic")


def family_state(family: str, p: float, kind: str = "phi+") -> DensityOperator:
    """Member ``p`` of a named family.

    ``werner`` is the singlet with white noise; ``isotropic`` is the Bell
    state ``kind`` with white noise.
    """
    if family == "werner":
        return werner_state(p)
    if family == "isotropic":
        return noisy_state(p, bell_state(kind))
    raise DomainError(f"unknown family {family!r}; expected one of {FAMILIES}")


def classify(rho: DensityOperator, tol: float = PPT_TOL) -> ScanRow:
    """Classify one two-qubit state; ``parameter`` is left as NaN."""
    ppt = ppt_test(rho, tol)
    smax = chsh_max(rho)
    meas_a, meas_b = chsh_optimal_settings(rho)
    lhv = lhv_membership(behavior_from_state(rho, meas_a, meas_b))
    if ppt.verdict == SEPARABLE:
        cls = SEPARABLE
    elif smax > 2.0 + tol:
        cls = ENTANGLED_VIOLATING
    else:
        cls = ENTANGLED_LOCAL
    return ScanRow(float("nan"), ppt, smax, lhv, cls)


def scan_family(
    family: str, grid: Sequence[float], kind: str = "phi+", tol: float = PPT_TOL
) -> list[ScanRow]:
    """Classify every grid point of a two-qubit family, in grid order."""
    grid = [float(g) for g in grid]
    if any(not 0.0 <= g <= 1.0 for g in grid):
        raise DomainError("grid values must lie in [0, 1]")
    rows = []
    for g in grid:
        row = classify(family_state(family, g, kind), tol)
        rows.append(ScanRow(g, row.ppt, row.chsh_max, row.lhv, row.classification))
    return rows


@dataclass(frozen=True)
class RegimeBoundary:
    lower: str
    upper: str
    parameter: float
    bracket: tuple[float, float]


def regime_boundaries(
    rows: Sequence[ScanRow],
    family: str,
    kind: str = "phi+",
    tol: float = 1e-6,
    refine: bool = True,
) -> list[RegimeBoundary]:
    """Locate class changes between adjacent scan rows.

    With ``refine`` each change is bisected to ``tol`` between its two grid
    points; otherwise the midpoint is reported.
    """
    out = []
    for left, right in zip(rows, rows[1:]):
        if left.classification == right.classification:
            continue
        lo, hi = left.parameter, right.parameter
        target = right.classification
        if lo > hi:
            lo, hi = hi, lo
            target = left.classification
        if refine:
            # assumes a single crossing inside the bracket
            est = _bisect(
                lambda p: classify(family_state(family, p, kind)).classification == target,
                lo,
                hi,
                tol,
            )
        else:
            est = 0.5 * (lo + hi)
        out.append(RegimeBoundary(left.classification, right.classification, est, (lo, hi)))
    return out
