"""Dense complex matrix algebra for small bipartite operators.

Matrices are plain ``numpy`` arrays of dtype ``complex128``.  Every public
function accepts anything array-like, validates it with :func:`as_matrix`
and never mutates its input.

The Hermitian eigensolver is a cyclic complex Jacobi method; it is written
out here rather than delegated to LAPACK so that the numerical checks in this
package (PPT verdicts, CHSH maxima) can be cross-checked against
``numpy.linalg`` as an independent route.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .exceptions import HermiticityError, NumericError, ShapeError, SizeError

MAX_DIMENSION = 4096
DEFAULT_TOL = 1e-9
CONVERGENCE_TOL = 1e-12

PAULI_X = np.array([[0, 1], [1, 0]], dtype=complex)
PAULI_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
PAULI_Z = np.array([[1, 0], [0, -1]], dtype=complex)
PAULIS = (PAULI_X, PAULI_Y, PAULI_Z)


def as_matrix(m) -> np.ndarray:
    """Return ``m`` as a 2-D finite complex array (a copy if conversion is needed).

    Raises
    ------
    ShapeError
        If ``m`` is not two-dimensional or has an empty axis.
    ValueError
        If any entry is NaN or infinite.
    """
    arr = np.asarray(m, dtype=complex)
    if arr.ndim != 2 or arr.shape[0] < 1 or arr.shape[1] < 1:
        raise ShapeError(f"expected a non-empty 2-D matrix, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ValueError("matrix contains non-finite entries")
    return arr


def _square(m) -> np.ndarray:
    arr = as_matrix(m)
    if arr.shape[0] != arr.shape[1]:
        raise ShapeError(f"expected a square matrix, got shape {arr.shape}")
    return arr


def _bipartite(m, dim_a: int, dim_b: int) -> np.ndarray:
    arr = _square(m)
    if dim_a < 1 or dim_b < 1 or arr.shape[0] != dim_a * dim_b:
        raise ShapeError(
            f"matrix side {arr.shape[0]} does not equal dimA*dimB = {dim_a}*{dim_b}"
        )
    return arr


def _party(party: str) -> str:
    p = str(party).upper()
    if p not in ("A", "B"):
        raise ValueError(f"party must be 'A' or 'B', got {party!r}")
    return p


def kron(a, b, max_dimension: int = MAX_DIMENSION) -> np.ndarray:
    """Kronecker product ``a ⊗ b``; block ``(i, j)`` of the result is ``a[i, j] * b``."""
    a = as_matrix(a)
    b = as_matrix(b)
    rows = a.shape[0] * b.shape[0]
    cols = a.shape[1] * b.shape[1]
    if max(rows, cols) > max_dimension:
        raise SizeError(f"kron result {rows}x{cols} exceeds maximum dimension {max_dimension}")
    return np.kron(a, b)


def partial_trace(m, dim_a: int, dim_b: int, traced_party: str = "B") -> np.ndarray:
    """Trace out one party of an operator on ``C^dimA ⊗ C^dimB``.

    The result acts on the kept party only.
    """
    arr = _bipartite(m, dim_a, dim_b).reshape(dim_a, dim_b, dim_a, dim_b)
    if _party(traced_party) == "B":
        return np.einsum("ikjk->ij", arr)
    return np.einsum("kikj->ij", arr)


def partial_transpose(m, dim_a: int, dim_b: int, party: str = "B") -> np.ndarray:
    """Transpose the indices of one party, leaving the other untouched.

    This is a pure index permutation, so applying it twice returns the input
    exactly.
    """
    arr = _bipartite(m, dim_a, dim_b).reshape(dim_a, dim_b, dim_a, dim_b)
    if _party(party) == "B":
        out = arr.transpose(0, 3, 2, 1)
    else:
        out = arr.transpose(2, 1, 0, 3)
    return np.ascontiguousarray(out).reshape(dim_a * dim_b, dim_a * dim_b)


def hermiticity_residual(m) -> float:
    """``max |m - m†|`` over all entries."""
    arr = _square(m)
    return float(np.max(np.abs(arr - arr.conj().T)))


def _jacobi(h: np.ndarray, want_vectors: bool, conv_tol: float, max_rotations: int | None):
    n = h.shape[0]
    a = h.copy()
    v = np.eye(n, dtype=complex) if want_vectors else None
    if max_rotations is None:
        max_rotations = 10 * n * n
    scale = np.linalg.norm(a)
    if n == 1 or scale == 0.0:
        return a.diagonal().real.copy(), v

    offdiag = ~np.eye(n, dtype=bool)
    rotations = 0
    while True:
        off = np.linalg.norm(a[offdiag])
        if off <= conv_tol * scale:
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                z = a[p, q]
                r = abs(z)
                # below this the rotation cannot change any entry in double precision
                if r <= 1e-3 * conv_tol * scale:
                    continue
                if rotations >= max_rotations:
                    raise NumericError(
                        f"Jacobi eigensolver did not converge within {max_rotations} rotations"
                    )
                phase = z / r
                theta = (a[q, q].real - a[p, p].real) / (2.0 * r)
                t = np.copysign(1.0, theta) / (abs(theta) + np.sqrt(theta * theta + 1.0))
                c = 1.0 / np.sqrt(t * t + 1.0)
                s = t * c
                # unitary acting on span(e_p, e_q): phase fix, then real rotation
                u = np.array([[c, s], [-s * np.conj(phase), c * np.conj(phase)]])
                idx = [p, q]
                a[:, idx] = a[:, idx] @ u
                a[idx, :] = u.conj().T @ a[idx, :]
                a[p, q] = a[q, p] = 0.0
                a[p, p] = a[p, p].real
                a[q, q] = a[q, q].real
                if v is not None:
                    v[:, idx] = v[:, idx] @ u
                rotations += 1
    return a.diagonal().real.copy(), v


def _hermitian_part(m, tol: float) -> np.ndarray:
    arr = _square(m)
    res = hermiticity_residual(arr)
    if res > tol:
        raise HermiticityError(f"matrix is not Hermitian: max |m - m†| = {res:.3e} > {tol:.1e}")
    return 0.5 * (arr + arr.conj().T)


def hermitian_eigenvalues(
    m,
    tol: float = DEFAULT_TOL,
    conv_tol: float = CONVERGENCE_TOL,
    max_rotations: int | None = None,
) -> np.ndarray:
    """Eigenvalues of a Hermitian matrix in ascending order.

    Parameters
    ----------
    m : array_like
        Square matrix with ``max |m - m†| <= tol``.  Only its Hermitian part
        ``(m + m†)/2`` is diagonalised.
    tol : float
        Hermiticity tolerance.
    conv_tol : float
        Jacobi sweeps stop once the off-diagonal Frobenius norm drops below
        ``conv_tol * ||m||_F``.
    max_rotations : int, optional
        Rotation cap; defaults to ``10 * n**2``.

    Returns
    -------
    numpy.ndarray
        Real eigenvalues, ascending.  Near-degenerate values are not merged.

    Raises
    ------
    HermiticityError
        If ``m`` is not Hermitian within ``tol``.
    NumericError
        If the rotation cap is reached before convergence.
    """
    values, _ = _jacobi(_hermitian_part(m, tol), False, conv_tol, max_rotations)
    return np.sort(values)


def hermitian_eigh(
    m,
    tol: float = DEFAULT_TOL,
    conv_tol: float = CONVERGENCE_TOL,
    max_rotations: int | None = None,
) -> tuple[np.ndarray, np.ndarray]:
    """Like :func:`hermitian_eigenvalues` but also return unit eigenvectors as columns."""
    values, vectors = _jacobi(_hermitian_part(m, tol), True, conv_tol, max_rotations)
    order = np.argsort(values, kind="stable")
    return values[order], vectors[:, order]


@dataclass(frozen=True)
class DensityReport:
    """Outcome of :func:`validate_density`."""

    hermiticity_residual: float
    trace_deviation: float
    min_eigenvalue: float
    tol: float

    @property
    def passed(self) -> bool:
        return (
            self.hermiticity_residual <= self.tol
            and self.trace_deviation <= self.tol
            and self.min_eigenvalue >= -self.tol
        )

    def describe(self) -> str:
        return (
            f"hermiticity residual {self.hermiticity_residual:.3e}, "
            f"|Tr - 1| {self.trace_deviation:.3e}, "
            f"min eigenvalue {self.min_eigenvalue:.3e} (tol {self.tol:.1e})"
        )


def validate_density(m, tol: float = DEFAULT_TOL) -> DensityReport:
    """Check that ``m`` is a density matrix: Hermitian, unit trace, PSD.

    Never raises on a bad matrix; the verdict is ``report.passed``.  The
    minimum eigenvalue is taken from the Hermitian part, so it stays defined
    for matrices that fail the hermiticity check.
    """
    arr = _square(m)
    herm = hermiticity_residual(arr)
    trace_dev = abs(np.trace(arr) - 1.0)
    sym = 0.5 * (arr + arr.conj().T)
    min_eig = float(hermitian_eigenvalues(sym, tol=np.inf)[0])
    return DensityReport(herm, float(trace_dev), min_eig, tol)
