"""Dense complex linear algebra shared by every other module.

Vectorization convention
------------------------
Density matrices are vectorized by **column stacking**: ``vec(rho)[i + N*j] = rho[i, j]``.
With this convention ``vec(A @ rho @ B) = kron(B.T, A) @ vec(rho)``, which is
the identity every superoperator builder in this package relies on.

Tensor-product ordering: the leftmost factor of ``kron`` is the slowest-varying
index, so a mode (dim N) followed by an ancilla qubit is indexed ``2*n + s``.
"""

from __future__ import annotations

from typing import Sequence

import numpy as np
import scipy.linalg

HERMITIAN_TOL = 1e-10


class NotHermitianError(ValueError):
    """Raised when an operator that must be Hermitian is not."""


def kron(*ops: np.ndarray) -> np.ndarray:
    """Tensor product of any number of operators (leftmost = slowest index)."""
    out = np.asarray(ops[0])
    for op in ops[1:]:
        out = np.kron(out, op)
    return out


def dag(op: np.ndarray) -> np.ndarray:
    return op.conj().T


def hermitian_defect(h: np.ndarray) -> float:
    return float(np.max(np.abs(h - h.conj().T))) if h.size else 0.0


def _check_square(h: np.ndarray) -> None:
    if h.ndim != 2 or h.shape[0] != h.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {h.shape}")


def eig_hermitian(h: np.ndarray, tol: float = HERMITIAN_TOL) -> tuple[np.ndarray, np.ndarray]:
    """Eigendecomposition of a Hermitian matrix, eigenvalues ascending.

    The input is symmetrized as ``(h + h^dagger)/2`` after checking that it is
    Hermitian to within ``tol`` (relative to its largest entry).
    """
    h = np.asarray(h)
    _check_square(h)
    scale = max(1.0, float(np.max(np.abs(h)))) if h.size else 1.0
    if hermitian_defect(h) > tol * scale:
        raise NotHermitianError(f"matrix is not Hermitian (defect {hermitian_defect(h):.3e})")
    return np.linalg.eigh(0.5 * (h + h.conj().T))


def from_eig(vals: np.ndarray, vecs: np.ndarray, f) -> np.ndarray:
    """Return ``V f(Lambda) V^dagger`` for an eigendecomposition ``(vals, vecs)``."""
    return (vecs * f(vals)) @ vecs.conj().T


def expm_via_eig(h: np.ndarray, scale: complex) -> np.ndarray:
    """``exp(scale * h)`` for Hermitian ``h``, computed from its eigendecomposition."""
    vals, vecs = eig_hermitian(h)
    return from_eig(vals, vecs, lambda lam: np.exp(scale * lam))


def funm_hermitian(h: np.ndarray, f) -> np.ndarray:
    """Apply a scalar function to a Hermitian matrix through its spectrum."""
    vals, vecs = eig_hermitian(h)
    return from_eig(vals, vecs, f)


def partial_trace(rho: np.ndarray, dims: Sequence[int], keep: Sequence[int]) -> np.ndarray:
    """Trace out every subsystem not listed in ``keep``.

    ``dims`` lists the factor dimensions of the Hilbert space (e.g. ``[N, 2]``);
    ``keep`` holds indices into ``dims``; the kept factors stay in their original order.
    """
    dims = [int(d) for d in dims]
    if any(d < 1 for d in dims):
        raise ValueError("all subsystem dimensions must be >= 1")
    total = int(np.prod(dims))
    rho = np.asarray(rho)
    if rho.shape != (total, total):
        raise ValueError(f"rho has shape {rho.shape}, expected ({total}, {total})")
    keep = sorted(set(int(k) for k in keep))
    if any(k < 0 or k >= len(dims) for k in keep):
        raise IndexError(f"keep indices {keep} out of range for {len(dims)} subsystems")
    n = len(dims)
    traced = [k for k in range(n) if k not in keep]
    t = rho.reshape(dims + dims)
    # trace from the highest index down so axis numbers stay valid
    for k in sorted(traced, reverse=True):
        m = t.ndim // 2
        t = np.trace(t, axis1=k, axis2=k + m)
    d_keep = int(np.prod([dims[k] for k in keep])) if keep else 1
    return t.reshape(d_keep, d_keep)


def vec(rho: np.ndarray) -> np.ndarray:
    """Column-stacking vectorization."""
    return np.asarray(rho).reshape(-1, order="F")


def unvec(v: np.ndarray, dim: int | None = None) -> np.ndarray:
    v = np.asarray(v)
    if dim is None:
        dim = int(round(np.sqrt(v.size)))
    if dim * dim != v.size:
        raise ValueError(f"vector of length {v.size} is not a vectorized {dim}x{dim} matrix")
    return v.reshape(dim, dim, order="F")


def spre(a: np.ndarray) -> np.ndarray:
    """Superoperator of left multiplication, rho -> a @ rho."""
    return np.kron(np.eye(a.shape[1]), a)


def spost(b: np.ndarray) -> np.ndarray:
    """Superoperator of right multiplication, rho -> rho @ b."""
    return np.kron(b.T, np.eye(b.shape[0]))


def sprepost(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """rho -> a @ rho @ b."""
    return np.kron(b.T, a)


def lindblad_dissipator(c: np.ndarray) -> np.ndarray:
    """Superoperator of D[c](rho) = c rho c^dag - (c^dag c rho + rho c^dag c)/2."""
    cd = c.conj().T
    cdc = cd @ c
    return sprepost(c, cd) - 0.5 * spre(cdc) - 0.5 * spost(cdc)


def apply_superop(superop: np.ndarray, rho: np.ndarray) -> np.ndarray:
    rho = np.asarray(rho)
    if superop.shape[1] != rho.size:
        raise ValueError(f"superoperator of shape {superop.shape} cannot act on a {rho.shape} matrix")
    return unvec(superop @ vec(rho), rho.shape[0])


def expm_general(m: np.ndarray) -> np.ndarray:
    """Matrix exponential of a non-normal generator (Liouvillians only)."""
    return scipy.linalg.expm(m)


def trace_norm(m: np.ndarray) -> float:
    """Schatten-1 norm; ``m`` is assumed Hermitian."""
    return float(np.sum(np.abs(np.linalg.eigvalsh(0.5 * (m + m.conj().T)))))


def fidelity_pure(psi: np.ndarray, phi: np.ndarray) -> float:
    """|<psi|phi>|^2 for normalized kets."""
    return float(abs(np.vdot(psi, phi)) ** 2)


def fidelity_state(rho: np.ndarray, psi: np.ndarray) -> float:
    """<psi| rho |psi> (fidelity of a mixed state with a pure target)."""
    return float(np.real(np.vdot(psi, rho @ psi)))
