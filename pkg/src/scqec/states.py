"""Fock, coherent, squeezed-cat and squeezed-displaced-Fock states, plus Wigner grids.

States are built in a padded workspace larger than the requested cutoff so the
truncated displacement and squeezing exponentials act exactly on them; the
population left above the cutoff is checked against ``tail_tol`` before the
state is cut down and renormalized.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .operators import (
    CodeParams,
    TruncationError,
    apply_displacement,
    apply_squeeze,
    default_truncation,
)

TAIL_TOL = 1e-10
MAX_DIM = 6000


def _pad(dim: int) -> int:
    return max(40, dim // 2)


def tail_population(psi: np.ndarray, dim: int) -> float:
    return float(np.sum(np.abs(psi[dim:]) ** 2))


def _normalized(v: np.ndarray) -> np.ndarray:
    nrm = np.linalg.norm(v)
    if not np.isfinite(nrm) or nrm == 0:
        raise ValueError("state has zero or non-finite norm")
    return v / nrm


def _truncate(v: np.ndarray, dim: int, tail_tol: float, what: str) -> np.ndarray:
    tail = tail_population(v, dim) / float(np.vdot(v, v).real)
    if tail > tail_tol:
        raise TruncationError(f"{what}: population {tail:.2e} above cutoff {dim} exceeds {tail_tol:.0e}")
    return v[:dim].copy()


def fock(dim: int, n: int) -> np.ndarray:
    if not 0 <= n < dim:
        raise ValueError(f"Fock level {n} outside a {dim}-level space")
    v = np.zeros(dim, dtype=complex)
    v[n] = 1.0
    return v


def coherent(dim: int, amp: complex, tail_tol: float = TAIL_TOL) -> np.ndarray:
    work = dim + _pad(dim)
    v = apply_displacement(amp, fock(work, 0))
    return _normalized(_truncate(v, dim, tail_tol, f"coherent({amp})"))


def _sdf_raw(code: CodeParams, sign: int, n: int, work: int) -> np.ndarray:
    # S(r) (D(a') + sign (-1)^n D(-a')) |n>, unnormalized
    ap = code.alpha_prime
    f = fock(work, n)
    v = apply_displacement(ap, f) + sign * (-1) ** n * apply_displacement(-ap, f)
    return apply_squeeze(code.r, v)


def required_dim(code: CodeParams, n_max: int = 0, tail_tol: float = TAIL_TOL) -> int:
    """Smallest cutoff holding every SDF state up to level ``n_max`` within ``tail_tol``.

    The usual closed-form guess ``default_truncation`` is a floor; strongly
    squeezed states need considerably more room than it gives.
    """
    dim = default_truncation(code) + 4 * n_max
    while dim <= MAX_DIM:
        work = dim + _pad(dim)
        need = 0
        for sign in (1, -1):
            pops = np.abs(_sdf_raw(code, sign, n_max, work)) ** 2
            if pops.sum() < 1e-12:
                continue
            tails = np.cumsum(pops[::-1])[::-1] / pops.sum()
            ok = np.nonzero(tails <= tail_tol)[0]
            need = max(need, int(ok[0]) if ok.size else work)
        if need <= dim:
            return dim
        dim = max(need + 4, int(dim * 1.25))
    raise TruncationError(f"alpha={code.alpha}, r={code.r} needs more than {MAX_DIM} Fock levels")


def displaced_squeezed(code: CodeParams, dim: int | None = None, sign: int = 1,
                       tail_tol: float = TAIL_TOL) -> np.ndarray:
    """``|sign*alpha, r> = D(sign*alpha) S(r) |0>``."""
    dim = required_dim(code) if dim is None else dim
    work = dim + _pad(dim)
    v = apply_displacement(sign * code.alpha, apply_squeeze(code.r, fock(work, 0)))
    return _normalized(_truncate(v, dim, tail_tol, "displaced squeezed state"))


@dataclass(frozen=True)
class ScState:
    """Squeezed cat ``(|alpha,r> + sign|-alpha,r>)/sqrt(norm_const)``."""

    ket: np.ndarray
    code: CodeParams
    sign: int
    norm_const: float


@dataclass(frozen=True)
class SdfState:
    ket: np.ndarray
    code: CodeParams
    sign: int
    level: int
    norm_const: float


def _check_sign(sign: int) -> int:
    if sign not in (1, -1):
        raise ValueError(f"sign must be +1 or -1, got {sign}")
    return sign


def sdf_state(code: CodeParams, sign: int, n: int, dim: int | None = None,
              tail_tol: float = TAIL_TOL) -> SdfState:
    """Squeezed displaced Fock state of level ``n`` and parity ``sign``."""
    _check_sign(sign)
    if n < 0:
        raise ValueError("level must be >= 0")
    dim = required_dim(code, n) if dim is None else dim
    work = dim + _pad(dim)
    v = _truncate(_sdf_raw(code, sign, n, work), dim, tail_tol, f"SDF state ({sign:+d}, {n})")
    norm_const = float(np.vdot(v, v).real)
    if norm_const < 1e-12:
        raise ValueError(f"SDF state ({sign:+d}, {n}) vanishes at alpha'={code.alpha_prime:.3g}")
    return SdfState(v / math.sqrt(norm_const), code, sign, n, norm_const)


def sc_state(code: CodeParams, sign: int, dim: int | None = None,
             tail_tol: float = TAIL_TOL) -> ScState:
    s = sdf_state(code, sign, 0, dim, tail_tol)
    return ScState(s.ket, code, sign, s.norm_const)


def logical_computational(code: CodeParams, bit: int, dim: int | None = None,
                          tail_tol: float = TAIL_TOL) -> np.ndarray:
    """``|0_L>`` or ``|1_L>`` as ``(|sq+> +- |sq->)/sqrt2``."""
    if bit not in (0, 1):
        raise ValueError("bit must be 0 or 1")
    dim = required_dim(code, 0, tail_tol) if dim is None else dim
    plus = sc_state(code, 1, dim, tail_tol).ket
    minus = sc_state(code, -1, dim, tail_tol).ket
    return (plus + (1 - 2 * bit) * minus) / math.sqrt(2)


def default_wigner_grid(code: CodeParams, points: int = 161) -> np.ndarray:
    half = math.sqrt(2) * code.alpha + 4
    return np.linspace(-half, half, points)


def wigner(state: np.ndarray, xvec: np.ndarray, pvec: np.ndarray) -> np.ndarray:
    """Wigner function ``W[i, j] = W(x=xvec[j], p=pvec[i])``.

    Normalized so that the integral over ``dx dp`` is 1, i.e.
    ``W(x, p) = (1/pi) <D(b) P D(b)^dag>`` with ``b = (x + ip)/sqrt2`` and ``P``
    the parity.  ``state`` is a ket or a density matrix.
    """
    state = np.asarray(state, dtype=complex)
    if state.ndim == 2:
        vals, vecs = np.linalg.eigh(0.5 * (state + state.conj().T))
        keep = vals > 1e-14
        kets = vecs[:, keep] * np.sqrt(vals[keep])
    else:
        kets = state[:, None]
    dim = kets.shape[0]
    bmax = math.hypot(np.max(np.abs(xvec)), np.max(np.abs(pvec))) / math.sqrt(2)
    work = dim + math.ceil(4 * bmax**2 + 10 * bmax + 20)
    padded = np.zeros((work, kets.shape[1]), dtype=complex)
    padded[:dim] = kets
    signs = (-1.0) ** np.arange(work)
    out = np.zeros((len(pvec), len(xvec)))
    for jx, x in enumerate(xvec):
        # D(b)^dag = D(-b) = D(-ip/sqrt2) D(-x/sqrt2) up to a phase that cancels
        shifted = apply_displacement(-x / math.sqrt(2), padded)
        for ip, p in enumerate(pvec):
            phi = apply_displacement(-1j * p / math.sqrt(2), shifted)
            out[ip, jx] = np.sum(signs[:, None] * np.abs(phi) ** 2)
    return out / math.pi


def write_wigner_csv(path, xvec, pvec, w) -> None:
    header = (
        f"x in [{xvec[0]:.6g}, {xvec[-1]:.6g}] ({len(xvec)} columns); "
        f"p in [{pvec[0]:.6g}, {pvec[-1]:.6g}] ({len(pvec)} rows, ascending)\n"
        "W(x,p) = (1/pi) <D(b) P D(b)^dag>, b = (x+ip)/sqrt2; integral over dx dp equals 1"
    )
    np.savetxt(path, w, delimiter=",", header=header, fmt="%.12e")
