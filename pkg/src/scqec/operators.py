"""Single-mode operators on a truncated Fock space.

Conventions: ``x = (a + a^dag)/sqrt2``, ``p = (a - a^dag)/(sqrt2 i)``,
``D(b) = exp(b a^dag - b* a)``, ``S(z) = exp((z* a^2 - z a^dag^2)/2)``.

Every exponential of a quadrature is evaluated from the spectrum of the
truncated position operator, which is real symmetric tridiagonal.  A rotated
quadrature is a diagonal phase conjugation of ``x``: with ``R = diag(w**n)``
and ``|w| = 1``, ``R^dag x R = (w a + conj(w) a^dag)/sqrt2``.  In particular
``p = R^dag x R`` for ``w = -i``.  The squeezing generator splits into two
tridiagonal chains (even and odd Fock levels), which are diagonalized the
same way.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
import scipy.linalg

__all__ = [
    "CodeParams",
    "EnvelopeOverflowError",
    "TruncationError",
    "annihilation",
    "number",
    "quadratures",
    "displacement",
    "squeeze",
    "parity",
    "envelope",
    "envelope_inverse",
    "modular_position",
    "modular_position_fourier",
    "stabilizer_T",
    "dissipator_d",
    "dissipator_dprime",
    "logical_z_ideal",
    "logical_z_finite",
    "default_truncation",
    "wrap",
    "fx",
    "fp",
    "f_quadrature",
    "apply_displacement",
    "apply_f_quadrature",
    "apply_fx",
    "apply_fp",
    "displacement_quadrature",
    "apply_squeeze",
    "hermite_functions",
    "position_matrix",
    "wrap_breakpoints",
    "modular_position_quadrature",
]

ENVELOPE_EXPONENT_LIMIT = 30.0


class TruncationError(RuntimeError):
    """A state does not fit in the truncated Fock space."""


class EnvelopeOverflowError(RuntimeError):
    """Inverting the envelope operator would overflow double precision."""


@dataclass(frozen=True)
class CodeParams:
    """Scalar parameters of the squeezed-cat code.

    ``alpha`` is the displacement and ``r`` the squeezing; everything else is
    derived.
    """

    alpha: float
    r: float

    def __post_init__(self):
        if not (math.isfinite(self.alpha) and self.alpha >= 0):
            raise ValueError(f"alpha must be finite and >= 0, got {self.alpha}")
        if not (math.isfinite(self.r) and self.r >= 0):
            raise ValueError(f"r must be finite and >= 0, got {self.r}")

    @classmethod
    def from_nbar(cls, nbar: float, r: float) -> "CodeParams":
        """Solve ``alpha**2 = nbar - sinh(r)**2`` at fixed mean photon number."""
        a2 = nbar - math.sinh(r) ** 2
        if a2 < 0:
            raise ValueError(f"nbar={nbar} is below sinh^2(r)={math.sinh(r) ** 2:.4g}")
        return cls(math.sqrt(a2), r)

    @classmethod
    def from_alpha_prime(cls, alpha_prime: float, r: float) -> "CodeParams":
        return cls(alpha_prime * math.exp(-r), r)

    @property
    def delta(self) -> float:
        return math.exp(-self.r)

    @property
    def alpha_prime(self) -> float:
        return self.alpha * math.exp(self.r)

    @property
    def modulus(self) -> float:
        return math.sqrt(2) * self.alpha

    @property
    def readout_modulus(self) -> float:
        return 4 * math.sqrt(2) * self.alpha

    @property
    def nbar(self) -> float:
        return self.alpha**2 + math.sinh(self.r) ** 2


def default_truncation(code: CodeParams) -> int:
    """Starting guess for the Fock cutoff; state constructors grow it if needed."""
    nb = code.nbar
    return math.ceil(4 * nb + 6 * math.sqrt(nb) + 20)


# --- cached spectral data ---------------------------------------------------


@lru_cache(maxsize=8)
def _x_eig(dim: int) -> tuple[np.ndarray, np.ndarray]:
    off = np.sqrt(np.arange(1, dim) / 2.0)
    vals, vecs = scipy.linalg.eigh_tridiagonal(np.zeros(dim), off)
    vals.setflags(write=False)
    vecs.setflags(write=False)
    return vals, vecs


@lru_cache(maxsize=8)
def _squeeze_eig(dim: int):
    # K = i(a^2 - a^dag^2)/2 restricted to Fock levels of one parity is
    # D B D^dag with D = diag(i**k) and B real tridiagonal.
    blocks = []
    for start in (0, 1):
        idx = np.arange(start, dim, 2)
        n = idx[:-1]
        off = -np.sqrt((n + 1.0) * (n + 2.0)) / 2.0
        if idx.size == 1:
            vals, vecs = np.zeros(1), np.ones((1, 1))
        else:
            vals, vecs = scipy.linalg.eigh_tridiagonal(np.zeros(idx.size), off)
        phase = 1j ** np.arange(idx.size)
        blocks.append((idx, vals, vecs, phase))
    return blocks


def _check_dim(dim: int) -> int:
    dim = int(dim)
    if dim < 1:
        raise ValueError(f"Fock dimension must be >= 1, got {dim}")
    return dim


def _rotation(dim: int, w: complex) -> np.ndarray:
    return w ** np.arange(dim)


# --- basic matrices ---------------------------------------------------------


def annihilation(dim: int) -> np.ndarray:
    dim = _check_dim(dim)
    return np.diag(np.sqrt(np.arange(1, dim, dtype=float)), 1).astype(complex)


def number(dim: int) -> np.ndarray:
    return np.diag(np.arange(_check_dim(dim), dtype=float)).astype(complex)


def quadratures(dim: int) -> tuple[np.ndarray, np.ndarray]:
    a = annihilation(dim)
    ad = a.conj().T
    return (a + ad) / math.sqrt(2), (a - ad) / (math.sqrt(2) * 1j)


def parity(dim: int) -> np.ndarray:
    return np.diag((-1.0) ** np.arange(_check_dim(dim))).astype(complex)


# --- functions of quadratures ----------------------------------------------


def fx(dim: int, f) -> np.ndarray:
    """``f(x)`` for the truncated position operator (real symmetric if f is real)."""
    vals, vecs = _x_eig(_check_dim(dim))
    return (vecs * f(vals)) @ vecs.T


def f_quadrature(dim: int, f, w: complex) -> np.ndarray:
    """``f(x_w)`` with ``x_w = (w a + conj(w) a^dag)/sqrt2``."""
    r = _rotation(dim, w)
    return r.conj()[:, None] * fx(dim, f) * r[None, :]


def fp(dim: int, f) -> np.ndarray:
    """``f(p)`` for the truncated momentum operator."""
    return f_quadrature(dim, f, -1j)


def displacement(dim: int, amp: complex) -> np.ndarray:
    amp = complex(amp)
    if amp == 0:
        return np.eye(_check_dim(dim), dtype=complex)
    # b a^dag - b* a = -i sqrt2 |b| x_w with w = -i conj(b)/|b|
    rho = abs(amp)
    w = -1j * amp.conjugate() / rho
    return f_quadrature(dim, lambda lam: np.exp(-1j * math.sqrt(2) * rho * lam), w)


def apply_f_quadrature(f, w: complex, psi: np.ndarray) -> np.ndarray:
    """``f(x_w) @ psi`` without forming the matrix; ``psi`` may carry trailing axes."""
    psi = np.asarray(psi, dtype=complex)
    dim = psi.shape[0]
    vals, vecs = _x_eig(dim)
    r = _rotation(dim, w).reshape((dim,) + (1,) * (psi.ndim - 1))
    flat = (r * psi).reshape(dim, -1)
    coeffs = f(vals)[:, None] * (vecs.T @ flat)
    return r.conj() * (vecs @ coeffs).reshape(psi.shape)


def apply_fx(f, psi: np.ndarray) -> np.ndarray:
    return apply_f_quadrature(f, 1.0, psi)


def apply_fp(f, psi: np.ndarray) -> np.ndarray:
    return apply_f_quadrature(f, -1j, psi)


def displacement_quadrature(amp: complex) -> tuple[float, complex]:
    """``(rho, w)`` with ``D(amp) = exp(-i sqrt2 rho x_w)``."""
    amp = complex(amp)
    rho = abs(amp)
    return rho, (-1j * amp.conjugate() / rho if rho else 1.0)


def apply_displacement(amp: complex, psi: np.ndarray) -> np.ndarray:
    """``D(amp) @ psi`` without forming the matrix (psi may hold columns)."""
    psi = np.asarray(psi, dtype=complex)
    rho, w = displacement_quadrature(amp)
    if rho == 0:
        return psi.copy()
    return apply_f_quadrature(lambda lam: np.exp(-1j * math.sqrt(2) * rho * lam), w, psi)


def _squeeze_blocks(dim: int, r: float):
    for idx, vals, vecs, phase in _squeeze_eig(dim):
        yield idx, vecs, np.exp(-1j * r * vals), phase


def squeeze(dim: int, z: complex) -> np.ndarray:
    """``S(z)``; for real ``z = r`` this squeezes ``x`` by ``e^{-r}``."""
    dim = _check_dim(dim)
    z = complex(z)
    out = np.zeros((dim, dim), dtype=complex)
    r = abs(z)
    for idx, vecs, ev, phase in _squeeze_blocks(dim, r):
        blk = (vecs * ev) @ vecs.T
        out[np.ix_(idx, idx)] = phase[:, None] * blk * phase.conj()[None, :]
    if z.imag != 0 or z.real < 0:
        rot = _rotation(dim, np.exp(-0.5j * np.angle(z)))
        out = rot.conj()[:, None] * out * rot[None, :]
    return out


def apply_squeeze(r: float, psi: np.ndarray) -> np.ndarray:
    """``S(r) @ psi`` for real ``r`` without forming the matrix."""
    psi = np.asarray(psi, dtype=complex)
    dim = psi.shape[0]
    out = np.zeros_like(psi)
    for idx, vecs, ev, phase in _squeeze_blocks(dim, float(r)):
        blk = psi[idx]
        ph = phase[:, None] if psi.ndim == 2 else phase
        ew = ev[:, None] if psi.ndim == 2 else ev
        out[idx] = ph * (vecs @ (ew * (vecs.T @ (ph.conj() * blk))))
    return out


def envelope(dim: int, delta: float) -> np.ndarray:
    """``E = exp(-delta^2 p^2 / 2)``: Hermitian, positive, not unitary."""
    if delta < 0:
        raise ValueError("delta must be >= 0")
    return fp(dim, lambda lam: np.exp(-0.5 * delta**2 * lam**2))


def envelope_inverse(dim: int, delta: float) -> np.ndarray:
    vals, _ = _x_eig(_check_dim(dim))
    worst = 0.5 * delta**2 * float(np.max(vals**2))
    if worst > ENVELOPE_EXPONENT_LIMIT:
        raise EnvelopeOverflowError(
            f"inverse envelope needs exp({worst:.1f}); reduce the truncation below {dim}"
        )
    return fp(dim, lambda lam: np.exp(0.5 * delta**2 * lam**2))


def wrap(values, m: float):
    """Map reals into (-m/2, m/2] modulo ``m``."""
    if m <= 0:
        raise ValueError("modulus must be positive")
    v = np.asarray(values, dtype=float)
    out = np.mod(v + m / 2, m) - m / 2
    # the half-open interval keeps +m/2 and sends -m/2 there
    return np.where(out <= -m / 2, out + m, out)


def modular_position(dim: int, m: float, method: str = "quadrature") -> np.ndarray:
    """Position wrapped into (-m/2, m/2].

    ``quadrature`` integrates the wrapped position against Fock wavefunctions,
    giving the exact matrix elements of the untruncated operator.  ``eig``
    wraps the spectrum of truncated ``x``; it is cheaper but its nodes are too
    coarse to resolve the jump, costing up to ~0.1 in matrix elements.
    """
    if method == "quadrature":
        return modular_position_quadrature(dim, m)
    if method == "eig":
        return fx(dim, lambda lam: wrap(lam, m)).astype(complex)
    raise ValueError(f"unknown method {method!r}")


def modular_position_fourier(dim: int, m: float, terms: int = 200) -> np.ndarray:
    """Sawtooth Fourier series of the modular position.

    Built from ladder-operator exponentials (``scipy.linalg.expm``) so it shares
    no code with :func:`modular_position`.
    """
    a = annihilation(dim)
    x_gen = 1j * (a + a.conj().T)  # i sqrt2 x
    out = np.zeros((dim, dim), dtype=complex)
    for k in range(1, terms + 1):
        # sin(2 pi k x / m) from exp(i t x), t = 2 pi k / m
        t = 2 * math.pi * k / m
        e = scipy.linalg.expm(x_gen * (t / math.sqrt(2)))
        out += ((-1) ** (k + 1) / k) * (e - e.conj().T) / 2j
    return out * (m / math.pi)


# --- code operators ---------------------------------------------------------


def stabilizer_T(dim: int, code: CodeParams, method: str = "factored") -> np.ndarray:
    """Finite-energy stabilizer ``exp((sqrt2 pi/alpha)(i x - delta^2 p))``.

    ``factored`` splits the exponent into commuting-up-to-a-scalar pieces,
    ``exp(icx) exp(-c delta^2 p) exp(-c^2 delta^2/2)``, which is well conditioned.
    ``conjugated`` forms ``E exp(icx) E^-1`` literally and is kept for comparison;
    it loses accuracy quickly as the cutoff grows.
    """
    if code.alpha <= 0:
        raise ValueError("alpha must be positive")
    c = math.sqrt(2) * math.pi / code.alpha
    d2 = code.delta**2
    ex = fx(dim, lambda lam: np.exp(1j * c * lam))
    if method == "factored":
        ep = fp(dim, lambda lam: np.exp(-c * d2 * lam))
        return math.exp(-0.5 * c * c * d2) * (ex @ ep)
    if method == "conjugated":
        return envelope(dim, code.delta) @ ex @ envelope_inverse(dim, code.delta)
    raise ValueError(f"unknown method {method!r}")


def _dissipator(dim: int, code: CodeParams, m: float) -> np.ndarray:
    if code.delta <= 0:
        raise ValueError("delta must be positive")
    _, p = quadratures(dim)
    return (modular_position(dim, m) / code.delta + 1j * code.delta * p) / math.sqrt(2)


def dissipator_d(dim: int, code: CodeParams) -> np.ndarray:
    return _dissipator(dim, code, code.modulus)


def dissipator_dprime(dim: int, code: CodeParams) -> np.ndarray:
    return _dissipator(dim, code, code.readout_modulus)


def logical_z_ideal(dim: int, code: CodeParams) -> np.ndarray:
    """``-i D(i pi / (4 alpha))``."""
    return -1j * displacement(dim, 1j * math.pi / (4 * code.alpha))


def logical_z_finite(dim: int, code: CodeParams) -> np.ndarray:
    """Envelope-conjugated logical Z, ``-i exp(ic(x + i delta^2 p))`` with ``c = pi/(2 sqrt2 alpha)``."""
    c = math.pi / (2 * math.sqrt(2) * code.alpha)
    d2 = code.delta**2
    ex = fx(dim, lambda lam: np.exp(1j * c * lam))
    ep = fp(dim, lambda lam: np.exp(-c * d2 * lam))
    return -1j * math.exp(-0.5 * c * c * d2) * (ex @ ep)


# --- position-representation quadrature ---------------------------------------


def hermite_functions(n: int, x: np.ndarray) -> np.ndarray:
    """Position wavefunctions ``psi_k(x)`` of Fock states ``k < n`` (rows), by recurrence.

    The Gaussian factor is carried as a running log-scale so high levels stay
    finite far from the origin.
    """
    x = np.asarray(x, dtype=float)
    out = np.zeros((n, x.size))
    logscale = -0.5 * x**2
    prev = np.zeros_like(x)
    cur = np.full_like(x, math.pi**-0.25)
    out[0] = cur * np.exp(logscale)
    for k in range(1, n):
        prev, cur = cur, math.sqrt(2.0 / k) * x * cur - math.sqrt((k - 1) / k) * prev
        big = np.abs(cur) > 1e100
        if np.any(big):
            s = np.abs(cur[big])
            cur[big] /= s
            prev[big] /= s
            logscale[big] += np.log(s)
        out[k] = cur * np.exp(logscale)
    return out


def position_matrix(n: int, f, breakpoints=(), order: int = 60) -> np.ndarray:
    """``<j| f(x) |k>`` for ``j, k < n`` by piecewise Gauss-Legendre quadrature.

    ``f`` may jump at ``breakpoints``; panels are split there so the integral
    is exact to quadrature precision instead of suffering Gibbs-type error.
    """
    half = math.sqrt(2 * n + 1) + 12.0
    # panels narrow enough that each holds only a few oscillations of psi_j psi_k
    width = min(1.0, 10.0 / math.sqrt(2 * n + 1))
    edges = sorted({-half, half, *[b for b in breakpoints if -half < b < half]})
    nodes, weights = np.polynomial.legendre.leggauss(order)
    xs, ws = [], []
    for lo, hi in zip(edges[:-1], edges[1:]):
        k = max(1, math.ceil((hi - lo) / width))
        a0 = lo + (hi - lo) * np.arange(k) / k
        h = (hi - lo) / k
        xs.append((a0[:, None] + 0.5 * h * (nodes + 1)).ravel())
        ws.append(np.tile(0.5 * h * weights, k))
    x = np.concatenate(xs)
    w = np.concatenate(ws) * f(x)
    out = np.zeros((n, n))
    chunk = max(1000, 4_000_000 // max(n, 1))
    for i in range(0, x.size, chunk):
        psi = hermite_functions(n, x[i:i + chunk])
        out += (psi * w[i:i + chunk]) @ psi.T
    return out


def wrap_breakpoints(m: float, extent: float) -> list[float]:
    """Discontinuities of the wrap into (-m/2, m/2] inside ``[-extent, extent]``."""
    k = math.ceil(extent / m) + 1
    return [(j + 0.5) * m for j in range(-k, k)]


def modular_position_quadrature(n: int, m: float) -> np.ndarray:
    """Modular position on the lowest ``n`` Fock levels, integrated exactly."""
    extent = math.sqrt(2 * n + 1) + 12.0
    return position_matrix(n, lambda x: wrap(x, m), wrap_breakpoints(m, extent)).astype(complex)
