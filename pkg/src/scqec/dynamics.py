"""Open-system dynamics: Lindblad evolution, channels, photon loss and entanglement fidelity."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg
import scipy.sparse.linalg as spla
from scipy.special import gammaln

from .linalg import lindblad_dissipator, spost, spre, unvec, vec

DENSE_LIOUVILLIAN_MAX = 1600  # N**2 at or below which the generator is exponentiated densely
VALIDITY_TOL = 1e-9


class DensityMatrixError(ValueError):
    """Input is not a valid density matrix."""


def check_density(rho: np.ndarray, tol: float = VALIDITY_TOL) -> None:
    rho = np.asarray(rho)
    if rho.ndim != 2 or rho.shape[0] != rho.shape[1]:
        raise DensityMatrixError(f"density matrix must be square, got {rho.shape}")
    herm = float(np.max(np.abs(rho - rho.conj().T)))
    if herm > tol:
        raise DensityMatrixError(f"not Hermitian (defect {herm:.2e})")
    tr = complex(np.trace(rho))
    if abs(tr - 1) > tol:
        raise DensityMatrixError(f"trace is {tr.real:.12f}, expected 1")
    lo = float(np.linalg.eigvalsh(0.5 * (rho + rho.conj().T))[0])
    if lo < -tol:
        raise DensityMatrixError(f"negative eigenvalue {lo:.2e}")


def ket_to_dm(psi: np.ndarray) -> np.ndarray:
    psi = np.asarray(psi, dtype=complex)
    return np.outer(psi, psi.conj())


@dataclass(frozen=True)
class LindbladSpec:
    """``drho/dt = -i[H, rho] + sum_k gamma_k D[c_k](rho)`` with ``D[c] = c rho c^dag - {c^dag c, rho}/2``."""

    hamiltonian: np.ndarray | None = None
    collapse_ops: tuple = field(default=())

    def __post_init__(self):
        for _, rate in self.collapse_ops:
            if rate < 0:
                raise ValueError(f"collapse rates must be >= 0, got {rate}")

    @property
    def dim(self) -> int:
        if self.hamiltonian is not None:
            return self.hamiltonian.shape[0]
        return self.collapse_ops[0][0].shape[0]

    def liouvillian(self) -> np.ndarray:
        """Dense column-stacked generator."""
        n = self.dim
        out = np.zeros((n * n, n * n), dtype=complex)
        if self.hamiltonian is not None:
            h = np.asarray(self.hamiltonian, dtype=complex)
            out += -1j * (spre(h) - spost(h))
        for c, rate in self.collapse_ops:
            out += rate * lindblad_dissipator(np.asarray(c, dtype=complex))
        return out

    def apply(self, rho: np.ndarray) -> np.ndarray:
        """The generator acting on a matrix, in O(N^3) without forming it."""
        out = np.zeros_like(rho, dtype=complex)
        if self.hamiltonian is not None:
            h = self.hamiltonian
            out += -1j * (h @ rho - rho @ h)
        for c, rate in self.collapse_ops:
            cd = c.conj().T
            cdc = cd @ c
            out += rate * (c @ rho @ cd - 0.5 * (cdc @ rho + rho @ cdc))
        return out

    def apply_adjoint(self, x: np.ndarray) -> np.ndarray:
        """Heisenberg-picture generator (Hilbert-Schmidt adjoint of :meth:`apply`)."""
        out = np.zeros_like(x, dtype=complex)
        if self.hamiltonian is not None:
            h = self.hamiltonian
            out += 1j * (h @ x - x @ h)
        for c, rate in self.collapse_ops:
            cd = c.conj().T
            cdc = cd @ c
            out += rate * (cd @ x @ c - 0.5 * (cdc @ x + x @ cdc))
        return out

    def trace(self) -> float:
        # trace of the superoperator; a hint for expm_multiply
        n = self.dim
        tot = 0.0
        for c, rate in self.collapse_ops:
            tot += rate * (abs(np.trace(c)) ** 2 - n * np.trace(c.conj().T @ c).real)
        return tot


def evolve_lindblad(rho: np.ndarray, spec: LindbladSpec, duration: float,
                    check: bool = True) -> np.ndarray:
    """Exact Lindblad propagation for ``duration`` (no time stepping).

    Small spaces exponentiate the dense generator; larger ones use a Krylov-type
    action of the exponential on ``vec(rho)`` with the generator applied matrix-free.
    """
    if duration < 0:
        raise ValueError("duration must be >= 0")
    rho = np.asarray(rho, dtype=complex)
    if rho.shape != (spec.dim, spec.dim):
        raise ValueError(f"rho has shape {rho.shape}, generator acts on dimension {spec.dim}")
    if check:
        check_density(rho)
    if duration == 0:
        return rho.copy()
    n = spec.dim
    if n * n <= DENSE_LIOUVILLIAN_MAX:
        out = unvec(scipy.linalg.expm(duration * spec.liouvillian()) @ vec(rho), n)
    else:
        op = spla.LinearOperator(
            (n * n, n * n),
            matvec=lambda v: duration * vec(spec.apply(unvec(v, n))),
            rmatvec=lambda v: duration * vec(spec.apply_adjoint(unvec(v, n))),
            dtype=complex,
        )
        out = unvec(spla.expm_multiply(op, vec(rho), traceA=duration * spec.trace()), n)
    out = 0.5 * (out + out.conj().T)
    if check:
        check_density(out, tol=1e-7)
    return out


class Channel:
    """A CPTP map held as an ordered list of stages (Kraus sets or superoperators).

    Composition is lazy: ``a.then(b)`` applies ``a`` first and keeps both
    stage lists, so long products never multiply out their Kraus sets.
    """

    def __init__(self, stages, dim: int):
        self.stages = tuple(stages)
        self.dim = int(dim)

    @classmethod
    def from_kraus(cls, kraus) -> "Channel":
        kraus = tuple(np.asarray(k, dtype=complex) for k in kraus)
        return cls((("kraus", kraus),), kraus[0].shape[1])

    @classmethod
    def from_superop(cls, superop: np.ndarray) -> "Channel":
        n = int(round(math.sqrt(superop.shape[0])))
        return cls((("superop", np.asarray(superop, dtype=complex)),), n)

    @classmethod
    def identity(cls, dim: int) -> "Channel":
        return cls((), dim)

    def then(self, other: "Channel") -> "Channel":
        if other.dim != self.dim:
            raise ValueError(f"cannot compose channels on dimensions {self.dim} and {other.dim}")
        return Channel(self.stages + other.stages, self.dim)

    def power(self, m: int) -> "Channel":
        if m < 0:
            raise ValueError("m must be >= 0")
        return Channel(self.stages * m, self.dim)

    def apply(self, rho: np.ndarray) -> np.ndarray:
        out = np.asarray(rho, dtype=complex)
        for kind, data in self.stages:
            if kind == "kraus":
                out = sum(k @ out @ k.conj().T for k in data)
            else:
                out = unvec(data @ vec(out), self.dim)
        return out

    def __call__(self, rho: np.ndarray) -> np.ndarray:
        return self.apply(rho)

    def superop(self) -> np.ndarray:
        n = self.dim
        out = np.eye(n * n, dtype=complex)
        for kind, data in self.stages:
            s = sum(np.kron(k.conj(), k) for k in data) if kind == "kraus" else data
            out = s @ out
        return out

    def kraus(self, limit: int = 4096) -> list[np.ndarray]:
        """Multiply out the Kraus sets (the count grows as a product over stages)."""
        ks = [np.eye(self.dim, dtype=complex)]
        for kind, data in self.stages:
            if kind != "kraus":
                raise ValueError("channel contains a superoperator stage")
            if len(ks) * len(data) > limit:
                raise ValueError(f"more than {limit} Kraus operators")
            ks = [k @ prev for prev in ks for k in data]
        return ks

    def trace_defect(self) -> float:
        """Max deviation of the dual map on the identity from the identity."""
        out = np.eye(self.dim, dtype=complex)
        for kind, data in reversed(self.stages):
            if kind == "kraus":
                out = sum(k.conj().T @ out @ k for k in data)
            else:
                out = unvec(data.conj().T @ vec(out), self.dim)
        return float(np.max(np.abs(out - np.eye(self.dim))))


def photon_loss_kraus(dim: int, kappa_t: float) -> list[np.ndarray]:
    """Amplitude-damping Kraus operators ``K_k = sqrt((1-eta)^k / k!) eta^(n/2) a^k``, ``eta = e^{-kappa t}``.

    This is the exact solution of ``drho/dt = kappa D[a] rho`` over time ``t``.
    """
    if kappa_t < 0:
        raise ValueError("kappa_t must be >= 0")
    if kappa_t == 0:
        return [np.eye(dim, dtype=complex)]
    log_lost = math.log(-math.expm1(-kappa_t))  # log(1 - eta), safe for tiny kappa_t
    n = np.arange(dim)
    out = []
    for k in range(dim):
        cols = n[k:]
        # <n-k| K_k |n> = sqrt(C(n,k) eta^(n-k) (1-eta)^k)
        logw = (gammaln(cols + 1) - gammaln(k + 1) - gammaln(cols - k + 1)
                - (cols - k) * kappa_t + k * log_lost)
        if k > 0 and np.max(logw) < math.log(1e-34):
            break
        kk = np.zeros((dim, dim), dtype=complex)
        kk[cols - k, cols] = np.exp(0.5 * logw)
        out.append(kk)
    return out


def photon_loss_channel(dim: int, kappa_t: float) -> Channel:
    return Channel.from_kraus(photon_loss_kraus(dim, kappa_t))


def ancilla_kraus(unitary: np.ndarray, ancilla_init: np.ndarray) -> list[np.ndarray]:
    """``K_j = (I x <j|) U (I x |init>)`` for a mode-then-qubit unitary."""
    u = np.asarray(unitary, dtype=complex)
    n = u.shape[0] // 2
    init = np.asarray(ancilla_init, dtype=complex)
    t = u.reshape(n, 2, n, 2)
    return [np.einsum("isk,k->is", t[:, j], init) for j in range(2)]


def circuit_to_channel(unitary: np.ndarray, ancilla_init: np.ndarray, reset: bool = True,
                       tol: float = 1e-8) -> Channel:
    """Channel on the mode from a mode-ancilla unitary with a fresh ancilla.

    With ``reset=False`` the ancilla is kept and the channel acts on the joint space.
    """
    u = np.asarray(unitary, dtype=complex)
    defect = float(np.max(np.abs(u.conj().T @ u - np.eye(u.shape[0]))))
    if defect > tol:
        raise ValueError(f"circuit is not unitary (defect {defect:.2e})")
    if not reset:
        return Channel.from_kraus([u])
    return Channel.from_kraus(ancilla_kraus(u, ancilla_init))


def entanglement_fidelity(channel: Channel, codewords) -> float:
    """``sqrt(<Phi| (E x I)(|Phi><Phi|) |Phi>)`` with ``|Phi>`` maximally entangling the code with a qubit.

    ``codewords`` is an orthonormal pair spanning the code space; the result
    does not depend on which pair is chosen.
    """
    s = [np.asarray(c, dtype=complex) for c in codewords]
    blocks = {key: channel.apply(m) for key, m in codeword_blocks(s).items()}
    return fidelity_from_blocks(blocks, s)


def codeword_blocks(codewords) -> dict:
    """The operators ``|s_i><s_j|`` (``i <= j``) whose images fix the entanglement fidelity."""
    s = [np.asarray(c, dtype=complex) for c in codewords]
    return {(i, j): np.outer(s[i], s[j].conj()) for i in range(2) for j in range(i, 2)}


def fidelity_from_blocks(blocks: dict, codewords) -> float:
    """Entanglement fidelity from the channel images of :func:`codeword_blocks`.

    Lets a sweep over repeated applications update three matrices instead of
    rebuilding the channel for every repetition count.
    """
    s = [np.asarray(c, dtype=complex) for c in codewords]
    total = 0.0
    for (i, j), out in blocks.items():
        term = np.vdot(s[i], out @ s[j])
        total += term.real if i == j else 2 * term.real
    return math.sqrt(max(0.0, total / 4))


def entanglement_fidelity_joint(channel: Channel, codewords) -> float:
    """Same quantity from the explicit mode-reference density matrix (cross-check)."""
    s0, s1 = (np.asarray(c, dtype=complex) for c in codewords)
    phi = (np.kron(s0, [1, 0]) + np.kron(s1, [0, 1])) / math.sqrt(2)
    rho = np.outer(phi, phi.conj())
    for kind, data in channel.stages:
        if kind != "kraus":
            raise ValueError("joint route needs Kraus stages")
        rho = sum(np.kron(k, np.eye(2)) @ rho @ np.kron(k, np.eye(2)).conj().T for k in data)
    return math.sqrt(max(0.0, np.vdot(phi, rho @ phi).real))
