"""Sharpen-trim autonomous error correction.

Circuits are lists of gates on a mode plus one ancilla qubit.  Every gate is
either an ancilla-only unitary or a coupling ``exp(-i c x_w (x) sigma)`` where
``x_w`` is a rotated quadrature (``w = 1`` gives ``x``, ``w = -i`` gives ``p``).
Conditional displacements are couplings to ``sigma_z``.  The same gate list
runs three ways: as a dense unitary, as Kraus operators for a fresh ancilla
that is reset afterwards, and matrix-free on mode-ancilla kets of shape
``(N, 2, ...)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import operators as ops
from .dynamics import Channel
from .operators import CodeParams

PAULI = {
    "x": np.array([[0, 1], [1, 0]], dtype=complex),
    "y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "z": np.array([[1, 0], [0, -1]], dtype=complex),
}
KET0 = np.array([1, 0], dtype=complex)
KET_PLUS = np.array([1, 1], dtype=complex) / math.sqrt(2)
CYCLE_ORDERS = ("sharpen_then_trim", "trim_then_sharpen")


@dataclass(frozen=True)
class Coupling:
    """``exp(-i strength x_w (x) sigma_pauli)``."""

    strength: float
    w: complex
    pauli: str


@dataclass(frozen=True)
class AncillaGate:
    matrix: np.ndarray


def rx_gate(theta: float) -> np.ndarray:
    """``exp(-i theta sigma_x / 2)``."""
    return math.cos(theta / 2) * np.eye(2) - 1j * math.sin(theta / 2) * PAULI["x"]


def cd(beta: complex) -> Coupling:
    """Conditional displacement ``exp((beta a^dag - beta* a) sigma_z / (2 sqrt2))`` as a coupling."""
    rho, w = ops.displacement_quadrature(beta / (2 * math.sqrt(2)))
    return Coupling(math.sqrt(2) * rho, w, "z")


def cd_gate(dim: int, beta: complex) -> np.ndarray:
    """Dense conditional displacement on mode (x) ancilla: ``D(+-beta/(2 sqrt2))`` for ancilla ``|0>``/``|1>``."""
    d_plus = ops.displacement(dim, beta / (2 * math.sqrt(2)))
    d_minus = ops.displacement(dim, -beta / (2 * math.sqrt(2)))
    return np.kron(d_plus, np.diag([1, 0])) + np.kron(d_minus, np.diag([0, 1]))


# --- gate execution ---------------------------------------------------------


def _coupling_blocks(dim: int, g: Coupling):
    c = ops.f_quadrature(dim, lambda lam: np.cos(g.strength * lam), g.w)
    s = ops.f_quadrature(dim, lambda lam: np.sin(g.strength * lam), g.w)
    return c, s


def circuit_unitary(dim: int, gates) -> np.ndarray:
    """Dense ``2N x 2N`` unitary, mode index slowest; first gate acts first."""
    u = np.eye(2 * dim, dtype=complex)
    for g in gates:
        if isinstance(g, AncillaGate):
            m = np.kron(np.eye(dim), g.matrix)
        else:
            c, s = _coupling_blocks(dim, g)
            m = np.kron(c, np.eye(2)) - 1j * np.kron(s, PAULI[g.pauli])
        u = m @ u
    return u


def circuit_kraus(dim: int, gates, ancilla_init=KET0) -> list[np.ndarray]:
    """Kraus operators of the circuit with a fresh ancilla that is traced out.

    Propagates the ancilla-input column of the unitary, which costs a few
    ``N x N`` products per gate instead of ``2N x 2N`` ones.
    """
    init = np.asarray(ancilla_init, dtype=complex)
    col = [init[0] * np.eye(dim, dtype=complex), init[1] * np.eye(dim, dtype=complex)]
    for g in gates:
        if isinstance(g, AncillaGate):
            m = g.matrix
            col = [m[j, 0] * col[0] + m[j, 1] * col[1] for j in range(2)]
        else:
            c, s = _coupling_blocks(dim, g)
            sig = PAULI[g.pauli]
            mixed = [sig[j, 0] * col[0] + sig[j, 1] * col[1] for j in range(2)]
            col = [c @ col[j] - 1j * (s @ mixed[j]) for j in range(2)]
    return col


def apply_circuit(gates, state: np.ndarray) -> np.ndarray:
    """Run the circuit on mode-ancilla amplitudes of shape ``(N, 2, ...)``."""
    out = np.asarray(state, dtype=complex)
    for g in gates:
        if isinstance(g, AncillaGate):
            out = np.einsum("js,ns...->nj...", g.matrix, out)
        else:
            sig = PAULI[g.pauli]
            mixed = np.einsum("js,ns...->nj...", sig, out)
            out = (ops.apply_f_quadrature(lambda lam: np.cos(g.strength * lam), g.w, out)
                   - 1j * ops.apply_f_quadrature(lambda lam: np.sin(g.strength * lam), g.w, mixed))
    return out


# --- sharpen and trim -------------------------------------------------------


def st_constants(code: CodeParams) -> tuple[float, float]:
    """Coupling strengths ``(pi/(sqrt2 alpha), pi delta^2/(sqrt2 alpha))`` of the x and p terms."""
    a = math.pi / (math.sqrt(2) * code.alpha)
    return a, a * code.delta**2


def st_gates(code: CodeParams, kind: str) -> list:
    """Text form: ancilla starts in ``|0>``; sharpen applies the x term first, trim the p term first."""
    a, b = st_constants(code)
    ux = Coupling(a, 1.0, "x")
    up = Coupling(b, -1j, "y")
    if kind == "sharpen":
        return [ux, up]
    if kind == "trim":
        return [up, ux]
    raise ValueError(f"kind must be 'sharpen' or 'trim', got {kind!r}")


def st_circuit_gates(code: CodeParams, kind: str) -> list:
    """Conditional-displacement form; ancilla starts in ``|+>``."""
    big = cd(-1j * math.sqrt(2) * math.pi / code.alpha)
    small = cd(math.sqrt(2) * math.pi * code.delta**2 / code.alpha)
    if kind == "sharpen":
        return [big, AncillaGate(rx_gate(math.pi / 2).conj().T), small]
    if kind == "trim":
        return [small, AncillaGate(rx_gate(math.pi / 2)), big]
    raise ValueError(f"kind must be 'sharpen' or 'trim', got {kind!r}")


def st_unitary(dim: int, code: CodeParams, kind: str) -> np.ndarray:
    return circuit_unitary(dim, st_gates(code, kind))


def st_kraus(dim: int, code: CodeParams, kind: str, form: str = "text") -> list[np.ndarray]:
    if form == "text":
        return circuit_kraus(dim, st_gates(code, kind), KET0)
    if form == "circuit":
        return circuit_kraus(dim, st_circuit_gates(code, kind), KET_PLUS)
    raise ValueError(f"form must be 'text' or 'circuit', got {form!r}")


def st_circuit_channel(dim: int, code: CodeParams, kind: str, form: str = "circuit") -> Channel:
    return Channel.from_kraus(st_kraus(dim, code, kind, form))


def qec_cycle(dim: int, code: CodeParams, order: str = "sharpen_then_trim",
              form: str = "text") -> Channel:
    """One cycle: both circuits in ``order``, each with its own fresh, reset ancilla."""
    if order not in CYCLE_ORDERS:
        raise ValueError(f"order must be one of {CYCLE_ORDERS}")
    first, second = ("sharpen", "trim") if order == "sharpen_then_trim" else ("trim", "sharpen")
    return st_circuit_channel(dim, code, first, form).then(st_circuit_channel(dim, code, second, form))


def qec_repeat(dim: int, code: CodeParams, m: int, order: str = "sharpen_then_trim",
               form: str = "text") -> Channel:
    if m < 0:
        raise ValueError("m must be >= 0")
    if m == 0:
        return Channel.identity(dim)
    return qec_cycle(dim, code, order, form).power(m)


def st_branches(code: CodeParams, kind: str, psi: np.ndarray, form: str = "text") -> list[np.ndarray]:
    """Mode kets ``K_j psi`` for both ancilla outcomes, computed matrix-free."""
    psi = np.asarray(psi, dtype=complex)
    if form == "text":
        gates, init = st_gates(code, kind), KET0
    else:
        gates, init = st_circuit_gates(code, kind), KET_PLUS
    state = psi[:, None] * init[None, :]
    out = apply_circuit(gates, state)
    return [out[:, 0], out[:, 1]]


def cycle_branches(code: CodeParams, psi: np.ndarray, order: str = "sharpen_then_trim") -> list[np.ndarray]:
    """The four unnormalized branches of one cycle applied to a ket."""
    first, second = ("sharpen", "trim") if order == "sharpen_then_trim" else ("trim", "sharpen")
    out = []
    for b in st_branches(code, first, psi):
        out.extend(st_branches(code, second, b))
    return out


def single_cycle_transfer(code: CodeParams, n_gauge: int = 3, order: str = "sharpen_then_trim",
                          dim: int | None = None) -> float:
    """Population moved from ``|+>_L|1>_G`` into ``|->_L|0>_G`` by one cycle."""
    from .subsystem import build_sdf_basis

    basis = build_sdf_basis(code, n_gauge, dim)
    psi = basis.column(1, 1)
    target = basis.column(-1, 0)
    return float(sum(abs(np.vdot(target, b)) ** 2 for b in cycle_branches(code, psi, order)))


def transfer_prediction(code: CodeParams) -> float:
    return 2 * math.pi**2 / code.alpha_prime**2


def st_rate_estimate(code: CodeParams, kappa: float) -> tuple[float, float]:
    """Ratio of the loss-induced gauge excitation rate to one cycle's removal.

    Returns the exact quotient ``kappa sinh^2 r / (2 pi^2 / alpha'^2)`` and its
    large-``r`` form ``alpha'^2 e^{2r} kappa / (8 pi^2)``.
    """
    if kappa < 0:
        raise ValueError("kappa must be >= 0")
    ap2 = code.alpha_prime**2
    exact = kappa * math.sinh(code.r) ** 2 * ap2 / (2 * math.pi**2)
    approx = ap2 * math.exp(2 * code.r) * kappa / (8 * math.pi**2)
    return exact, approx
