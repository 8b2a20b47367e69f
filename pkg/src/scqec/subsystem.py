"""Logical-times-gauge decomposition of one mode through orthonormalized SDF states.

Basis columns are ordered sign-major, ``(+,0), (+,1), ..., (-,0), (-,1), ...``,
so a decomposed operator is a 2x2 grid of gauge blocks with the logical index
outermost.  In the logical factor the sign basis is the X basis: parity acts
as ``X_L = diag(1, -1)`` and ``Z_L`` swaps the two signs.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import operators as ops
from .operators import CodeParams
from .states import _pad, _sdf_raw, required_dim

DROP_TOL = 1e-8
DEFAULT_GAUGE_LEVELS = 12

X_L = np.diag([1.0, -1.0]).astype(complex)
Z_L = np.array([[0, 1], [1, 0]], dtype=complex)
I_L = np.eye(2, dtype=complex)


@dataclass(frozen=True)
class SdfBasis:
    code: CodeParams
    n_gauge: int
    isometry: np.ndarray
    labels: tuple = ()
    dropped: tuple = field(default=())

    @property
    def dim(self) -> int:
        return self.isometry.shape[0]

    def column(self, sign: int, n: int) -> np.ndarray:
        return self.isometry[:, self.labels.index((sign, n))]

    def index(self, sign: int, n: int) -> int:
        return self.labels.index((sign, n))


def build_sdf_basis(code: CodeParams, n_gauge: int = DEFAULT_GAUGE_LEVELS,
                    dim: int | None = None) -> SdfBasis:
    """Gram-Schmidt the SDF states per parity sector, one reorthogonalization pass."""
    if n_gauge < 1:
        raise ValueError("n_gauge must be >= 1")
    dim = required_dim(code, n_gauge - 1) if dim is None else dim
    if 2 * n_gauge > dim or n_gauge > dim / 4:
        raise ValueError(f"{n_gauge} gauge levels do not fit a {dim}-level cutoff")
    work = dim + _pad(dim)
    cols, labels, dropped = [], [], []
    for sign in (1, -1):
        sector: list[np.ndarray] = []
        for n in range(n_gauge):
            v = _sdf_raw(code, sign, n, work)[:dim]
            v = v / np.linalg.norm(v)
            for _ in range(2):
                for q in sector:
                    v = v - np.vdot(q, v) * q
            nrm = np.linalg.norm(v)
            if nrm < DROP_TOL:
                dropped.append((sign, n))
                continue
            v = v / nrm
            sector.append(v)
            labels.append((sign, n))
        cols.extend(sector)
    iso = np.column_stack(cols)
    iso.setflags(write=False)
    return SdfBasis(code, n_gauge, iso, tuple(labels), tuple(dropped))


def _complete(basis: SdfBasis) -> None:
    if basis.dropped:
        raise ValueError(f"basis has dropped columns {basis.dropped}; block layout is ragged")


def to_subsystem(state: np.ndarray, basis: SdfBasis) -> tuple[np.ndarray, float]:
    """Coefficients ``c[s, n]`` (row 0 is the + sector) and the leaked population."""
    _complete(basis)
    state = np.asarray(state, dtype=complex)
    c = basis.isometry.conj().T @ state
    leak = float(np.vdot(state, state).real - np.vdot(c, c).real)
    return c.reshape(2, basis.n_gauge), min(1.0, max(0.0, leak))


def gauge_populations(state: np.ndarray, basis: SdfBasis) -> np.ndarray:
    """Population of each gauge level summed over the logical index (ket or density matrix)."""
    _complete(basis)
    v = basis.isometry
    state = np.asarray(state, dtype=complex)
    if state.ndim == 1:
        pops = np.abs(v.conj().T @ state) ** 2
    else:
        pops = np.einsum("ij,ik,kj->j", v.conj(), state, v).real
    return pops.reshape(2, basis.n_gauge).sum(axis=0)


def sector_populations(state: np.ndarray, basis: SdfBasis) -> np.ndarray:
    """Population of each (sign, gauge level) pair, shape ``(2, n_gauge)``."""
    _complete(basis)
    v = basis.isometry
    state = np.asarray(state, dtype=complex)
    if state.ndim == 1:
        pops = np.abs(v.conj().T @ state) ** 2
    else:
        pops = np.einsum("ij,ik,kj->j", v.conj(), state, v).real
    return pops.reshape(2, basis.n_gauge)


@dataclass(frozen=True)
class SubsystemOperator:
    matrix: np.ndarray
    n_gauge: int

    def block(self, out_sign: int, in_sign: int) -> np.ndarray:
        i = 0 if out_sign > 0 else 1
        j = 0 if in_sign > 0 else 1
        g = self.n_gauge
        return self.matrix[i * g:(i + 1) * g, j * g:(j + 1) * g]

    def deviation(self, other: np.ndarray, edge: int = 2) -> float:
        """Max entry difference on gauge levels below ``n_gauge - edge`` in every block."""
        keep = self.n_gauge - edge
        a = self.matrix.reshape(2, self.n_gauge, 2, self.n_gauge)[:, :keep, :, :keep]
        b = np.asarray(other).reshape(2, self.n_gauge, 2, self.n_gauge)[:, :keep, :, :keep]
        return float(np.max(np.abs(a - b)))


def decompose_operator(op: np.ndarray, basis: SdfBasis) -> SubsystemOperator:
    _complete(basis)
    v = basis.isometry
    return SubsystemOperator(v.conj().T @ op @ v, basis.n_gauge)


# --- closed forms on the gauge factor ---------------------------------------


def gauge_operators(n_gauge: int) -> dict[str, np.ndarray]:
    a = ops.annihilation(n_gauge)
    x, p = ops.quadratures(n_gauge)
    return {"a": a, "x": x, "p": p, "I": np.eye(n_gauge, dtype=complex)}


def gauge_modular_position(n_gauge: int, m: float) -> np.ndarray:
    return ops.modular_position_quadrature(n_gauge, m)


def expected_annihilation(code: CodeParams, n_gauge: int) -> np.ndarray:
    g = gauge_operators(n_gauge)
    gauge = g["a"] * math.cosh(code.r) - g["a"].conj().T * math.sinh(code.r) + code.alpha * g["I"]
    return np.kron(Z_L, gauge)


def expected_position(code: CodeParams, n_gauge: int) -> np.ndarray:
    g = gauge_operators(n_gauge)
    return np.kron(Z_L, code.delta * g["x"] + math.sqrt(2) * code.alpha * g["I"])


def expected_momentum(code: CodeParams, n_gauge: int) -> np.ndarray:
    g = gauge_operators(n_gauge)
    return np.kron(Z_L, g["p"] / code.delta)


def expected_modular_position(code: CodeParams, n_gauge: int) -> np.ndarray:
    m = math.sqrt(2) * code.alpha_prime
    return np.kron(Z_L, code.delta * gauge_modular_position(n_gauge, m))


def expected_dissipator(code: CodeParams, n_gauge: int) -> np.ndarray:
    return np.kron(Z_L, gauge_operators(n_gauge)["a"])


def expected_parity(n_gauge: int) -> np.ndarray:
    return np.kron(X_L, np.eye(n_gauge))


def logical_observables(basis: SdfBasis) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Fock-space ``X_L`` (parity), ideal ``Z_L`` and envelope-conjugated ``Z_L``."""
    dim, code = basis.dim, basis.code
    return ops.parity(dim), ops.logical_z_ideal(dim, code), ops.logical_z_finite(dim, code)
