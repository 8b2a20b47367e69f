"""Logical operations: cat preparation, logical X, Z rotations and two-mode ZZ rotations."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
import scipy.linalg

from . import operators as ops
from .dynamics import Channel, ket_to_dm
from .operators import CodeParams
from .qec import qec_cycle
from .states import required_dim, sc_state

TWO_MODE_MAX_DIM = 4096
TWO_MODE_TAIL_TOL = 1e-6


@dataclass(frozen=True)
class GateSchedule:
    total_angle: float
    n_steps: int
    qec_cycles_per_step: int = 1

    def __post_init__(self):
        if self.n_steps < 1:
            raise ValueError("n_steps must be >= 1")
        if self.qec_cycles_per_step < 0:
            raise ValueError("qec_cycles_per_step must be >= 0")

    @property
    def step_angle(self) -> float:
        return self.total_angle / self.n_steps


def cat_preparation_kraus(dim: int, alpha: float) -> list[np.ndarray]:
    """Kraus operators of the cat-preparation circuit, one per ancilla X outcome.

    The ancilla in ``|+>`` controls ``D(+-alpha)``; outcome ``+`` leaves the even
    cat, outcome ``-`` the odd cat, which is followed by ``D(i pi / (4 alpha))``.
    """
    d_plus = ops.displacement(dim, alpha)
    d_minus = ops.displacement(dim, -alpha)
    k_plus = (d_plus + d_minus) / 2
    k_minus = (d_plus - d_minus) / 2
    if alpha > 0:
        k_minus = ops.displacement(dim, 1j * math.pi / (4 * alpha)) @ k_minus
    return [k_plus, k_minus]


def prepare_cat_circuit(code: CodeParams, dim: int | None = None) -> Channel:
    """Cat-preparation channel; feed it the vacuum."""
    dim = required_dim(code) if dim is None else dim
    return Channel.from_kraus(cat_preparation_kraus(dim, code.alpha))


def prepare_plus(code: CodeParams, m: int, dim: int | None = None) -> Channel:
    """Cat preparation followed by ``m`` correction cycles."""
    if m < 0:
        raise ValueError("m must be >= 0")
    dim = required_dim(code) if dim is None else dim
    ch = prepare_cat_circuit(code, dim)
    return ch.then(qec_cycle(dim, code).power(m)) if m else ch


def logical_x(dim: int) -> np.ndarray:
    """Logical X is the photon-number parity."""
    return ops.parity(dim)


# --- Z rotation -----------------------------------------------------------------


@dataclass
class GateTrace:
    rows: list
    state: np.ndarray


def zrot_protocol(code: CodeParams, schedule: GateSchedule, qec: bool = True,
                  dim: int | None = None, initial: np.ndarray | None = None) -> GateTrace:
    """Rotate about logical Z by repeated ``D(i theta_step/(4 alpha))`` kicks, each followed by correction.

    Starts from ``|sq+>`` unless ``initial`` (a ket or density matrix) is given.
    Each row holds ``(step, accumulated_angle, <X_L>, gauge_pop_1, fidelity_to_target)``;
    the target after angle ``t`` is ``cos(t/2)|sq+> + i sin(t/2)|sq->``, so ``<X_L> = cos t``
    ideally.
    """
    from .subsystem import build_sdf_basis, sector_populations

    dim = required_dim(code, 3) if dim is None else dim
    kick = schedule.step_angle / (4 * code.alpha)
    if abs(kick) * code.delta > 0.2:
        raise ValueError(f"step displacement {kick:.3g} is too large for r={code.r}")
    basis = build_sdf_basis(code, 4, dim)
    plus, minus = basis.column(1, 0), basis.column(-1, 0)
    if initial is None:
        rho = ket_to_dm(plus)
    else:
        initial = np.asarray(initial, dtype=complex)
        rho = ket_to_dm(initial) if initial.ndim == 1 else initial
    d = ops.displacement(dim, 1j * kick)
    cycle = qec_cycle(dim, code).power(schedule.qec_cycles_per_step) if qec else Channel.identity(dim)
    par = ops.parity(dim).diagonal().real
    rows = []

    def record(step, angle):
        target = math.cos(angle / 2) * plus + 1j * math.sin(angle / 2) * minus
        pops = sector_populations(rho, basis)
        rows.append((step, angle, float(np.sum(par * rho.diagonal().real)),
                     float(pops[:, 1].sum()), float(np.vdot(target, rho @ target).real)))

    record(0, 0.0)
    for k in range(1, schedule.n_steps + 1):
        rho = cycle.apply(d @ rho @ d.conj().T)
        record(k, k * schedule.step_angle)
    return GateTrace(rows, rho)


# --- two-mode ZZ rotation --------------------------------------------------------


def two_mode_dim(code: CodeParams, max_dim: int = TWO_MODE_MAX_DIM) -> int:
    """Per-mode cutoff: the closed-form guess, raised until the code states fit to
    ``TWO_MODE_TAIL_TOL``.  Raises if the joint space would exceed ``max_dim``."""
    guess = math.ceil(2.5 * code.nbar + 15)
    dim = max(guess, required_dim(code, 0, TWO_MODE_TAIL_TOL))
    if dim * dim > max_dim:
        raise ValueError(f"two-mode dimension {dim}^2 = {dim * dim} exceeds the cap {max_dim}")
    return dim


def _beamsplitter_blocks(dim: int, angle: float):
    """``exp(-i angle (a1^dag a2 + a1 a2^dag)/2)`` per total-photon-number sector."""
    blocks = []
    for total in range(2 * dim - 1):
        n1 = np.arange(max(0, total - dim + 1), min(total, dim - 1) + 1)
        n2 = total - n1
        if n1.size == 1:
            u = np.ones((1, 1), dtype=complex)
        else:
            off = 0.5 * np.sqrt((n1[:-1] + 1.0) * n2[:-1])
            vals, vecs = scipy.linalg.eigh_tridiagonal(np.zeros(n1.size), off)
            u = (vecs * np.exp(-1j * angle * vals)) @ vecs.T
        blocks.append((n1, n2, u))
    return blocks


def apply_beamsplitter(blocks, psi: np.ndarray) -> np.ndarray:
    """Apply to two-mode amplitudes ``psi[n1, n2, ...]``."""
    out = np.empty_like(psi)
    for n1, n2, u in blocks:
        out[n1, n2] = np.tensordot(u, psi[n1, n2], axes=(1, 0))
    return out


def _compress(kets: np.ndarray, discard: float) -> np.ndarray:
    """Re-express an ensemble ``rho = K K^dag`` (columns of ``K``) with fewer columns.

    Drops the weakest eigen-directions of ``rho`` while their total weight stays
    below ``discard`` times the trace.
    """
    gram = kets.conj().T @ kets
    w, v = np.linalg.eigh(0.5 * (gram + gram.conj().T))
    cut = np.searchsorted(np.cumsum(np.clip(w, 0.0, None)), discard * w.sum(), side="right")
    return kets @ v[:, cut:]


def zz_protocol(code: CodeParams, schedule: GateSchedule, theta: float = 1.0, qec: bool = True,
                dim: int | None = None, max_dim: int = TWO_MODE_MAX_DIM,
                discard: float = 1e-5) -> GateTrace:
    """Two-mode ZZ rotation by a beamsplitter interleaved with correction on both modes.

    ``schedule.total_angle`` is the accumulated ``alpha^2 Theta t``.  The joint
    state is kept as a low-rank ensemble of two-mode kets, recompressed after
    every Kraus stage with at most ``discard`` of the weight dropped.  Each row holds
    ``(step, accumulated_angle, <I x X_L>, gauge_pop_11, fidelity_to_target)``.
    """
    from .subsystem import build_sdf_basis

    dim = two_mode_dim(code, max_dim) if dim is None else dim
    if dim * dim > max_dim:
        raise ValueError(f"two-mode dimension {dim}^2 exceeds the cap {max_dim}")
    basis = build_sdf_basis(code, 3, dim) if 4 * 3 <= dim else None
    plus = sc_state(code, 1, dim, tail_tol=TWO_MODE_TAIL_TOL).ket
    minus = sc_state(code, -1, dim, tail_tol=TWO_MODE_TAIL_TOL).ket
    # theta * dt per step; with theta = 0 the beamsplitter is idle and no angle accrues
    step_angle = schedule.step_angle if theta else 0.0
    blocks = _beamsplitter_blocks(dim, step_angle / code.alpha**2)
    kraus = []
    if qec:
        cyc = qec_cycle(dim, code)
        for _ in range(schedule.qec_cycles_per_step):
            kraus.extend(data for _, data in cyc.stages)
    par = ops.parity(dim).diagonal().real
    g1 = basis.column(1, 1) if basis is not None else None
    g1m = basis.column(-1, 1) if basis is not None else None
    psi = np.einsum("i,j->ij", plus, plus)[:, :, None]
    rows = []

    def record(step, phi):
        flat = psi.reshape(dim * dim, -1)
        x2 = np.einsum("ijk,j->", np.abs(psi) ** 2, par)
        # ideal logical state exp(-i phi Z Z)|++> in the sign basis
        pp, mm = math.cos(phi), -1j * math.sin(phi)
        target = pp * np.kron(plus, plus) + mm * np.kron(minus, minus)
        fid = float(np.sum(np.abs(target.conj() @ flat) ** 2))
        pop11 = 0.0
        if g1 is not None:
            for a in (g1, g1m):
                for b in (g1, g1m):
                    pop11 += float(np.sum(np.abs(np.kron(a, b).conj() @ flat) ** 2))
        rows.append((step, phi, float(x2), pop11, fid))

    record(0, 0.0)
    for k in range(1, schedule.n_steps + 1):
        psi = apply_beamsplitter(blocks, psi)
        for spec in ("ia,abk->ibk", "jb,abk->ajk"):  # mode 1 first, then mode 2
            for stage in kraus:
                psi = np.concatenate([np.einsum(spec, kk, psi) for kk in stage], axis=2)
                psi = _compress(psi.reshape(dim * dim, -1), discard).reshape(dim, dim, -1)
        record(k, k * step_angle)
    return GateTrace(rows, psi)
