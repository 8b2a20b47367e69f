import math

import numpy as np
import pytest

from scqec import operators as ops
from scqec.dynamics import Channel, ket_to_dm
from scqec.operators import CodeParams
from scqec.qec import (KET0, PAULI, circuit_kraus, circuit_unitary, cd, cd_gate, cycle_branches,
                       qec_cycle, qec_repeat, rx_gate, single_cycle_transfer, st_circuit_channel,
                       st_constants, st_gates, st_kraus, st_rate_estimate, st_unitary,
                       transfer_prediction)
from scqec.states import required_dim, sc_state
from scqec.subsystem import build_sdf_basis, sector_populations
from tests.conftest import random_density


def choi(channel: Channel) -> np.ndarray:
    n = channel.dim
    out = np.zeros((n * n, n * n), dtype=complex)
    for i in range(n):
        for j in range(n):
            e = np.zeros((n, n), dtype=complex)
            e[i, j] = 1
            out[i * n:(i + 1) * n, j * n:(j + 1) * n] = channel.apply(e)
    return out / n


def test_cd_gate_basics():
    dim = 30
    assert np.allclose(cd_gate(dim, 0), np.eye(2 * dim))
    beta = 0.7 - 0.3j
    g = cd_gate(dim, beta)
    assert np.allclose(g.reshape(dim, 2, dim, 2)[:, 0, :, 0], ops.displacement(dim, beta / (2 * math.sqrt(2))))
    assert np.allclose(g @ cd_gate(dim, -beta), np.eye(2 * dim), atol=1e-12)
    # the coupling representation of cd() gives the same gate
    assert np.allclose(circuit_unitary(dim, [cd(beta)]), g, atol=1e-10)


def test_rx_gate():
    assert np.allclose(rx_gate(0), np.eye(2))
    assert np.allclose(rx_gate(math.pi) @ KET0, [0, -1j])
    u = rx_gate(math.pi / 2)
    assert np.allclose(u @ u.conj().T, np.eye(2))


def test_st_unitaries_are_unitary_and_reversed():
    code = CodeParams(2.0, 1.0)
    dim = 50
    for kind in ("sharpen", "trim"):
        u = st_unitary(dim, code, kind)
        assert np.max(np.abs(u.conj().T @ u - np.eye(2 * dim))) <= 1e-10
    assert st_gates(code, "trim") == st_gates(code, "sharpen")[::-1]
    with pytest.raises(ValueError):
        st_gates(code, "polish")


def test_trim_without_envelope_is_pure_x_coupling():
    code = CodeParams(2.0, 60.0)  # delta underflows to zero
    dim = 30
    a, _ = st_constants(code)
    x, _ = ops.quadratures(dim)
    import scipy.linalg
    ref = scipy.linalg.expm(-1j * a * np.kron(x, PAULI["x"]))
    assert np.allclose(st_unitary(dim, code, "trim"), ref, atol=1e-9)


def test_kraus_routes_agree(rng):
    code = CodeParams(1.5, 0.8)
    dim = 40
    for kind in ("sharpen", "trim"):
        u = st_unitary(dim, code, kind)
        ks = st_kraus(dim, code, kind)
        t = u.reshape(dim, 2, dim, 2)
        for j in range(2):
            assert np.allclose(ks[j], t[:, j, :, 0], atol=1e-12)
        psi = rng.normal(size=dim) + 1j * rng.normal(size=dim)
        psi /= np.linalg.norm(psi)
        from scqec.qec import st_branches
        br = st_branches(code, kind, psi)
        for j in range(2):
            assert np.allclose(br[j], ks[j] @ psi, atol=1e-10)


@pytest.mark.parametrize("kind", ["sharpen", "trim"])
def test_text_and_circuit_forms_are_the_same_channel(kind):
    code = CodeParams(1.2, 0.6)
    dim = 24
    a = choi(st_circuit_channel(dim, code, kind, "text"))
    b = choi(st_circuit_channel(dim, code, kind, "circuit"))
    assert np.max(np.abs(a - b)) <= 1e-8


def test_circuit_channels_are_cptp():
    code = CodeParams(2.0, 1.0)
    dim = 45
    for kind in ("sharpen", "trim"):
        for form in ("text", "circuit"):
            assert st_circuit_channel(dim, code, kind, form).trace_defect() <= 1e-10


def test_codewords_are_near_fixed_points():
    code = CodeParams(2.0, 1.0)
    dim = required_dim(code)
    for sign in (1, -1):
        psi = sc_state(code, sign, dim).ket
        out = qec_cycle(dim, code).apply(ket_to_dm(psi))
        assert np.vdot(psi, out @ psi).real >= 1 - 1e-2


def test_fixed_point_error_decreases_with_alpha_prime():
    errs = []
    for ap in (5.0, 6.8, 8.15):
        code = CodeParams.from_alpha_prime(ap, 1.0)
        dim = required_dim(code)
        psi = sc_state(code, 1, dim).ket
        errs.append(1 - np.vdot(psi, qec_cycle(dim, code).apply(ket_to_dm(psi)) @ psi).real)
    assert errs[0] <= 1e-2 and errs[0] > errs[1] > errs[2]


def test_m_zero_is_identity(rng):
    code = CodeParams(2.0, 1.0)
    rho = random_density(rng, 20)
    assert np.array_equal(qec_repeat(20, code, 0).apply(rho), rho)
    with pytest.raises(ValueError):
        qec_repeat(20, code, -1)
    with pytest.raises(ValueError):
        qec_cycle(20, code, order="sideways")


def test_cycle_orders_and_branches(rng):
    code = CodeParams(1.5, 0.8)
    dim = 40
    psi = rng.normal(size=dim) + 1j * rng.normal(size=dim)
    psi /= np.linalg.norm(psi)
    for order in ("sharpen_then_trim", "trim_then_sharpen"):
        ref = qec_cycle(dim, code, order).apply(ket_to_dm(psi))
        br = cycle_branches(code, psi, order)
        assert len(br) == 4
        assert np.allclose(sum(np.outer(b, b.conj()) for b in br), ref, atol=1e-9)


def test_transfer_matches_prediction_at_large_alpha_prime():
    code = CodeParams(3.0, 2.3)
    assert transfer_prediction(code) == pytest.approx(0.0221, abs=1e-4)
    val = single_cycle_transfer(code)
    assert abs(val / transfer_prediction(code) - 1) <= 0.15


def test_transfer_deviates_at_small_alpha_prime():
    code = CodeParams(1.0, 1.3)
    assert code.alpha_prime == pytest.approx(3.7, abs=0.05)
    assert abs(single_cycle_transfer(code) / transfer_prediction(code) - 1) > 0.15


def test_gauge_excitation_removal_flips_logical_sign():
    code = CodeParams.from_alpha_prime(8.0, 1.0)
    basis = build_sdf_basis(code, 6)
    psi = basis.column(1, 1)
    out = sum(np.outer(b, b.conj()) for b in cycle_branches(code, psi))
    pops = sector_populations(out, basis)
    assert pops[1, 0] > 0.1
    assert pops[0, 0] < 1e-3 * pops[1, 0]


def test_rate_estimate():
    exact, approx = st_rate_estimate(CodeParams(2.0, 1.0), 1.0)
    assert exact == pytest.approx(2.07, abs=5e-3)
    assert exact == pytest.approx(math.sinh(1) ** 2 * 4 * math.e**2 / (2 * math.pi**2), rel=1e-12)
    assert st_rate_estimate(CodeParams(2.0, 0.0), 1.0)[0] == 0
    for r in (2.0, 2.5, 3.0):
        e, a = st_rate_estimate(CodeParams(2.0, r), 1.0)
        assert abs(a / e - 1) <= 0.05
    with pytest.raises(ValueError):
        st_rate_estimate(CodeParams(2.0, 1.0), -1.0)


def test_modularity_condition():
    for code in (CodeParams(2.0, 1.0), CodeParams(0.7, 1.5)):
        gdt = math.pi**2 / code.alpha_prime**2
        assert math.sqrt(gdt / 2) * math.sqrt(2) * code.alpha / code.delta == pytest.approx(math.pi, rel=1e-12)
        a, b = st_constants(code)
        assert a * math.sqrt(2) * code.alpha == pytest.approx(math.pi, rel=1e-12)
        assert b == pytest.approx(a * code.delta**2, rel=1e-12)


def test_circuit_kraus_is_complete():
    code = CodeParams(2.0, 1.0)
    ks = circuit_kraus(40, st_gates(code, "sharpen"))
    assert np.max(np.abs(sum(k.conj().T @ k for k in ks) - np.eye(40))) <= 1e-10
