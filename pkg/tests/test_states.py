import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.special import gammaln

from scqec import operators as ops
from scqec.operators import CodeParams
from scqec.states import (TruncationError, coherent, default_wigner_grid, displaced_squeezed,
                          fock, logical_computational, required_dim, sc_state, sdf_state,
                          tail_population, wigner, write_wigner_csv)


def coherent_exact(dim, amp):
    n = np.arange(dim)
    logmag = n * np.log(abs(amp)) - 0.5 * gammaln(n + 1) if amp != 0 else np.where(n == 0, 0.0, -np.inf)
    return np.exp(-abs(amp) ** 2 / 2 + logmag) * np.exp(1j * n * np.angle(amp))


def test_fock_and_coherent():
    assert np.array_equal(fock(5, 2), np.eye(5)[2])
    with pytest.raises(ValueError):
        fock(5, 5)
    assert np.allclose(coherent(60, 1.5 - 0.5j), coherent_exact(60, 1.5 - 0.5j), atol=1e-12)


def test_displaced_squeezed_trivial_case():
    assert np.allclose(displaced_squeezed(CodeParams(0.0, 0.0), 10), fock(10, 0))


def test_displaced_squeezed_moments():
    code = CodeParams(1.5, 0.8)
    psi = displaced_squeezed(code)
    x, _ = ops.quadratures(psi.size)
    mean = np.vdot(psi, x @ psi).real
    var = np.vdot(psi, x @ x @ psi).real - mean**2
    assert mean == pytest.approx(math.sqrt(2) * 1.5, abs=1e-9)
    assert var == pytest.approx(math.exp(-1.6) / 2, abs=1e-9)


def test_displaced_squeezed_overlap():
    code = CodeParams(1.0, 0.0)
    ov = np.vdot(displaced_squeezed(code, 40, 1), displaced_squeezed(code, 40, -1))
    assert ov.real == pytest.approx(math.exp(-2), abs=1e-12)
    code = CodeParams(0.7, 0.5)
    ov = np.vdot(displaced_squeezed(code, sign=1), displaced_squeezed(code, sign=-1))
    assert ov.real == pytest.approx(math.exp(-2 * code.alpha_prime**2), abs=1e-10)


def test_displaced_squeezed_equals_squeezed_frame_order():
    code = CodeParams(1.5, 1.0)
    psi = displaced_squeezed(code)
    alt = ops.squeeze(psi.size, code.r) @ ops.displacement(psi.size, code.alpha_prime) @ fock(psi.size, 0)
    assert abs(np.vdot(psi, alt)) ** 2 > 1 - 1e-9


def test_truncation_guard():
    with pytest.raises(TruncationError):
        displaced_squeezed(CodeParams(2.0, 1.0), 20)
    with pytest.raises(TruncationError):
        coherent(10, 3.0)


def test_required_dim_meets_tail_tolerance():
    for code in (CodeParams(2.0, 1.0), CodeParams(0.69, 1.5), CodeParams(2.3, 1.2)):
        for n in (0, 3):
            dim = required_dim(code, n)
            assert dim >= ops.default_truncation(code)
            sdf_state(code, 1, n, dim)
            sdf_state(code, -1, n, dim)


def test_sc_state_normalization_constant():
    s = sc_state(CodeParams(1.0, 0.0), 1)
    assert s.norm_const == pytest.approx(2 * (1 + math.exp(-2)), abs=1e-10)
    assert s.norm_const == pytest.approx(2.2707, abs=1e-4)
    code = CodeParams(1.0, 0.6)
    for sign in (1, -1):
        nc = sc_state(code, sign).norm_const
        assert nc == pytest.approx(2 * (1 + sign * math.exp(-2 * code.alpha_prime**2)), abs=1e-10)


def test_sc_state_orthogonality_and_parity():
    code = CodeParams(2.0, 1.0)
    plus, minus = sc_state(code, 1).ket, sc_state(code, -1).ket
    assert abs(np.vdot(plus, minus)) < 1e-14
    par = ops.parity(plus.size)
    assert np.allclose(par @ plus, plus, atol=1e-10)
    assert np.allclose(par @ minus, -minus, atol=1e-10)


def test_sc_state_reduces_to_cat_without_squeezing():
    alpha = 1.3
    dim = 50
    cat = coherent_exact(dim, alpha) + coherent_exact(dim, -alpha)
    cat /= np.linalg.norm(cat)
    assert np.allclose(sc_state(CodeParams(alpha, 0.0), 1, dim).ket, cat, atol=1e-12)


def test_sc_state_vanishing_odd_norm():
    with pytest.raises(ValueError):
        sc_state(CodeParams(1e-7, 0.0), -1, 20)


def test_sdf_level_zero_is_sc_state():
    code = CodeParams(2.0, 1.0)
    dim = required_dim(code, 2)
    assert np.allclose(sdf_state(code, 1, 0, dim).ket, sc_state(code, 1, dim).ket)


@settings(max_examples=10)
@given(st.integers(0, 4), st.integers(0, 4), st.sampled_from([1, -1]))
def test_sdf_parity_and_cross_sector_orthogonality(n, m, sign):
    code = CodeParams(2.0, 1.0)
    dim = required_dim(code, 4)
    a = sdf_state(code, sign, n, dim).ket
    b = sdf_state(code, -sign, m, dim).ket
    assert abs(np.vdot(a, b)) < 1e-12
    assert np.allclose(ops.parity(dim) @ a, sign * a, atol=1e-10)


def test_sdf_same_sector_overlap_is_tiny():
    code = CodeParams.from_alpha_prime(3.0, 1.0)
    dim = required_dim(code, 2)
    ov = np.vdot(sdf_state(code, 1, 0, dim).ket, sdf_state(code, 1, 2, dim).ket)
    assert abs(ov) <= 1e-6


def test_sdf_invalid_arguments():
    code = CodeParams(2.0, 1.0)
    with pytest.raises(ValueError):
        sdf_state(code, 0, 0)
    with pytest.raises(ValueError):
        sdf_state(code, 1, -1)


def test_logical_computational_states():
    code = CodeParams.from_alpha_prime(3.0, 1.0)
    dim = required_dim(code)
    zero, one = logical_computational(code, 0, dim), logical_computational(code, 1, dim)
    assert abs(np.vdot(zero, one)) < 1e-14
    assert abs(np.vdot(zero, displaced_squeezed(code, dim, 1))) ** 2 >= 1 - 1e-6
    assert abs(np.vdot(one, displaced_squeezed(code, dim, -1))) ** 2 >= 1 - 1e-6
    assert np.allclose(ops.parity(dim) @ zero, one, atol=1e-10)
    with pytest.raises(ValueError):
        logical_computational(code, 2)


@pytest.mark.parametrize("alpha,delta_p", [(a, d) for a in (0.5, 1.0, 1.5) for d in (0.2, 0.5, 0.75)])
def test_envelope_resqueezes_displaced_squeezed_state(alpha, delta_p):
    r = 0.5
    code = CodeParams(alpha, r)
    r2 = -0.5 * math.log(math.exp(-2 * r) + delta_p**2)
    dim = required_dim(code) + 20
    out = ops.envelope(dim, delta_p) @ displaced_squeezed(code, dim)
    out /= np.linalg.norm(out)
    target = displaced_squeezed(CodeParams(alpha, r2), dim)
    assert abs(np.vdot(target, out)) ** 2 >= 1 - 1e-8


def test_envelope_maps_highly_squeezed_cat_to_finite_squeezing():
    alpha, r0, delta = 1.5, 3.0, math.exp(-1)
    base = CodeParams(alpha, r0)
    dim = required_dim(base)
    out = ops.envelope(dim, delta) @ sc_state(base, 1, dim).ket
    out /= np.linalg.norm(out)
    r2 = -0.5 * math.log(math.exp(-2 * r0) + delta**2)
    assert abs(np.vdot(sc_state(CodeParams(alpha, r2), 1, dim).ket, out)) ** 2 >= 1 - 1e-8


@settings(max_examples=15)
@given(st.floats(0.0, 2 * math.pi / 2.0))
def test_translational_overlap_formula(xi):
    code = CodeParams(2.0, 1.0)
    dim = required_dim(code)
    d = ops.apply_displacement(1j * xi, np.concatenate([sc_state(code, 1, dim).ket, np.zeros(60)]))
    val = np.vdot(sc_state(code, 1, dim).ket, d[:dim])
    expected = math.exp(-0.5 * math.exp(-2) * xi**2) * math.cos(2 * 2.0 * xi)
    assert abs(val - expected) <= 1e-6


# --- Wigner function ----------------------------------------------------------------------


def test_wigner_of_vacuum_and_squeezed_vacuum():
    grid = np.linspace(-3, 3, 13)
    w = wigner(fock(30, 0), grid, grid)
    xx, pp = np.meshgrid(grid, grid)
    assert np.allclose(w, np.exp(-xx**2 - pp**2) / math.pi, atol=1e-10)
    r = 0.6
    psi = displaced_squeezed(CodeParams(0.0, r), 60)
    w = wigner(psi, grid, grid)
    assert np.allclose(w, np.exp(-xx**2 * math.exp(2 * r) - pp**2 * math.exp(-2 * r)) / math.pi, atol=1e-9)


def test_wigner_of_squeezed_cat():
    code = CodeParams(2.0, 1.0)
    psi = sc_state(code, 1).ket
    grid = default_wigner_grid(code, 81)
    w = wigner(psi, grid, grid)
    h = grid[1] - grid[0]
    assert w.sum() * h * h == pytest.approx(1.0, abs=1e-3)
    assert w.min() < -0.05
    row = w[np.argmin(np.abs(grid))]
    for side in (grid > 1, grid < -1):
        peak = grid[side][np.argmax(row[side])]
        assert abs(abs(peak) - math.sqrt(2) * 2) <= 2 * h


def test_wigner_ket_and_density_matrix_agree():
    code = CodeParams(1.0, 0.5)
    psi = sc_state(code, -1).ket
    grid = np.linspace(-2, 2, 7)
    assert np.allclose(wigner(psi, grid, grid), wigner(np.outer(psi, psi.conj()), grid, grid), atol=1e-12)


def test_default_grid_and_csv(tmp_path):
    code = CodeParams(2.0, 1.0)
    grid = default_wigner_grid(code)
    assert grid.size == 161 and grid[-1] == pytest.approx(math.sqrt(2) * 2 + 4)
    w = np.arange(6.0).reshape(2, 3)
    path = tmp_path / "w.csv"
    write_wigner_csv(path, np.array([0, 1, 2.0]), np.array([0, 1.0]), w)
    lines = path.read_text().splitlines()
    assert lines[0].startswith("#") and lines[1].startswith("#") and not lines[2].startswith("#")
    assert np.allclose(np.loadtxt(path, delimiter=","), w)


def test_tail_population():
    v = np.array([0.6, 0.8, 0.0])
    assert tail_population(v, 1) == pytest.approx(0.64)
