import math

import numpy as np
import pytest
from scipy.special import erfc

from scqec.operators import CodeParams
from scqec.readout import (CIRCUIT_PROTOCOLS, PROTOCOLS, ReadoutConfig, ReadoutResult,
                           calibrated_sign, outcome_minus_probability, perr, readout_gates,
                           scaling_fit, zread_channel, zread_helstrom, zread_homodyne)
from scqec.states import logical_computational, required_dim

CODE = CodeParams(2.0, 1.0)


def test_config_validation():
    with pytest.raises(ValueError):
        ReadoutConfig(CODE, "telepathy")
    with pytest.raises(ValueError):
        zread_channel(ReadoutConfig(CODE, "homodyne"))
    with pytest.raises(ValueError):
        readout_gates(CODE, "homodyne")


def test_result_average_and_clipping():
    assert ReadoutResult(0.5, 0.5).p_err == 0.5
    assert ReadoutResult(-1e-16, 0.2).p_1_given_0 == 0.0


@pytest.mark.parametrize("ap", [2.0, 3.0, 5.0])
def test_naive_closed_form(ap):
    code = CodeParams.from_alpha_prime(ap, 1.0)
    assert perr(ReadoutConfig(code, "naive")).p_err == pytest.approx(
        (1 - math.exp(-math.pi**2 / (32 * ap**2))) / 2, abs=1e-9 + math.exp(-2 * ap**2))


@pytest.mark.parametrize("protocol", CIRCUIT_PROTOCOLS)
def test_circuit_errors_are_symmetric_and_bounded(protocol):
    res = perr(ReadoutConfig(CODE, protocol))
    assert abs(res.p_1_given_0 - res.p_0_given_1) <= 1e-10
    assert 0 <= res.p_err <= 0.5


def test_trim_beats_naive_and_is_small():
    trim = perr(ReadoutConfig(CODE, "trim"))
    assert 0 < trim.p_1_given_0 < 1e-3
    assert trim.p_err < perr(ReadoutConfig(CODE, "naive")).p_err


def test_trim_circuit_matches_text_form():
    dim = required_dim(CODE)
    g1, i1, s1 = readout_gates(CODE, "trim")
    g2, i2, s2 = readout_gates(CODE, "trim_text")
    for bit in (0, 1):
        psi = logical_computational(CODE, bit, dim)
        assert outcome_minus_probability(g1, i1, s1, psi) == pytest.approx(
            outcome_minus_probability(g2, i2, s2, psi), abs=1e-8)


def test_opposite_observable_complements():
    dim = required_dim(CODE)
    gates, init, sign = readout_gates(CODE, "trim")
    psi = logical_computational(CODE, 0, dim)
    p = outcome_minus_probability(gates, init, sign, psi)
    assert outcome_minus_probability(gates, init, -sign, psi) == pytest.approx(1 - p, abs=1e-12)


def test_final_p_factor_does_not_affect_y_measurement():
    dim = required_dim(CODE)
    gates, init, _ = readout_gates(CODE, "sharpen")
    psi = logical_computational(CODE, 0, dim)
    for sign in (1, -1):
        full = outcome_minus_probability(gates, init, sign, psi)
        assert abs(full - outcome_minus_probability(gates[:1], init, sign, psi)) < 1e-12


def test_trim_reduces_to_naive_without_envelope():
    code = CodeParams(2.0, 60.0)
    dim = 40
    psi = logical_computational(CodeParams(2.0, 0.0), 0, dim)
    gt, it, st = readout_gates(code, "trim_text")
    gn, inn, _ = readout_gates(code, "naive")
    # naive couples with -A, so the opposite observable sign lines up the outcomes
    assert outcome_minus_probability(gt, it, st, psi) == pytest.approx(
        outcome_minus_probability(gn, inn, -st, psi), abs=1e-12)


def test_calibrated_signs_are_frozen():
    assert calibrated_sign("trim") == 1
    assert calibrated_sign("naive") == 1
    for p in ("sharpen", "BsB", "sBs"):
        assert calibrated_sign(p) == -1


def test_channel_evaluator_is_deterministic():
    f = zread_channel(ReadoutConfig(CODE, "BsB"))
    psi = logical_computational(CODE, 1, required_dim(CODE))
    assert f(psi) == f(psi) and f(psi) > 0.99


@pytest.mark.parametrize("ap", [0.5, 1.0, 2.0])
def test_homodyne_closed_form(ap):
    code = CodeParams.from_alpha_prime(ap, 1.0)
    val = zread_homodyne(code, codewords="coherent").p_err
    assert val == pytest.approx(0.5 * erfc(math.sqrt(2) * ap), rel=1e-4)
    if ap == 1.0:
        assert val == pytest.approx(0.02275, abs=1e-5)
    if ap == 2.0:
        assert val == pytest.approx(3.2e-5, rel=0.02)
    with pytest.raises(ValueError):
        zread_homodyne(code, codewords="squeezed")


def test_helstrom_is_a_lower_bound():
    h = zread_helstrom(CODE).p_err
    assert h == pytest.approx(0.0, abs=1e-12)
    for p in PROTOCOLS:
        assert h <= perr(ReadoutConfig(CODE, p)).p_err


def test_scaling_fit():
    ap = np.array([3.0, 4.0, 5.0, 6.0, 8.0])
    assert scaling_fit(ap, 0.3 * ap**-6.0) == pytest.approx(-6.0)
    with pytest.raises(ValueError):
        scaling_fit(ap[:4], ap[:4] ** -2)
    with pytest.raises(ValueError):
        scaling_fit(ap, np.full(5, 1e-13))
    with pytest.raises(ValueError):
        scaling_fit(np.full(5, 3.0), np.full(5, 0.1))
