import gc
import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from gsh import weights
from gsh.errors import SaturationError, ValidationError

# -- construction ------------------------------------------------------------


def test_gevrey_is_factorial_power():
    seq = weights.gevrey(1.5, p_max=20)
    for p in (0, 1, 5, 20):
        assert seq.log_m[p] == pytest.approx(1.5 * math.log(math.factorial(p)), rel=1e-14, abs=1e-15)


def test_power_log_values():
    seq = weights.power_log(1.0, 1.0, p_max=50)
    assert seq.log_m[0] == 0.0
    # log log p is clamped at 0 until log p exceeds 1
    assert seq.log_m[2] == pytest.approx(2 * math.log(2))
    assert seq.log_m[40] == pytest.approx(40 * math.log(40) + 40 * math.log(math.log(40)))


def test_exp_power_values():
    seq = weights.exp_power(2.0, p_max=10)
    np.testing.assert_allclose(seq.log_m, np.arange(11.0) ** 2)


def test_custom_from_values_and_logs_agree():
    a = weights.make_sequence({"family": "custom", "params": {"values": [1, 2, 8, 48]}})
    b = weights.custom(np.log([1, 2, 8, 48]))
    np.testing.assert_allclose(a.log_m, b.log_m, rtol=1e-15)
    assert a.p_max == 3


@pytest.mark.parametrize(
    "spec",
    [
        {"family": "gevrey", "params": {"alpha": -1}, "p_max": 10},
        {"family": "power_log", "params": {"s": 0.3, "t": 0}, "p_max": 10},
        {"family": "exp_power", "params": {"r": 3}, "p_max": 10},
        {"family": "custom", "params": {"values": [2, 3, 4]}},
        {"family": "custom", "params": {"values": [1, -3, 4]}},
        {"family": "custom", "params": {}},
        {"family": "gevrey", "params": {"alpha": 1}},
        {"family": "nope", "params": {}, "p_max": 10},
    ],
)
def test_invalid_specs_rejected(spec):
    with pytest.raises(ValidationError):
        weights.make_sequence(spec)


def test_spec_round_trip():
    seq = weights.power_log(0.5, 1.0, p_max=30)
    again = weights.make_sequence(seq.to_spec())
    np.testing.assert_array_equal(seq.log_m, again.log_m)


def test_closed_form_queries_past_prefix():
    seq = weights.gevrey(1.0, p_max=10)
    assert seq.log_m_at(np.array([100]))[0] == pytest.approx(math.lgamma(101))
    with pytest.raises(ValidationError):
        weights.custom([0.0, 1.0, 3.0]).log_m_at(np.array([5]))


def test_from_weight_fn_linear_weight():
    # omega(rho) = rho gives log M_p = p log p - p
    seq = weights.from_weight_fn(lambda r: r, p_max=40)
    p = np.arange(1, 41)
    np.testing.assert_allclose(seq.log_m[1:], p * np.log(p) - p, rtol=1e-10, atol=1e-10)


def test_from_weight_fn_scalar_only_callable():
    seq = weights.from_weight_fn(lambda r: math.log1p(r) ** 2, p_max=8)
    assert np.all(np.isfinite(seq.log_m))
    assert weights.check_m1(seq).holds


def test_from_weight_table_sits_on_knots():
    rho = np.geomspace(1, 1e6, 400)
    table = np.c_[rho, np.log(rho) ** 2]
    seq = weights.make_sequence({"family": "from_weight_table", "params": {"table": table.tolist()}, "p_max": 20})
    # continuous Legendre transform of u^2 is p^2/4; knots lose at most (du/2)^2
    p = np.arange(1, 21)
    du = math.log(1e6) / 399
    assert np.all(seq.log_m[1:] <= p**2 / 4 + 1e-12)
    assert np.all(p**2 / 4 - seq.log_m[1:] <= (du / 2) ** 2 + 1e-12)


def test_from_weight_table_saturates_at_the_edge():
    rho = np.geomspace(1, 10, 10)
    with pytest.raises(SaturationError):
        weights.make_sequence({"family": "from_weight_table", "params": {"table": np.c_[rho, rho].tolist()},
                               "p_max": 50})


# -- conditions --------------------------------------------------------------


def test_m1_witness_first_violation():
    rep = weights.check_m1(weights.make_sequence({"family": "custom", "params": {"values": [1, 10, 50, 100]}}))
    assert rep.verdict == "fails"
    assert rep.witness("violating_index") == 1
    assert rep.witness("violating_indices") == [1, 2]


@pytest.mark.parametrize(
    "seq", [weights.gevrey(1.0), weights.gevrey(0.5), weights.power_log(1, 1), weights.exp_power(1.5, 200)]
)
def test_m1_holds_for_closed_forms(seq):
    assert weights.check_m1(seq).holds


def test_m2_gevrey_constants():
    rep = weights.check_m2(weights.gevrey(1.0, p_max=2000))
    assert rep.holds
    # p! <= 2^p q! (p-q)!, so H tends to 2 from below
    assert 1.9 < rep.witness("H") <= 2.0 + 1e-12
    assert rep.witness("A") == pytest.approx(1.0)


def test_m2_exp_power_not_confirmed():
    rep = weights.check_m2(weights.exp_power(2.0, p_max=400))
    assert rep.verdict == "inconclusive"


def test_m3_quasi_verdicts():
    g1 = weights.check_m3_quasi(weights.gevrey(1.0, p_max=10_000))
    assert g1.verdict == "fails"
    assert g1.witness("exponent") == pytest.approx(-1.0, abs=1e-9)
    g2 = weights.check_m3_quasi(weights.gevrey(2.0, p_max=10_000))
    assert g2.holds
    # sum 1/p^2 up to 10^4, frozen oracle: pi^2/6 - 1/10^4 + O(10^-8)
    assert g2.witness("partial_sum") == pytest.approx(math.pi**2 / 6 - 1e-4, abs=1e-7)


def test_m3_roumieu_sqrt_factorial_table():
    p = np.arange(401)
    seq = weights.custom(0.5 * p * np.log(np.maximum(p, 1)))
    rep = weights.check_m3_nontrivial(seq, "roumieu")
    assert rep.holds
    assert rep.witness("C") == pytest.approx(1.0)
    assert rep.witness("L") == pytest.approx(1.0)


@pytest.mark.parametrize(
    "seq, verdict",
    [
        (weights.gevrey(0.5, p_max=10_000), "fails"),
        (weights.gevrey(1.0, p_max=10_000), "holds"),
        (weights.power_log(0.5, 1.0, p_max=10_000), "holds"),
    ],
)
def test_m3_beurling_verdicts(seq, verdict):
    assert weights.check_m3_nontrivial(seq, "beurling").verdict == verdict


def test_m3_gevrey_half_is_roumieu_but_not_beurling():
    seq = weights.gevrey(0.5, p_max=10_000)
    assert weights.check_m3_nontrivial(seq, "roumieu").holds


def test_short_prefix_rejected():
    with pytest.raises(ValidationError):
        weights.check_m3_quasi(weights.gevrey(1.0, p_max=5))


# -- associated function -----------------------------------------------------


def _brute(log_m, rho):
    p = np.arange(len(log_m))
    v = p * math.log(rho) - log_m
    return float(v.max()), int(v.argmax())


def test_gevrey_one_at_e():
    # candidates p - log p!: 1, 2 - log 2, 3 - log 6, ...
    val = weights.associated_fn(weights.gevrey(1.0), math.e)
    assert val.value == pytest.approx(2 - math.log(2), rel=1e-14)
    assert val.p_star == 2
    assert val.value == pytest.approx(1.30685, abs=1e-5)


def test_power_log_at_e():
    val = weights.associated_fn(weights.power_log(1.0, 0.0), math.e)
    assert val.value == pytest.approx(1.0, rel=1e-14)
    assert val.p_star == 1


def test_rho_zero_and_small():
    seq = weights.gevrey(1.0)
    assert weights.associated_fn(seq, 0.0).value == 0.0
    assert weights.associated_fn(seq, 0.5).value == 0.0
    with pytest.raises(ValidationError):
        weights.associated_fn(seq, -1.0)


def test_power_log_t0_exact_asymptotic():
    # M(rho) = (s/e) rho^{1/s} up to the integer rounding of p
    seq = weights.power_log(1.0, 0.0, p_max=100)
    val = weights.associated_fn(seq, 1e6, p_cap=10**12)
    assert val.value == pytest.approx(1e6 / math.e, rel=1e-6)
    assert not val.saturated


families = st.sampled_from(
    [weights.gevrey(1.0, 400), weights.gevrey(2.5, 400), weights.power_log(1.0, 1.0, 400),
     weights.power_log(0.5, 1.0, 400), weights.exp_power(1.5, 400)]
)


@given(families, st.floats(-3, 12))
def test_scan_equals_bruteforce(seq, log10_rho):
    rho = 10.0**log10_rho
    fast = weights.associated_fn(seq, rho, p_cap=400)
    slow = weights.associated_fn_bruteforce(seq, rho, p_cap=400)
    assert fast == slow
    assert fast.value == pytest.approx(_brute(seq.log_m, rho)[0], rel=1e-12, abs=1e-12)


@given(families, st.floats(0, 3), st.floats(0.01, 2))
def test_associated_monotone_and_log_convex(seq, log10_rho, step):
    rho = 10.0**log10_rho
    u = math.log(rho)
    m = [weights.associated_fn(seq, math.exp(u + k * step), p_cap=400).value for k in range(3)]
    assert m[0] <= m[1] + 1e-12 <= m[2] + 2e-12
    assert m[1] <= 0.5 * (m[0] + m[2]) + 1e-9


def test_saturation_reported():
    val = weights.associated_fn(weights.custom(np.log([1, 1, 2, 6])), 100.0)
    assert val.saturated and val.p_star == 3


def test_full_scan_for_non_convex():
    seq = weights.make_sequence({"family": "custom", "params": {"values": [1, 10, 50, 100]}})
    for rho in (1.0, 5.0, 20.0):
        assert weights.associated_fn(seq, rho, full_scan=True).value == pytest.approx(_brute(seq.log_m, rho)[0])


def test_table_memo_shared_and_weak():
    seq = weights.gevrey(1.0, p_max=50)
    tab = weights.table_for(seq)
    assert weights.table_for(seq) is tab
    tab(3.0)
    assert 3.0 in tab.entries
    n_before = len(weights._TABLES)
    del seq, tab
    gc.collect()
    assert len(weights._TABLES) <= n_before - 1


def test_log_weight_sums_axes():
    seq = weights.gevrey(1.0)
    expected = weights.associated_fn(seq, 2 * math.sqrt(3)).value + weights.associated_fn(seq, 0.5 * 2).value
    assert weights.log_weight(seq, (2.0, 0.5), (3, 4)) == pytest.approx(expected)


def test_log_weight_saturation_raises():
    with pytest.raises(SaturationError):
        weights.log_weight(weights.gevrey(1.0), (10.0,), (10_000,), p_cap=10)


@pytest.mark.parametrize("rho", [1e8, 1e12, 1e14])
def test_huge_caps_stay_accurate(rho):
    # far past the prefix the maximizer is found from exact increments
    val = weights.associated_fn(weights.power_log(1.0, 0.0, p_max=100), rho, p_cap=10**18)
    assert val.value == pytest.approx(rho / math.e, rel=1e-9)
    assert not val.saturated


def test_closed_form_cap_is_bounded():
    seq = weights.power_log(0.5, 1.0, p_max=100)
    val = weights.associated_fn(seq, 1e12, p_cap=10**18)
    assert val.saturated and val.p_star <= weights.CLOSED_FORM_P_LIMIT


@given(st.sampled_from([weights.gevrey(1.3, 20), weights.power_log(1.0, 1.0, 20), weights.exp_power(1.7, 20)]),
       st.integers(20, 10**6))
def test_increment_matches_difference(seq, k):
    direct = float(np.diff(seq.log_m_at(np.array([k, k + 1])))[0])
    assert weights._log_m_increment(seq, k) == pytest.approx(direct, rel=1e-9, abs=1e-9)


@pytest.mark.parametrize(
    "s, t, verdict",
    [(1.0, 0.0, "fails"), (1.0, 2.0, "holds"), (1.1, 0.0, "holds"), (0.5, 1.0, "fails"), (1.0, 1.0, "inconclusive")],
)
def test_m3_quasi_log_corrections(s, t, verdict):
    # sum 1/(p^s (log p)^t) converges iff s > 1 or s = 1, t > 1; (1, 1) is the divergent boundary
    rep = weights.check_m3_quasi(weights.power_log(s, t, p_max=10_000))
    assert rep.verdict == verdict
    assert rep.witness("exponent") == pytest.approx(-s, abs=0.01)
    assert rep.witness("log_exponent") == pytest.approx(-t, abs=0.03)
