import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from gsh import hermite, spaces, weights
from gsh.errors import BoxError, ValidationError
from gsh.fields import CoefficientField

G1 = weights.gevrey(1.0)


def test_weighted_norm_direct():
    a = CoefficientField(np.array([1.0, -2.0, 0.5j]))
    M = [weights.associated_fn(G1, 1.5 * math.sqrt(n)).value for n in range(3)]
    for power in (1.0, 2.0):
        direct = 0.5 * math.log(sum(abs(c) ** 2 * math.exp(power * m) for c, m in zip(a.data, M)))
        assert spaces.weighted_norm(a, G1, 1.5, power) == pytest.approx(direct, rel=1e-14)


def test_weighted_norm_survives_huge_weights():
    # exp(M) overflows for these entries; the log-domain sum does not
    n = 4000
    a = CoefficientField(np.full(n, 1e-300))
    val = spaces.weighted_norm(a, G1, 40.0)
    top = spaces.envelope(G1, 40.0, (n,))[-1]
    assert top > 710  # exp(top) is not representable
    assert math.isfinite(val) and val >= 0.5 * (2 * math.log(1e-300) + top)


def test_weighted_norm_of_zero():
    assert spaces.weighted_norm(CoefficientField.zeros((4,)), G1, 1.0) == -math.inf


def test_envelope_is_axis_sum():
    env = spaces.envelope(G1, (1.0, 2.0), (3, 4))
    for i in range(3):
        for j in range(4):
            assert env[i, j] == pytest.approx(weights.log_weight(G1, (1.0, 2.0), (i, j)), rel=1e-15)


def test_theta_validation():
    with pytest.raises(ValidationError):
        spaces.envelope(G1, (1.0,), (3, 3))
    with pytest.raises(ValidationError):
        spaces.envelope(G1, -1.0, (3,))


def test_growth_check_on_envelope():
    b = CoefficientField(np.exp(spaces.envelope(G1, 1.0, (256,))), "dual")
    at = spaces.growth_check(b, G1, 1.0)
    assert at.passes and at.C == pytest.approx(0.0, abs=1e-12)
    assert spaces.growth_check(b, G1, 1.5).passes
    assert not spaces.growth_check(b, G1, 0.5).passes


def test_growth_gap_masks_zeros():
    b = CoefficientField(np.array([0.0, 1.0, 0.0, 2.0]), "dual")
    gap = spaces.growth_gap(b, G1, 1.0)
    assert gap[0] == -math.inf and gap[2] == -math.inf and np.isfinite(gap[3])


def test_classify_dual_envelope_boundary():
    b = CoefficientField(np.exp(spaces.envelope(G1, 1.0, (256,))), "dual")
    grid = np.geomspace(0.25, 4, 16)
    rep = spaces.classify(b, G1, list(grid))
    assert rep.kind == "dual_roumieu"
    assert rep.theta_star[0] == grid[grid >= 1.0][0]
    assert not rep.member  # roumieu duals need every probed theta to pass
    assert spaces.classify(b, G1, list(grid), mode="beurling").member


def test_classify_finite_expansion_is_everywhere_stable():
    a = CoefficientField(np.r_[np.ones(4), np.zeros(60)])
    rep = spaces.classify(a, G1, [0.5, 1, 2, 8])
    assert all(rep.stable) and rep.member
    assert spaces.classify(a, G1, [0.5, 1, 2, 8], mode="beurling").member
    assert rep.at_boundary  # the largest probed theta is still stable


def test_classify_slowly_decaying_is_not_member():
    n = np.arange(128)
    a = CoefficientField(1.0 / (1.0 + n) ** 2)
    rep = spaces.classify(a, G1, [0.5, 1.0, 2.0])
    assert not any(rep.stable) and rep.theta_star is None and not rep.member


def test_classify_threads_identical():
    n = np.arange(200)
    a = CoefficientField(np.exp(-spaces.envelope(G1, 1.0, (200,))) / np.maximum(n, 1) ** 2)
    grid = list(np.geomspace(0.3, 3, 9))
    assert spaces.classify(a, G1, grid) == spaces.classify(a, G1, grid, threads=4)


def test_classify_validation():
    a = CoefficientField(np.ones(8))
    with pytest.raises(ValidationError):
        spaces.classify(a, G1, [])
    with pytest.raises(ValidationError):
        spaces.classify(a, G1, [1.0], kind="other")
    with pytest.raises(BoxError):
        spaces.classify(CoefficientField(np.ones(1)), G1, [1.0])


@given(st.integers(1, 12), st.integers(1, 12), st.integers(0, 2**31 - 1))
def test_pairing_bilinear_and_symmetric(m, n, seed):
    rng = np.random.default_rng(seed)
    a1, a2 = (CoefficientField(rng.standard_normal(m) + 1j * rng.standard_normal(m)) for _ in range(2))
    b = CoefficientField(rng.standard_normal(n), "dual")
    c = complex(rng.standard_normal(), rng.standard_normal())
    lhs = spaces.parseval_pair(b, a1 + a2 * c)
    rhs = spaces.parseval_pair(b, a1) + c * spaces.parseval_pair(b, a2)
    assert lhs == pytest.approx(rhs, abs=1e-12 * (1 + abs(lhs)))
    assert spaces.parseval_pair(b, a1) == pytest.approx(spaces.parseval_pair(a1, b))


def test_pairing_matches_integral():
    rng = np.random.default_rng(5)
    a = CoefficientField(rng.standard_normal(10))
    b = CoefficientField(rng.standard_normal(14), "dual")
    x, w = np.polynomial.hermite.hermgauss(60)
    integral = np.sum(w * np.exp(x**2) * hermite.clenshaw(a.data, x) * hermite.clenshaw(b.data, x))
    assert spaces.parseval_pair(b, a) == pytest.approx(complex(integral), abs=1e-12)


def test_pairing_dimension_mismatch():
    with pytest.raises(BoxError):
        spaces.parseval_pair(CoefficientField(np.ones(2)), CoefficientField(np.ones((2, 2))))


def test_seminorm_ground_state_closed_forms():
    a = CoefficientField(np.array([1.0]))
    m = 1.7
    res = spaces.seminorm_estimate(a, m, G1, alpha_max=1, beta_max=2, grid=np.linspace(-4, 4, 81))
    c = math.pi**-0.25
    assert res.table["0,0"] == pytest.approx(c, rel=1e-12)
    # |H_0'| peaks at x = 1 with value e^{-1/2} pi^{-1/4}; M_1 = 1
    assert res.table["1,0"] == pytest.approx(m * math.exp(-0.5) * c, rel=1e-10)
    # (1 + x^2) e^{-x^2/2} peaks at x = 1 with value 2 e^{-1/2}; M_2 = 2
    assert res.table["0,2"] == pytest.approx(m**2 / 2 * 2 * math.exp(-0.5) * c, rel=1e-10)
    assert res.value == max(res.table.values())


def test_seminorm_refinement_only_improves():
    rng = np.random.default_rng(2)
    a = CoefficientField(rng.standard_normal(12))
    grid = np.linspace(-6, 6, 31)
    coarse = spaces.seminorm_estimate(a, 1.0, G1, 2, 2, grid, refine=False)
    fine = spaces.seminorm_estimate(a, 1.0, G1, 2, 2, grid, refine=True)
    assert all(fine.table[k] >= coarse.table[k] - 1e-15 for k in coarse.table)


def test_seminorm_validation():
    a = CoefficientField(np.ones(4))
    with pytest.raises(ValidationError):
        spaces.seminorm_estimate(a, 1.0, G1, 1, 3, [0.0])
    with pytest.raises(ValidationError):
        spaces.seminorm_estimate(CoefficientField(np.ones((2, 2))), 1.0, G1, 1, 2, [0.0])
    with pytest.raises(BoxError):
        spaces.seminorm_estimate(a, 1.0, G1, 10, 10, [0.0], max_box=8)
