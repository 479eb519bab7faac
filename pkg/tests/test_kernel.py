import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from gsh import hermite, kernel, spaces, weights
from gsh.errors import BoxError, ValidationError
from gsh.fields import CoefficientField


def random_kernel(rng, out_box, in_box):
    shape = (int(np.prod(out_box)), int(np.prod(in_box)))
    return kernel.KernelCoefficients(out_box, in_box, rng.standard_normal(shape) + 1j * rng.standard_normal(shape))


def random_field(rng, box):
    return CoefficientField(rng.standard_normal(box) + 1j * rng.standard_normal(box))


def quadrature_fourier(n, xi):
    """(2 pi)^{-1/2} int H_n(x) e^{-i x xi} dx by the trapezoid rule on [-40, 40]."""
    x = np.linspace(-40, 40, 16001)
    h = x[1] - x[0]
    H = hermite.hermite_eval(n, x)
    return np.array([h * np.sum(H * np.exp(-1j * x * k)) for k in xi]) / math.sqrt(2 * math.pi)


@pytest.mark.parametrize("n", range(9))
def test_fourier_kernel_matches_quadrature(n):
    xi = np.linspace(-5, 5, 21)
    image = kernel.apply_operator(kernel.fourier_kernel((9,)), CoefficientField.unit((9,), n))
    np.testing.assert_allclose(hermite.clenshaw(image.data, xi), quadrature_fourier(n, xi), atol=1e-10)


def test_fourier_fourth_power_is_identity():
    F = kernel.fourier_kernel((5, 6))
    F4 = kernel.compose(F, kernel.compose(F, kernel.compose(F, F)))
    assert np.array_equal(F4.data, np.eye(30))
    F2 = kernel.compose(F, F)
    # F^2 is the parity operator (-1)^nu
    nu = np.add.outer(np.arange(5), np.arange(6)).ravel()
    assert np.array_equal(np.diag(F2.data), (-1.0) ** nu)


def test_heat_semigroup():
    box = (12,)
    lhs = kernel.compose(kernel.heat_kernel(box, 0.3), kernel.heat_kernel(box, 0.5))
    np.testing.assert_allclose(lhs.data, kernel.heat_kernel(box, 0.8).data, rtol=1e-15)


def test_identity_apply():
    a = random_field(np.random.default_rng(0), (4, 3))
    np.testing.assert_array_equal(kernel.apply_operator(kernel.identity_kernel((4, 3)), a).data, a.data)


@given(st.integers(0, 2**31 - 1), st.sampled_from([((5,), (5,)), ((4,), (3, 2)), ((3, 2), (4,)), ((2,), (2, 2))]))
def test_kernel_identity_property(seed, boxes):
    rng = np.random.default_rng(seed)
    t = random_kernel(rng, *boxes)
    res = kernel.verify_kernel_identity(t, random_field(rng, boxes[1]), random_field(rng, boxes[0]), relative=True)
    assert res <= 1e-13


def test_input_smaller_than_box_is_padded():
    rng = np.random.default_rng(1)
    t = random_kernel(rng, (4,), (6,))
    phi = random_field(rng, (3,))
    np.testing.assert_allclose(kernel.apply_operator(t, phi).data, t.data[:, :3] @ phi.data)
    with pytest.raises(BoxError):
        kernel.apply_operator(t, random_field(rng, (7,)))


def test_uniqueness_probe_exact():
    t = random_kernel(np.random.default_rng(2), (3,), (2, 3))
    assert kernel.kernel_uniqueness_probe(t) == 0.0


def test_build_from_bilinear_recovers_matrix():
    t = random_kernel(np.random.default_rng(3), (4,), (3, 2))
    B = kernel.bilinear_from_kernel(t)
    built = kernel.kernel_from_bilinear(B, (4,), (3, 2))
    assert np.array_equal(built.data, t.data)
    threaded = kernel.kernel_from_bilinear(B, (4,), (3, 2), threads=3)
    assert np.array_equal(threaded.data, t.data)


def test_build_from_integral_form():
    # B(psi, phi) = int psi(x) phi(x) dx is the identity kernel
    rule = hermite.gauss_hermite_rule(40)

    def B(psi, phi):
        return np.sum(rule.scaled_weights * hermite.clenshaw(psi.data, rule.nodes) * hermite.clenshaw(phi.data, rule.nodes))

    t = kernel.kernel_from_bilinear(B, (6,), (6,))
    np.testing.assert_allclose(t.data, np.eye(6), atol=1e-13)


def test_serial_evaluator_respected():
    calls = []

    def B(psi, phi):
        calls.append((np.argmax(np.abs(psi.data)), np.argmax(np.abs(phi.data))))
        return 0.0

    B.serial = True
    kernel.kernel_from_bilinear(B, (3,), (2,), threads=4)
    assert calls == [(i, j) for i in range(3) for j in range(2)]


def test_bilinear_failure_reports_entry():
    def B(psi, phi):
        if psi.data[1] == 1 and phi.data[0] == 1:
            raise RuntimeError("boom")
        return 1.0

    with pytest.raises(kernel.BilinearEvaluationError) as info:
        kernel.kernel_from_bilinear(B, (2,), (2,))
    assert info.value.n == (1,) and info.value.k == (0,)


def test_dimension_limits():
    with pytest.raises(ValidationError):
        kernel.tensor(CoefficientField(np.ones((2, 2))), CoefficientField(np.ones((2, 2))))
    with pytest.raises(ValidationError):
        kernel.KernelCoefficients((2,), (2,), np.ones((2, 3)))


def test_rank_one():
    rng = np.random.default_rng(4)
    a, b = random_field(rng, (3,)), random_field(rng, (4,))
    t = kernel.rank_one_kernel(a, b)
    phi = random_field(rng, (4,))
    np.testing.assert_allclose(kernel.apply_operator(t, phi).data, a.data * np.sum(b.data * phi.data))


def test_json_round_trip():
    t = random_kernel(np.random.default_rng(5), (2,), (3, 2))
    back = kernel.KernelCoefficients.from_json(t.to_json())
    assert back.data.tobytes() == t.data.tobytes() and back.in_box == (3, 2)
    with pytest.raises(ValidationError):
        kernel.KernelCoefficients.from_json({**t.to_json(), "l": 2})


def test_growth_check():
    seq = weights.gevrey(1.0)
    assert kernel.kernel_growth_check(kernel.heat_kernel((32,), 0.1), seq, 1.0, 1.0).passes
    env = spaces.envelope(seq, (1.0, 1.0), (32, 32))
    wild = kernel.KernelCoefficients((32,), (32,), np.exp(3 * env))
    assert not kernel.kernel_growth_check(wild, seq, 1.0, 1.0).passes
    edge = kernel.KernelCoefficients((32,), (32,), np.exp(2 * env))
    res = kernel.kernel_growth_check(edge, seq, 1.0, 1.0)
    assert res.passes and res.C == pytest.approx(0.0, abs=1e-12)
