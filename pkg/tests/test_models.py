import math
from fractions import Fraction

import numpy as np
import pytest

from localchaos.models import (
    COLLISION_GUARD,
    DomainError,
    ModelKind,
    ModelSpec,
    PhaseState,
    ThreeBodyParams,
    ToyParams,
    evaluate_potential,
    total_energy,
    toy_matrix,
)

PI2 = math.pi**2

MODELS = {
    "toda": ModelSpec.toda(),
    "harmonic": ModelSpec.harmonic(),
    "kepler": ModelSpec.kepler(),
    "kepler_light": ModelSpec.kepler(3.0e-6),
    "threebody": ModelSpec.three_body(),
    "threebody_heavy": ModelSpec.three_body(m_e=1.0, m_j=0.01, r_j=3.0),
}


def random_points(name, n=100, seed=0):
    rng = np.random.default_rng(seed)
    if name in ("toda", "harmonic"):
        return rng.uniform(-0.8, 0.8, size=(n, 2))
    r = rng.uniform(0.3, 2.0, n)
    phi = rng.uniform(0, 2 * np.pi, n)
    return np.stack([r * np.cos(phi), r * np.sin(phi)], axis=1)


def fd_gradient(model, q, t, h):
    g = np.empty(2)
    for i in range(2):
        e = np.zeros(2)
        e[i] = h
        g[i] = (evaluate_potential(model, q + e, t)[0] - evaluate_potential(model, q - e, t)[0]) / (2 * h)
    return g


def fd_hessian(model, q, t, h):
    H = np.empty((2, 2))
    for j in range(2):
        e = np.zeros(2)
        e[j] = h
        H[:, j] = (evaluate_potential(model, q + e, t)[1] - evaluate_potential(model, q - e, t)[1]) / (2 * h)
    return H


def close_rel(a, b, rel, floor):
    return np.all(np.abs(a - b) <= rel * np.maximum(np.abs(b), floor))


@pytest.mark.parametrize("name", MODELS)
def test_gradient_matches_central_differences(name):
    model = MODELS[name]
    for k, q in enumerate(random_points(name)):
        t = 0.37 * k
        v, g, _ = evaluate_potential(model, q, t)
        scale = max(1.0, np.abs(g).max())
        fd = fd_gradient(model, q, t, 1e-5 * max(1.0, np.linalg.norm(q)))
        assert close_rel(g, fd, 1e-6, scale), (q, g, fd)


@pytest.mark.parametrize("name", MODELS)
def test_hessian_matches_differences_of_gradient(name):
    model = MODELS[name]
    for k, q in enumerate(random_points(name, seed=1)):
        t = 0.37 * k
        _, _, H = evaluate_potential(model, q, t)
        scale = max(1.0, np.abs(H).max())
        fd = fd_hessian(model, q, t, 1e-5 * max(1.0, np.linalg.norm(q)))
        assert close_rel(H, fd, 1e-5, scale), (q, H, fd)


@pytest.mark.parametrize("name", MODELS)
def test_hessian_exactly_symmetric(name):
    for q in random_points(name, 20, seed=2):
        H = evaluate_potential(MODELS[name], q, 1.3)[2]
        assert H[0, 1] == H[1, 0]


def test_toda_at_origin():
    v, g, H = evaluate_potential(ModelSpec.toda(), (0, 0))
    assert v == 0
    np.testing.assert_array_equal(g, [0, 0])
    np.testing.assert_array_equal(H, [[1, 0], [0, 1]])


def test_toda_at_one_one_termwise():
    x = y = Fraction(1)
    terms = [Fraction(1, 2) * (x**2 + y**2), x**2 * y, -Fraction(1, 3) * y**3, Fraction(3, 2) * x**4,
             Fraction(1, 2) * y**4]
    exact = sum(terms)
    assert exact == Fraction(11, 3)
    v, _, _ = evaluate_potential(ModelSpec.toda(), (1, 1))
    assert v == pytest.approx(float(exact), rel=1e-15)


def test_kepler_value_and_gradient():
    model = ModelSpec.kepler(1.0)
    v, g, _ = evaluate_potential(model, (2, 0))
    assert v == pytest.approx(-2 * PI2, rel=1e-15)
    np.testing.assert_allclose(g, [PI2, 0], rtol=1e-15, atol=1e-15)
    np.testing.assert_allclose(fd_gradient(model, np.array([2.0, 0.0]), 0, 1e-5), [PI2, 0], rtol=1e-8, atol=1e-8)


def test_kepler_reduction_from_three_body():
    kepler = ModelSpec.kepler(1.0)
    tb = ModelSpec.three_body(m_e=1.0, m_j=0.0, r_j=5.2)
    for k, q in enumerate(random_points("kepler", 50, seed=4)):
        a = evaluate_potential(kepler, q, 0.1 * k)
        b = evaluate_potential(tb, q, 0.1 * k)
        assert abs(a[0] - b[0]) <= 1e-14 * max(1, abs(a[0]))
        np.testing.assert_allclose(a[1], b[1], rtol=1e-14, atol=0)
        np.testing.assert_allclose(a[2], b[2], rtol=1e-14, atol=0)


def test_three_body_potential_terms():
    m_e, m_j, r_j, w = 1.0, 1e-3, 5.0, 0.5
    model = ModelSpec(ModelKind.THREE_BODY, m_e, ThreeBodyParams(m_e, m_j, r_j, w))
    q, t = np.array([1.0, 0.5]), 2.0
    qj = r_j * np.array([math.cos(w * t), math.sin(w * t)])
    k = 4 * PI2
    expected = (0.5 * m_j * r_j**2 * w**2 - k * m_e / np.linalg.norm(q) - k * m_j / r_j
                - k * m_e * m_j / np.linalg.norm(q - qj))
    assert evaluate_potential(model, q, t)[0] == pytest.approx(expected, rel=1e-14)


def test_collision_guard():
    with pytest.raises(DomainError):
        evaluate_potential(ModelSpec.kepler(), (COLLISION_GUARD / 2, 0))
    tb = ModelSpec.three_body(m_e=1.0, m_j=1e-3, r_j=5.0, omega_j=0.0)
    with pytest.raises(DomainError):
        evaluate_potential(tb, (5.0 + 1e-7, 0.0), 0.0)
    evaluate_potential(ModelSpec.kepler(), (2 * COLLISION_GUARD, 0))


def test_total_energy_examples():
    assert total_energy(ModelSpec.kepler(), PhaseState((1, 0), (0, 2 * math.pi))) == pytest.approx(-2 * PI2, rel=1e-14)
    assert total_energy(ModelSpec.toda(), PhaseState((0, 0), (0.6, 0.2))) == pytest.approx(0.2, abs=1e-15)
    assert total_energy(ModelSpec.harmonic(), PhaseState((0, 0), (0, 0))) == 0.0


def test_toy_matrix_examples():
    p = ToyParams(5.0)
    np.testing.assert_array_equal(toy_matrix(p, 0.0), [[0, 1], [1, 0]])
    np.testing.assert_array_equal(toy_matrix(p, 5.0), [[-1, 1], [1, -1]])
    assert np.linalg.eigvalsh(toy_matrix(p, 5.0))[-1] == pytest.approx(0, abs=1e-15)
    assert np.linalg.eigvalsh(toy_matrix(p, 10.0))[-1] == pytest.approx(-1, abs=1e-15)


def test_toy_spectrum_independent_of_angle():
    for t in np.linspace(0, 15, 31):
        ref = np.linalg.eigvalsh(toy_matrix(ToyParams(5.0, 1.3, 0.0), t))
        for theta in np.linspace(0, 2 * np.pi, 25):
            lam = np.linalg.eigvalsh(toy_matrix(ToyParams(5.0, 1.3, theta), t))
            assert np.max(np.abs(lam - ref)) < 1e-12


@pytest.mark.parametrize(
    "build",
    [
        lambda: ToyParams(0.0),
        lambda: ToyParams(1.0, rho=-1.0),
        lambda: ModelSpec(ModelKind.TODA, mass=0.0),
        lambda: ModelSpec(ModelKind.TOY, 1.0),
        lambda: ModelSpec(ModelKind.TODA, 1.0, ToyParams(1.0)),
        lambda: ThreeBodyParams(1.0, 1e-3, 0.0, 1.0),
        lambda: ThreeBodyParams(1.0, -1e-3, 5.0, 1.0),
        lambda: PhaseState((np.nan, 0), (0, 0)),
        lambda: PhaseState((0, 0, 0), (0, 0)),
    ],
)
def test_invalid_construction(build):
    with pytest.raises(ValueError):
        build()


def test_toy_model_has_no_potential():
    with pytest.raises(ValueError):
        evaluate_potential(ModelSpec.toy(1.0), (0, 0))
