import math

import numpy as np
import pytest

import sparsagg


def test_version():
    assert sparsagg.__version__ == "0.1.0"


def test_fourier_dictionary_values():
    d = sparsagg.Dictionary.fourier(3)
    x = np.array([[0.7], [0.25], [0.125]])
    v = d.evaluate(x)
    assert v.shape == (3, 3)
    assert v[0, 0] == 1.0
    assert abs(v[1, 1]) < 1e-15
    assert v[2, 2] == pytest.approx(1.0, abs=1e-15)


def test_fourier_gram_kappa_and_validation():
    d = sparsagg.Dictionary.parse("fourier:5")
    psi = sparsagg.population_gram(d)
    assert np.allclose(psi, np.eye(5), atol=1e-6)
    assert sparsagg.kappa(psi) == pytest.approx(1.0, abs=1e-6)
    v = sparsagg.validate_dictionary(d)
    assert v["L"] == pytest.approx(math.sqrt(2.0), abs=1e-6)
    assert v["satisfied"]


def test_kappa_and_coherence_examples():
    psi = np.array([[1.0, 0.3], [0.3, 1.0]])
    assert sparsagg.kappa(psi) == pytest.approx(0.7, abs=1e-14)
    rho, rho_lambda = sparsagg.coherence(psi, [0])
    assert rho_lambda == pytest.approx(0.3)
    assert sparsagg.eta(psi, psi) == 0.0


def test_fit_matches_soft_threshold_on_orthonormal_design():
    rng = np.random.default_rng(0)
    q, _ = np.linalg.qr(rng.standard_normal((64, 8)))
    x = q * 8.0
    y = 2.0 * x[:, 0] + rng.standard_normal(64)
    out = sparsagg.fit(x, y, A=1.0)
    c = x.T @ y / 64.0
    closed = np.sign(c) * np.maximum(np.abs(c) - out["weights"], 0.0)
    assert out["converged"]
    assert np.allclose(out["coefficients"], closed, atol=1e-8)
    assert sparsagg.kkt_residual(x, y, out["weights"], out["coefficients"]) <= 1e-6


def test_fit_zero_response():
    x = np.random.default_rng(1).standard_normal((20, 4))
    out = sparsagg.fit_weights(x, np.zeros(20), np.full(4, 0.1))
    assert np.all(out["coefficients"] == 0.0)
    assert out["objective"] == 0.0


def test_rate_and_bounds():
    assert sparsagg.rate(1.0, 100, 10) == pytest.approx(0.15174, abs=1e-5)
    assert sparsagg.rate(2.0, math.e**2, 5, "logn") == pytest.approx(1.040520, abs=1e-6)
    assert sparsagg.soft_threshold(3.0, 1.0) == 2.0
    l4 = sparsagg.lemma_bound("L4", {"n": 1000, "M": 10, "c0": 1, "L": math.sqrt(2)})
    assert l4 == pytest.approx(20 * math.exp(-1000 / 24), rel=1e-10)
    assert sparsagg.bernstein_bound(0, 1, 1, 1) == 1.0
    assert sparsagg.theorem_rhs("T2.1-risk", r=0.1, m_lambda=4, kappa=0.5) == pytest.approx(0.08)


def test_membership_boundary():
    edge = 1.0 / 45.0
    assert sparsagg.membership(0.0, 1, edge, 0.1)["lambda1"]
    assert not sparsagg.membership(0.0, 1, np.nextafter(edge, 1.0), 0.1)["lambda1"]


def test_oracle():
    assert list(sparsagg.oracle_fourier([3, 1, 0, 0.5], 4, 2)) == [3, 1, 0, 0]
    out = sparsagg.oracle(sparsagg.Dictionary.fourier(9), "fourier:2:3,4:-2,7:1", 3)
    assert out["support"] == [1, 3, 6]
    assert out["residual2"] < 1e-10


def test_generate_is_deterministic():
    x1, y1 = sparsagg.generate("fourier:2:1", 100, 5)
    x2, y2 = sparsagg.generate("fourier:2:1", 100, 5)
    assert x1.shape == (100, 1)
    assert np.array_equal(y1, y2)


def test_errors_raise():
    with pytest.raises(sparsagg.SparsaggError):
        sparsagg.kappa(np.zeros((2, 2)))
    with pytest.raises(sparsagg.SparsaggError):
        sparsagg.lemma_bound("L4", {"n": 10})


def test_run_experiment_reproducible():
    cfg = "preset=fourier-L0k\nn=128,256\nM=9\nk=2\nA=4\nreplicates=30\nseed=1\n"
    a = sparsagg.run_experiment(cfg, threads=1)
    assert a == sparsagg.run_experiment(cfg, threads=2)
    assert a.splitlines()[0].startswith("preset,n,M,k_or_beta,A,rep,seed,risk")
    assert len(a.splitlines()) == 61
