import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from gglopt.core import (
    CovInput,
    DomainError,
    Family,
    PenaltySpec,
    SolverConfig,
    ValidationError,
    objective,
    scale_to_correlation,
    validate_input,
)


def spd(rng, p, n=None):
    n = n or 3 * p
    X = rng.standard_normal((n, p))
    return X.T @ X / n


def test_objective_identity():
    cov = CovInput([np.eye(2)], [10])
    assert objective(cov, PenaltySpec("sgl", 0.1), [np.eye(2)]) == pytest.approx(2.0, abs=1e-14)


def test_objective_hand_evaluated():
    cov = CovInput([np.eye(2)], [10])
    theta = np.array([[1.0, 0.5], [0.5, 1.0]])
    expected = -np.log(0.75) + 2.0 + 1.0 * (2 * 0.5)
    assert expected == pytest.approx(3.28768, abs=1e-5)
    assert objective(cov, PenaltySpec("sgl", 1.0), [theta]) == pytest.approx(expected, rel=1e-14)


def test_objective_ggl_no_offdiagonal():
    cov = CovInput([np.eye(2), np.eye(2)], [10, 10])
    pen = PenaltySpec("ggl", 0.0, 1.0)
    assert objective(cov, pen, [np.eye(2)] * 2) == pytest.approx(4.0, abs=1e-14)


@pytest.mark.parametrize("family,K,p", [
    ("sgl", 1, 3), ("ggl", 1, 3), ("ggl", 2, 4), ("ggl", 3, 5), ("fgl", 1, 3), ("fgl", 2, 4), ("fgl", 3, 5),
])
def test_objective_identity_is_Kp(family, K, p):
    cov = CovInput([np.eye(p)] * K, [10] * K)
    pen = PenaltySpec(family, 0.7, 0.3)
    assert objective(cov, pen, [np.eye(p)] * K) == pytest.approx(K * p, abs=1e-12)


def test_objective_nonpd_names_instance():
    cov = CovInput([np.eye(2), np.eye(2)], [10, 10])
    bad = np.array([[1.0, 2.0], [2.0, 1.0]])
    with pytest.raises(DomainError) as exc:
        objective(cov, PenaltySpec("ggl", 0.1, 0.1), [np.eye(2), bad])
    assert exc.value.index == 1
    assert "k=1" in str(exc.value)


def test_latent_term_zero_when_not_latent():
    rng = np.random.default_rng(3)
    S = spd(rng, 4)
    T = np.linalg.inv(S + 0.1 * np.eye(4))
    cov = CovInput([S], [20])
    a = objective(cov, PenaltySpec("sgl", 0.2), [T])
    b = objective(cov, PenaltySpec("sgl", 0.2), [T], [np.zeros((4, 4))])
    assert a == b


def test_latent_objective_uses_trace():
    rng = np.random.default_rng(4)
    S = spd(rng, 3)
    v = rng.standard_normal(3)
    L = 0.1 * np.outer(v, v)
    T = np.eye(3) * 3
    cov = CovInput([S], [20])
    R = T - L
    expected = -np.linalg.slogdet(R)[1] + np.trace(S @ R) + 0.5 * np.trace(L)
    got = objective(cov, PenaltySpec("sgl", 0.0, latent=True, mu1=0.5), [T], [L])
    assert got == pytest.approx(expected, rel=1e-12)


def test_ggl_single_instance_matches_sgl_with_summed_weight():
    rng = np.random.default_rng(5)
    S = spd(rng, 4)
    T = np.linalg.inv(S + np.eye(4))
    cov = CovInput([S], [20])
    a = objective(cov, PenaltySpec("ggl", 0.3, 0.2), [T])
    b = objective(cov, PenaltySpec("sgl", 0.5), [T])
    assert a == pytest.approx(b, rel=1e-13)


@settings(max_examples=50, deadline=None)
@given(seed=st.integers(0, 2**32 - 1), p=st.integers(2, 6))
def test_objective_permutation_invariant(seed, p):
    rng = np.random.default_rng(seed)
    S1, S2 = spd(rng, p), spd(rng, p)
    T1 = np.linalg.inv(S1 + np.eye(p))
    T2 = np.linalg.inv(S2 + np.eye(p))
    v = rng.standard_normal(p)
    L = 0.01 * np.outer(v, v)
    perm = rng.permutation(p)
    P = np.eye(p)[perm]
    pen = PenaltySpec("fgl", 0.3, 0.2, latent=True, mu1=(0.1, 0.2))
    cov = CovInput([S1, S2], [10, 10])
    pcov = CovInput([P @ S1 @ P.T, P @ S2 @ P.T], [10, 10])
    a = objective(cov, pen, [T1, T2], [L, L])
    b = objective(pcov, pen, [P @ T1 @ P.T, P @ T2 @ P.T], [P @ L @ P.T] * 2)
    assert a == pytest.approx(b, rel=1e-12)


def test_validate_clean():
    assert validate_input(CovInput([np.eye(3)], [100])) == []


def test_validate_asymmetric():
    v = validate_input(CovInput([np.array([[1.0, 2.0], [3.0, 1.0]])], [100]))
    assert [x.kind for x in v] == ["asymmetry"]


def test_validate_dimension_mismatch():
    v = validate_input(CovInput([np.eye(3), np.eye(4)], [10, 10]))
    assert "dimension" in [x.kind for x in v]


def test_validate_sample_counts_and_psd():
    v = validate_input(CovInput([np.diag([1.0, -1.0])], [1]))
    kinds = {x.kind for x in v}
    assert {"samples", "psd"} <= kinds
    v = validate_input(CovInput([np.eye(2)], [10, 10]))
    assert "samples" in {x.kind for x in v}


def test_validate_allows_rank_deficient():
    rng = np.random.default_rng(0)
    X = rng.standard_normal((3, 6))
    S = X.T @ X / 3
    S = (S + S.T) / 2
    assert validate_input(CovInput([S], [3])) == []


def test_penalty_spec_rejects_negative():
    with pytest.raises(ValidationError):
        PenaltySpec("sgl", -1.0)
    with pytest.raises(ValidationError):
        PenaltySpec("ggl", 0.1, -0.1)
    with pytest.raises(ValidationError):
        PenaltySpec("sgl", 0.1, latent=True, mu1=(-1,))


def test_penalty_spec_sgl_needs_single_instance():
    cov = CovInput([np.eye(2), np.eye(2)], [5, 5])
    with pytest.raises(ValidationError):
        PenaltySpec(Family.SGL, 0.1).check_against(cov)


def test_solver_config_invariants():
    with pytest.raises(ValidationError):
        SolverConfig(eps_abs=0)
    with pytest.raises(ValidationError):
        SolverConfig(max_iter=0)


def test_scale_to_correlation_examples():
    R, d = scale_to_correlation(np.diag([4.0, 9.0]))
    np.testing.assert_array_equal(R, np.eye(2))
    np.testing.assert_array_equal(d, [2.0, 3.0])
    C = np.array([[1.0, 0.3], [0.3, 1.0]])
    R, d = scale_to_correlation(C)
    np.testing.assert_array_equal(R, C)
    np.testing.assert_array_equal(d, [1.0, 1.0])


def test_scale_to_correlation_round_trip():
    rng = np.random.default_rng(11)
    for _ in range(20):
        S = spd(rng, 6) * rng.uniform(0.1, 10)
        R, d = scale_to_correlation(S)
        np.testing.assert_allclose(R * np.outer(d, d), S, atol=1e-12, rtol=0)


def test_scale_to_correlation_rejects_bad_diagonal():
    with pytest.raises(ValidationError):
        scale_to_correlation(np.diag([1.0, 0.0]))
