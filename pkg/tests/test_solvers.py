import numpy as np
import pytest

from csradar.bounds import max_guaranteed_sparsity, thm3_bound
from csradar.gabor import build_dictionary
from csradar.scenes import NoiseSpec, awgn, random_scene, scene_error, vectorize
from csradar.solvers import (
    SolverOptions,
    basis_pursuit,
    bpdn_entrywise,
    l0_oracle,
    omp,
    soft_threshold,
)
from csradar.tfcore import alltop_sequence, gaussian_pulse, random_phase_probe


@pytest.fixture(scope="module")
def d47():
    return build_dictionary(alltop_sequence(47))


@pytest.fixture(scope="module")
def d5():
    return build_dictionary(alltop_sequence(5))


def test_soft_threshold_keeps_phase():
    v = np.array([3 * np.exp(1j * 0.7), 0.5j, 0.0, -2.0])
    out = soft_threshold(v, 1.0)
    assert np.allclose(out, [2 * np.exp(1j * 0.7), 0, 0, -1.0])


def test_options_validation():
    with pytest.raises(ValueError):
        SolverOptions(max_iterations=0)
    with pytest.raises(ValueError):
        SolverOptions(abs_tol=0)
    with pytest.raises(ValueError):
        SolverOptions(penalty=-1)


def test_bp_single_atom(d47):
    y = d47.atom((12, 30))
    res = basis_pursuit(d47, y)
    expected = np.zeros(47 * 47, complex)
    expected[12 * 47 + 30] = 1
    assert res.converged
    assert scene_error(res.solution, expected) <= 1e-6


def test_bp_zero_observation(d5):
    res = basis_pursuit(d5, np.zeros(5))
    assert res.converged and res.objective == 0 and not res.solution.any()


def test_bp_dimension_mismatch(d5):
    with pytest.raises(ValueError):
        basis_pursuit(d5, np.zeros(6))


@pytest.mark.parametrize("seed", range(5))
def test_bp_k3_exact(d47, seed):
    s = vectorize(random_scene(47, 3, seed))
    res = basis_pursuit(d47, d47.apply(s))
    assert res.converged
    assert scene_error(res.solution, s) <= 1e-4


@pytest.mark.parametrize("n,k,seed", [(13, 6, 0), (17, 8, 1), (23, 11, 2), (47, 30, 3)])
def test_bp_feasibility_and_optimality_contracts(n, k, seed):
    # above the phase transition: solution differs from s_true but must be feasible and no worse
    d = build_dictionary(alltop_sequence(n))
    s_true = vectorize(random_scene(n, k, seed))
    y = d.apply(s_true)
    opts = SolverOptions()
    res = basis_pursuit(d, y, opts)
    assert res.converged
    resid = np.linalg.norm(d.apply(res.solution) - y)
    assert resid <= opts.abs_tol * np.sqrt(n) + opts.rel_tol * np.linalg.norm(y)
    assert res.objective <= np.sum(np.abs(s_true)) + 1e-6
    assert res.primal_residual <= opts.abs_tol * np.sqrt(n) + opts.rel_tol * np.linalg.norm(y)


def test_bp_matches_independent_conic_solver():
    cp = pytest.importorskip("cvxpy")
    n = 13
    d = build_dictionary(alltop_sequence(n))
    y = d.apply(vectorize(random_scene(n, 6, 0)))
    x = cp.Variable(n * n, complex=True)
    prob = cp.Problem(cp.Minimize(cp.norm1(x)), [d.dense() @ x == y])
    prob.solve(solver=cp.CLARABEL)
    res = basis_pursuit(d, y)
    assert res.converged
    # our solution carries an exact optimality certificate; the conic solver is accurate to ~1e-7
    assert abs(res.objective - prob.value) <= 1e-6 * prob.value
    assert np.linalg.norm(res.solution - x.value) <= 1e-3


def test_bp_non_tight_frame_path():
    # a non-unit dictionary scaled back: exercises the Cholesky route of the frame solve
    d = build_dictionary(random_phase_probe(11, 4))
    s = vectorize(random_scene(11, 1, 2))
    assert basis_pursuit(d, d.apply(s)).converged


def test_bp_reports_nonconvergence(d47):
    s = vectorize(random_scene(47, 20, 0))
    res = basis_pursuit(d47, d47.apply(s), SolverOptions(max_iterations=10))
    assert not res.converged
    assert res.iterations == 10


def test_bp_deterministic(d47):
    y = d47.apply(vectorize(random_scene(47, 12, 4)))
    a = basis_pursuit(d47, y)
    b = basis_pursuit(d47, y)
    assert np.array_equal(a.solution, b.solution) and a.iterations == b.iterations


@pytest.mark.parametrize("seed", range(50))
def test_bp_k1_support_matches_l0_oracle(d5, seed):
    y = d5.apply(vectorize(random_scene(5, 1, seed)))
    assert basis_pursuit(d5, y).support == l0_oracle(d5, y, 1).support


def test_bpdn_eps_zero_equals_bp(d47):
    y = d47.atom(100)
    a = bpdn_entrywise(d47, y, 0.0)
    b = basis_pursuit(d47, y)
    assert np.max(np.abs(a.solution - b.solution)) <= 1e-8


def test_bpdn_large_eps_gives_zero(d47):
    y = d47.apply(vectorize(random_scene(47, 3, 1)))
    res = bpdn_entrywise(d47, y, float(np.max(np.abs(y))) * 1.01)
    assert res.objective == 0 and not res.solution.any()


def test_bpdn_feasible_and_stable(d47):
    s = vectorize(random_scene(47, 2, 9))
    y0 = d47.apply(s)
    e = awgn(y0, NoiseSpec(30.0, 9))
    eps = float(np.max(np.abs(e)))
    opts = SolverOptions()
    res = bpdn_entrywise(d47, y0 + e, eps, opts)
    assert res.converged
    assert np.max(np.abs(d47.apply(res.solution) - y0 - e)) <= eps + opts.abs_tol
    assert res.objective <= np.sum(np.abs(s)) + 1e-6  # s itself is feasible
    assert np.sum(np.abs(res.solution - s)) <= 1.0


def test_bpdn_matches_independent_conic_solver():
    cp = pytest.importorskip("cvxpy")
    n = 13
    d = build_dictionary(alltop_sequence(n))
    s = vectorize(random_scene(n, 3, 5))
    y = d.apply(s) + awgn(d.apply(s), NoiseSpec(20.0, 5))
    eps = 0.05
    x = cp.Variable(n * n, complex=True)
    prob = cp.Problem(cp.Minimize(cp.norm1(x)), [cp.abs(d.dense() @ x - y) <= eps])
    prob.solve(solver=cp.CLARABEL)
    res = bpdn_entrywise(d, y, eps)
    assert res.converged
    assert abs(res.objective - prob.value) <= 1e-6 * prob.value


@pytest.mark.parametrize("seed", range(5))
def test_bpdn_stability_example(d47, seed):
    # 40 dB keeps the per-entry noise small enough that K=2 sits inside the stability bound with T=1
    s = vectorize(random_scene(47, 2, seed))
    y0 = d47.apply(s)
    e = awgn(y0, NoiseSpec(40.0, seed))
    eps = float(np.max(np.abs(e)))
    assert 2 < thm3_bound(47, eps, 1.0)
    res = bpdn_entrywise(d47, y0 + e, eps)
    assert res.converged
    assert np.sum(np.abs(res.solution - s)) <= 1.0


def test_bpdn_negative_eps(d5):
    with pytest.raises(ValueError):
        bpdn_entrywise(d5, np.ones(5), -1.0)


def test_omp_single_atom(d47):
    res = omp(d47, d47.atom(777), 5)
    assert res.support == (777,)
    assert res.iterations == 1
    assert res.primal_residual <= 1e-12


@pytest.mark.parametrize("seed", range(5))
def test_omp_k3_exact(d47, seed):
    s = vectorize(random_scene(47, 3, seed))
    res = omp(d47, d47.apply(s), 3)
    assert scene_error(res.solution, s) <= 1e-10


def test_omp_support_growth(d47):
    y = d47.apply(vectorize(random_scene(47, 20, 3)))
    prev = ()
    for limit in range(1, 12):
        res = omp(d47, y, limit)
        assert len(res.support) == limit == res.iterations
        assert len(set(res.support)) == limit
        assert res.support[: len(prev)] == prev
        prev = res.support


def test_omp_validation(d5):
    with pytest.raises(ValueError):
        omp(d5, np.ones(5), 0)


def test_omp_against_oracle_k2_n5(d5):
    # K=2 exceeds the guaranteed sparsity for N=5, so OMP may pick a wrong atom; whenever it
    # reaches an exact fit it must coincide with the oracle (2-sparse representations are unique)
    agree = 0
    for seed in range(50):
        y = d5.apply(vectorize(random_scene(5, 2, seed)))
        oracle = l0_oracle(d5, y, 2)
        greedy = omp(d5, y, 2)
        assert oracle.primal_residual <= 1e-10
        if greedy.primal_residual <= 1e-10:
            assert np.max(np.abs(greedy.solution - oracle.solution)) <= 1e-8
            agree += 1
    assert agree == 43


def test_l0_oracle_examples(d5):
    y = d5.atom(7)
    res = l0_oracle(d5, y, 1)
    assert res.support == (7,) and res.primal_residual <= 1e-12
    res0 = l0_oracle(d5, y, 0)
    assert not res0.solution.any() and res0.primal_residual == pytest.approx(1.0)
    scene = random_scene(5, 2, 3)
    res2 = l0_oracle(d5, d5.apply(vectorize(scene)), 2)
    assert res2.primal_residual <= 1e-10 and res2.support == scene.support


def test_l0_oracle_budget():
    d = build_dictionary(alltop_sequence(47))
    with pytest.raises(ValueError):
        l0_oracle(d, np.ones(47), 3)


@pytest.mark.parametrize("n", [5, 7])
@pytest.mark.parametrize("seed", range(25))
def test_oracle_equivalence_guaranteed_regime(n, seed):
    d = build_dictionary(alltop_sequence(n))
    for k in range(1, max_guaranteed_sparsity(n) + 1):
        y = d.apply(vectorize(random_scene(n, k, seed)))
        ref = l0_oracle(d, y, k).solution
        assert np.max(np.abs(basis_pursuit(d, y).solution - ref)) <= 1e-6
        assert np.max(np.abs(omp(d, y, k).solution - ref)) <= 1e-6


def test_gaussian_pulse_dictionary_bp_reports_honestly():
    d = build_dictionary(gaussian_pulse(47))
    y = d.apply(vectorize(random_scene(47, 3, 33)))
    res = basis_pursuit(d, y, SolverOptions(max_iterations=2000))
    assert res.iterations == 2000 and not res.converged
    assert res.primal_residual > 0
