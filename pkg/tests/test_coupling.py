import numpy as np
import pytest

from mtstep.coupling import (
    CoupledSystem,
    SignedBooleanMatrix,
    Subdomain,
    advance_system_step,
    assemble_L_R,
    initialize_coupled_system,
    interpolate_lambda,
    subdomain_substep,
)
from mtstep.errors import DimensionMismatch
from mtstep.newmark import AVERAGE_ACCELERATION, KinematicState, NewmarkParams
from mtstep.problems import build_sdof2, build_sdof3


def zero_force(n):
    z = np.zeros(n)
    return lambda t: z


def make_pair(dt_a=0.02, dt_b=0.02, sign=(+1, -1), params=AVERAGE_ACCELERATION):
    """The split oscillator: (m, k) = (0.1, 2.5) and (0.005, 50)."""
    subs = [
        Subdomain(
            M=np.array([[0.1]]), K=np.array([[2.5]]), params=params,
            dt_sub=dt_a, force=zero_force(1),
            C=SignedBooleanMatrix(np.array([[float(sign[0])]])),
        ),
        Subdomain(
            M=np.array([[0.005]]), K=np.array([[50.0]]), params=params,
            dt_sub=dt_b, force=zero_force(1),
            C=SignedBooleanMatrix(np.array([[float(sign[1])]])),
        ),
    ]
    return subs


# ---------------------------------------------------------------------------
# SignedBooleanMatrix
# ---------------------------------------------------------------------------

def test_signed_boolean_validation():
    SignedBooleanMatrix(np.array([[1.0, 0.0], [0.0, -1.0]]))
    with pytest.raises(ValueError):
        SignedBooleanMatrix(np.array([[0.5, 0.0]]))
    with pytest.raises(ValueError):
        SignedBooleanMatrix(np.array([[1.0, -1.0]]))  # two entries in one row
    with pytest.raises(ValueError):
        SignedBooleanMatrix(np.zeros(3))  # not 2-D


def test_signed_boolean_is_read_only():
    C = SignedBooleanMatrix(np.array([[1.0, 0.0]]))
    with pytest.raises(ValueError):
        C.data[0, 0] = -1.0


def test_signed_boolean_from_entries():
    C = SignedBooleanMatrix.from_entries(2, 3, [(0, 1, 1), (1, 2, -1)])
    np.testing.assert_array_equal(
        C.data, [[0.0, 1.0, 0.0], [0.0, 0.0, -1.0]]
    )
    assert SignedBooleanMatrix.zeros(2, 3).n_constraints == 2


# ---------------------------------------------------------------------------
# Construction checks
# ---------------------------------------------------------------------------

def test_eta_derived_from_time_step_ratio():
    subs = make_pair(dt_a=0.02, dt_b=0.005)
    sys = initialize_coupled_system(subs, 0.02, d0=[[0.1], [0.1]], v0=[[1.0], [1.0]])
    assert sys.eta == (1, 4)


def test_non_integer_ratio_rejected():
    subs = make_pair(dt_a=0.02, dt_b=0.0075)
    with pytest.raises(ValueError, match="not a positive integer"):
        initialize_coupled_system(subs, 0.02, d0=[[0.0], [0.0]], v0=[[0.0], [0.0]])


def test_subcritical_time_step_enforced():
    # Central difference on the stiff half: dt_crit = 2 sqrt(m/k) = 0.02.
    params = NewmarkParams(beta=0.0, gamma=0.5)
    subs = make_pair(dt_a=0.025, dt_b=0.025, params=params)
    with pytest.raises(ValueError, match="critical"):
        initialize_coupled_system(subs, 0.025, d0=[[0.0], [0.0]], v0=[[0.0], [0.0]])


def test_incompatible_initial_velocities_rejected():
    subs = make_pair()
    with pytest.raises(ValueError, match="incompatible"):
        initialize_coupled_system(subs, 0.02, d0=[[0.0], [0.0]], v0=[[1.0], [0.0]])


def test_mismatched_constraint_counts_rejected():
    subs = make_pair()
    bad = Subdomain(
        M=subs[1].M, K=subs[1].K, params=subs[1].params, dt_sub=subs[1].dt_sub,
        force=zero_force(1), C=SignedBooleanMatrix(np.array([[-1.0], [0.0]])),
    )
    st = KinematicState(d=[0.0], v=[0.0], a=[0.0])
    with pytest.raises(DimensionMismatch):
        CoupledSystem(
            subdomains=(subs[0], bad), dt_system=0.02,
            states=(st, st), lambda_current=np.zeros(1),
        )


def test_consistent_lambda_init_zeroes_acceleration_drift():
    sc = build_sdof2(etas=(1, 1))
    a_drift = sum(
        sub.C.data @ st.a for sub, st in zip(sc.system.subdomains, sc.system.states)
    )
    np.testing.assert_allclose(a_drift, 0.0, atol=1e-12)


def test_zero_lambda_init_leaves_acceleration_drift():
    sc = build_sdof2(etas=(1, 1), lambda_init="zero")
    assert np.all(sc.system.lambda_current == 0.0)
    a_drift = sum(
        sub.C.data @ st.a for sub, st in zip(sc.system.subdomains, sc.system.states)
    )
    assert np.abs(a_drift).max() > 1.0  # 0.1 * (k_a/m_a - k_b/m_b) sized


# ---------------------------------------------------------------------------
# Substep building blocks
# ---------------------------------------------------------------------------

def test_interpolate_lambda_endpoints_and_range():
    lam0, lam1 = np.array([1.0, -2.0]), np.array([3.0, 2.0])
    np.testing.assert_allclose(interpolate_lambda(lam0, lam1, 0, 4), lam0)
    np.testing.assert_allclose(interpolate_lambda(lam0, lam1, 4, 4), lam1)
    np.testing.assert_allclose(
        interpolate_lambda(lam0, lam1, 1, 4), 0.75 * lam0 + 0.25 * lam1
    )
    with pytest.raises(ValueError):
        interpolate_lambda(lam0, lam1, 5, 4)
    with pytest.raises(DimensionMismatch):
        interpolate_lambda(lam0, np.zeros(3), 1, 4)


def test_assemble_L_R_blocks():
    sub = make_pair()[0]
    L, R = assemble_L_R(sub)
    n = 1
    dt, beta, gamma = sub.dt_sub, sub.params.beta, sub.params.gamma
    np.testing.assert_allclose(L[:n, :n], sub.M)
    np.testing.assert_allclose(L[:n, 2 * n:], sub.K)
    np.testing.assert_allclose(L[n:2 * n, :n], -gamma * dt * np.eye(n))
    np.testing.assert_allclose(L[2 * n:, :n], -beta * dt * dt * np.eye(n))
    np.testing.assert_allclose(R[n:2 * n, :n], (1 - gamma) * dt * np.eye(n))
    np.testing.assert_allclose(R[2 * n:, :n], (0.5 - beta) * dt * dt * np.eye(n))
    np.testing.assert_allclose(R[2 * n:, n:2 * n], dt * np.eye(n))


def test_step_histories_satisfy_substep_equations():
    # Re-advance every subdomain with the solved multiplier endpoint; the
    # sub-level histories must reproduce themselves.
    sc = build_sdof3(etas=(1, 2, 4))
    sys = sc.system
    for _ in range(3):
        result = advance_system_step(sys)
        for sub, eta, st, hist in zip(
            sys.subdomains, sys.eta, sys.states, result.new_states
        ):
            prev = st
            for j in range(1, eta + 1):
                f_next = sub.force(sys.t_current + j * sub.dt_sub)
                redo = subdomain_substep(
                    sub, prev, sys.lambda_current, result.lambda_next, j, eta, f_next
                )
                np.testing.assert_allclose(redo.d, hist[j - 1].d, atol=1e-13)
                np.testing.assert_allclose(redo.v, hist[j - 1].v, atol=1e-13)
                np.testing.assert_allclose(redo.a, hist[j - 1].a, atol=1e-13)
                prev = hist[j - 1]
        sys = sys.apply(result)


def test_sublevel_states_obey_equations_of_motion():
    sc = build_sdof3(etas=(2, 1, 4))
    sys = sc.system
    result = advance_system_step(sys)
    for sub, eta, hist in zip(sys.subdomains, sys.eta, result.new_states):
        assert len(hist) == eta
        for j, st in enumerate(hist, start=1):
            lam_j = interpolate_lambda(
                sys.lambda_current, result.lambda_next, j, eta
            )
            f = sub.force(sys.t_current + j * sub.dt_sub)
            residual = sub.M @ st.a + sub.K @ st.d - f - sub.C.data.T @ lam_j
            np.testing.assert_allclose(residual, 0.0, atol=1e-12)


# ---------------------------------------------------------------------------
# System stepping
# ---------------------------------------------------------------------------

def test_advance_is_pure():
    sc = build_sdof2()
    sys = sc.system
    d_before = [st.d.copy() for st in sys.states]
    lam_before = sys.lambda_current.copy()
    t_before = sys.t_current
    advance_system_step(sys)
    for st, d in zip(sys.states, d_before):
        np.testing.assert_array_equal(st.d, d)
    np.testing.assert_array_equal(sys.lambda_current, lam_before)
    assert sys.t_current == t_before


def test_velocity_constraint_enforced_each_level():
    sc = build_sdof3(etas=(1, 2, 4))
    sys = sc.system
    for _ in range(20):
        sys = sys.apply(advance_system_step(sys))
        assert np.abs(sys.velocity_residual()).max() <= 1e-12


def test_schur_and_monolithic_paths_agree():
    sc = build_sdof3(etas=(2, 1, 4))
    sys_s = sc.system
    sys_m = sc.system
    for _ in range(10):
        res_s = advance_system_step(sys_s, method="schur")
        res_m = advance_system_step(sys_m, method="monolithic")
        np.testing.assert_allclose(res_s.lambda_next, res_m.lambda_next, atol=1e-9)
        for hist_s, hist_m in zip(res_s.new_states, res_m.new_states):
            for a, b in zip(hist_s, hist_m):
                np.testing.assert_allclose(a.d, b.d, atol=1e-9)
                np.testing.assert_allclose(a.v, b.v, atol=1e-9)
                np.testing.assert_allclose(a.a, b.a, atol=1e-9)
        sys_s = sys_s.apply(res_s)
        sys_m = sys_m.apply(res_m)


def test_unknown_method_rejected():
    sc = build_sdof2()
    with pytest.raises(ValueError):
        advance_system_step(sc.system, method="staggered")


def test_subdomain_order_does_not_matter():
    subs_ab = make_pair(dt_b=0.005)
    subs_ba = make_pair(dt_b=0.005, sign=(-1, +1))[::-1]
    sys_ab = initialize_coupled_system(
        subs_ab, 0.02, d0=[[0.1], [0.1]], v0=[[1.0], [1.0]]
    )
    sys_ba = initialize_coupled_system(
        subs_ba, 0.02, d0=[[0.1], [0.1]], v0=[[1.0], [1.0]]
    )
    for _ in range(10):
        sys_ab = sys_ab.apply(advance_system_step(sys_ab))
        sys_ba = sys_ba.apply(advance_system_step(sys_ba))
    np.testing.assert_allclose(sys_ab.states[0].d, sys_ba.states[1].d, atol=1e-13)
    np.testing.assert_allclose(sys_ab.states[1].d, sys_ba.states[0].d, atol=1e-13)
    # The multiplier flips sign with the constraint rows.
    np.testing.assert_allclose(
        sys_ab.lambda_current, -sys_ba.lambda_current, atol=1e-13
    )


def test_subcycled_sublevels_interpolate_between_levels():
    # Sanity on the sub-level time grid: eta states per system step, the
    # last one landing on the new system level.
    sc = build_sdof2(etas=(1, 4))
    sys = sc.system
    result = advance_system_step(sys)
    assert len(result.new_states[0]) == 1
    assert len(result.new_states[1]) == 4
    final = sys.apply(result)
    np.testing.assert_allclose(
        result.new_states[1][-1].d, final.states[1].d
    )
