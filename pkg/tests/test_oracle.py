"""Finite-time ground truth: derivative states and the exact information matrix."""
import math

import numpy as np
import pytest

from qwfisher import (CoinParams, derivative_state, initial_entangled,
                      initial_gamma, initial_localized, qfim_exact,
                      uhlmann_exact)
from qwfisher.oracle import coin_generators
from qwfisher.walk import build_coin, evolve

from oracles import dense_amps_at, dense_evolve, random_spinor


def overlap(a_window, b_window):
    """<a|b> between two amplitude windows (aligned by site index)."""
    lo = min(a_window.sites[0], b_window.sites[0])
    hi = max(a_window.sites[-1], b_window.sites[-1])
    acc = 0.0 + 0.0j
    for x in range(lo, hi + 1):
        ia = x - a_window.sites[0]
        ib = x - b_window.sites[0]
        if 0 <= ia < len(a_window.sites) and 0 <= ib < len(b_window.sites):
            acc += np.vdot(a_window.amps[ia], b_window.amps[ib])
    return acc


def fd_state(init, p, t, mu, h):
    """Central-difference derivative of the dense evolution (test-local)."""
    up = {mu: getattr(p, mu) + h}
    dn = {mu: getattr(p, mu) - h}
    sp, ap = dense_evolve(init.origin, init.amps, **{**coin_dict(p), **up}, t=t)
    sm, am = dense_evolve(init.origin, init.amps, **{**coin_dict(p), **dn}, t=t)
    assert np.array_equal(sp, sm)
    return sp, (ap - am) / (2 * h)


def coin_dict(p):
    return {"theta": p.theta, "alpha": p.alpha, "beta": p.beta}


def test_generators_are_antihermitian_and_match_coin_derivative():
    p = CoinParams(0.8, -0.4, 1.1)
    gens = coin_generators(p)
    c = build_coin(p)
    h = 1e-6
    for i, mu in enumerate(("theta", "alpha", "beta")):
        assert np.abs(gens[i] + gens[i].conj().T).max() <= 1e-12
        dc = (build_coin(p.replace(**{mu: getattr(p, mu) + h}))
              - build_coin(p.replace(**{mu: getattr(p, mu) - h}))) / (2 * h)
        assert np.abs(gens[i] - c.conj().T @ dc).max() <= 1e-8


def test_one_step_theta_derivative_by_hand():
    # d/dtheta of the single step: only the coin depends on theta
    th, al, be = 0.7, 0.2, -0.9
    p = CoinParams(th, al, be)
    d = derivative_state(initial_localized(0), p, 1, "theta")
    dc = np.array([
        [-np.exp(1j * al) * math.sin(th), np.exp(1j * be) * math.cos(th)],
        [-np.exp(-1j * be) * math.cos(th), -np.exp(-1j * al) * math.sin(th)],
    ])
    chi = np.array([1.0, 0.0])
    rotated = dc @ chi
    idx = {x: i for i, x in enumerate(d.sites)}
    assert d.amps[idx[1], 0] == pytest.approx(rotated[0], abs=1e-12)
    assert d.amps[idx[-1], 1] == pytest.approx(rotated[1], abs=1e-12)


@pytest.mark.parametrize("mu", ["theta", "alpha", "beta"])
def test_sum_method_agrees_with_finite_difference(mu):
    p = CoinParams(1.05, 0.6, -0.35)
    init = initial_gamma(0.9)
    t = 20
    a = derivative_state(init, p, t, mu, method="sum")
    b = derivative_state(init, p, t, mu, method="finite_diff", h=1e-5)
    assert a.sites[0] == b.sites[0]
    assert np.abs(a.amps - b.amps).max() <= 1e-6


def test_sum_method_against_dense_differentiation():
    p = CoinParams(0.85, 0.3, 0.5)
    init = initial_entangled(0, 1)
    t = 9
    for mu in ("theta", "alpha"):
        d = derivative_state(init, p, t, mu)
        sites, dense = fd_state(init, p, t, mu, 1e-6)
        assert np.abs(d.amps
                      - dense_amps_at(sites, dense, d.sites)).max() <= 1e-7


def test_state_derivative_overlap_is_imaginary():
    # differentiating <psi|psi> = 1 kills the real part
    p = CoinParams(0.9, -0.2, 0.7)
    init = initial_gamma(1.7)
    t = 15
    final = evolve(init, p, t)

    class _W:
        sites = final.sites
        amps = final.amps

    for mu in ("theta", "alpha", "beta"):
        d = derivative_state(init, p, t, mu)
        assert abs(overlap(_W, d).real) <= 1e-12


def test_qfim_exact_matches_dense_finite_difference():
    p = CoinParams(0.75, 0.45, -0.6)
    init = initial_localized(0, spinor=np.array([0.6, 0.8j]))
    t = 6
    f = qfim_exact(init, p, t, params=("theta", "alpha"))
    assert f.labels == ("theta", "alpha")
    assert not f.asymptotic

    h = 1e-5
    final_sites, final_dense = dense_evolve(0, init.amps, p.theta, p.alpha,
                                            p.beta, t)
    ds = {}
    for mu in ("theta", "alpha"):
        ds[mu] = fd_state(init, p, t, mu, h)[1]
    expected = np.zeros((2, 2))
    for i, mu in enumerate(("theta", "alpha")):
        for j, nu in enumerate(("theta", "alpha")):
            gram = np.vdot(ds[mu], ds[nu])
            vm = np.vdot(final_dense, ds[mu])
            vn = np.vdot(final_dense, ds[nu])
            expected[i, j] = 4 * (gram - np.conj(vm) * vn).real
    assert np.abs(f.entries - expected).max() <= 1e-3 * np.abs(expected).max()


def test_exact_beta_entries_shrink_with_time():
    p = CoinParams(0.8, 0.1, -0.4)
    init = initial_gamma(0.5)
    resid = []
    for t in (8, 32, 128):
        f = qfim_exact(init, p, t)
        assert f.labels == ("theta", "alpha", "beta")
        resid.append(np.abs(f.per_t2[2, :]).max())
    assert resid[2] < resid[1] < resid[0]


def test_uhlmann_exact_antisymmetric_and_small_for_fixture():
    p = CoinParams(math.pi / 4, 0.0, 0.0)
    init = initial_entangled(0, 1)
    d = uhlmann_exact(init, p, 50, params=("theta", "alpha"))
    assert d.antisymmetric
    assert np.abs(d.entries + d.entries.T).max() == 0.0
    f = qfim_exact(init, p, 50, params=("theta", "alpha"))
    assert np.abs(d.entries[0, 1]) <= 1e-9 * f.entries[0, 0]


def test_oracle_accepts_random_spinors_and_stays_psd():
    rng = np.random.default_rng(21)
    for _ in range(5):
        p = CoinParams(rng.uniform(0.3, 1.3), rng.uniform(-2, 2),
                       rng.uniform(-2, 2))
        init = initial_localized(0, spinor=random_spinor(rng))
        f = qfim_exact(init, p, 12)
        evals = np.linalg.eigvalsh(f.per_t2)
        assert evals.min() >= -1e-9
