import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from learnedbf.codes import RmParams, build_rm, encode
from learnedbf.mdp import MdpConfig, MdpState, episode_return, reset, step, transition


@pytest.fixture(scope="module")
def rm25():
    return build_rm(RmParams(2, 5))


@pytest.fixture(scope="module")
def cfg(rm25):
    return MdpConfig.bsc(rm25.pc_matrix, T=10)


def unit(n, N=32):
    e = np.zeros(N, np.uint8)
    e[n] = 1
    return e


def test_reset_codeword_terminal(rm25, cfg):
    c = encode(rm25, np.ones(16, np.uint8))
    st0 = reset(cfg, c)
    assert st0.terminal and st0.steps_taken == 0


def test_reset_single_error_is_column(rm25, cfg):
    c = encode(rm25, np.arange(16) % 2)
    st0 = reset(cfg, c ^ unit(5))
    assert st0.syndrome == cfg.columns[5]
    assert reset(cfg, unit(5)) == st0


def test_reset_dimension_mismatch(cfg):
    with pytest.raises(ValueError):
        reset(cfg, np.zeros(31, np.uint8))


def test_bsc_rewards_exact(cfg):
    s = cfg.columns[3]
    _, r_match = transition(cfg, s, 3)
    _, r_miss = transition(cfg, s, 4)
    assert r_match == 0.9 and r_miss == -0.1


def test_step_match_done(cfg):
    state, r, done = step(cfg, MdpState(cfg.columns[7]), 7)
    assert state.terminal and done and r == 0.9


def test_double_flip_returns(cfg):
    s0 = MdpState(cfg.columns[1] ^ cfg.columns[2])
    s1, _, _ = step(cfg, s0, 9)
    s2, _, _ = step(cfg, s1, 9)
    assert s2.syndrome == s0.syndrome and s2.steps_taken == 2


def test_truncation(cfg):
    s = MdpState(cfg.columns[0] ^ cfg.columns[1] ^ cfg.columns[2], 9)
    nxt, r, done = step(cfg, s, 20)
    assert done and not nxt.terminal and r == -0.1
    with pytest.raises(ValueError):
        step(cfg, nxt, 0)


def test_step_errors(cfg):
    with pytest.raises(ValueError):
        step(cfg, MdpState(0), 0)
    with pytest.raises(ValueError):
        step(cfg, MdpState(1), 32)


def test_episode_return_examples():
    assert episode_return([0.9], 0.5) == 0.9
    assert episode_return([], 0.99) == 0.0
    assert episode_return([-0.1, -0.1, -0.1, 0.9], 1.0) == pytest.approx(0.6)
    # three non-matching flips, then a fourth that matches: 1 - 4/T
    assert episode_return([-0.1] * 3 + [0.9], 1.0) == pytest.approx(1 - 4 / 10)


def test_spec_arithmetic_three_penalties_plus_match():
    # -0.1 * 3 + 1 when the third flip itself matches
    assert episode_return([-0.1, -0.1, 0.9], 1.0) == pytest.approx(0.7)


@given(st.integers(1, 10))
def test_k_flip_return_bsc(k):
    rewards = [-0.1] * (k - 1) + [0.9]
    assert episode_return(rewards, 1.0) == pytest.approx(1 - k / 10)


H25 = build_rm(RmParams(2, 5)).pc_matrix


@given(st.lists(st.floats(0.1, 20.0), min_size=32, max_size=32), st.integers(1, 20))
def test_dominance_nonuniform(mags, T):
    cfg = MdpConfig.for_llr(H25, mags, T=T)
    worst = cfg.penalty.max()
    if len(set(mags)) == 1:
        # uniform magnitudes use the exact 1/T penalty
        assert worst == 1.0 / T
    else:
        assert T * worst < 1.0
    assert np.all(cfg.penalty > 0)
    for a in range(32):
        _, r = transition(cfg, cfg.columns[a], a)
        assert -1 < r <= 1


def test_determinism(cfg):
    rng = np.random.default_rng(0)
    for _ in range(50):
        s = int(rng.integers(1, 1 << 16))
        a = int(rng.integers(32))
        assert transition(cfg, s, a) == transition(cfg, s, a)


def test_config_validation(rm25):
    H = rm25.pc_matrix
    with pytest.raises(ValueError):
        MdpConfig(H, 0, np.ones(32), 0.1)
    with pytest.raises(ValueError):
        MdpConfig(H, 10, np.zeros(32), 0.1)
    with pytest.raises(ValueError):
        MdpConfig(H, 10, np.ones(31), 0.1)
