import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from hypothesis.extra.numpy import arrays

from protofair.errors import DataError
from protofair.model import (
    CKPT_MAGIC, PrototypeModel, TransformedVector, affinity, init_model, k_filter,
    load_checkpoint, save_checkpoint, score_all_items, shifted_cosine, transform,
)


def scalar_cosine(x, y):
    # independent pure-Python oracle
    dot = sum(a * b for a, b in zip(x, y))
    nx = math.sqrt(sum(a * a for a in x))
    ny = math.sqrt(sum(b * b for b in y))
    return 1.0 + dot / (nx * ny)


nonzero = arrays(np.float64, 4, elements=st.floats(-10, 10)).filter(
    lambda v: np.linalg.norm(v) > 1e-3)


@pytest.mark.parametrize("x, y, expected", [
    ((1, 0), (1, 0), 2.0),
    ((1, 0), (-1, 0), 0.0),
    ((1, 0), (0, 1), 1.0),
])
def test_shifted_cosine_cases(x, y, expected):
    assert shifted_cosine(x, y) == expected


def test_shifted_cosine_zero_vector():
    with pytest.raises(ValueError):
        shifted_cosine((0, 0), (1, 0))


@given(nonzero, nonzero, st.floats(1e-3, 1e3))
def test_shifted_cosine_properties(x, y, alpha):
    s = shifted_cosine(x, y)
    assert 0.0 <= s <= 2.0
    assert s == pytest.approx(shifted_cosine(y, x), abs=1e-12)
    assert shifted_cosine(alpha * x, y) == pytest.approx(s, abs=1e-12)
    assert shifted_cosine(x, x) == pytest.approx(2.0, abs=1e-12)


def test_transform_examples():
    t = transform([1, 0], [[1, 0], [0, 1], [-1, 0]])
    assert t.values.tolist() == [2.0, 1.0, 0.0]
    assert t.active_mask.all()
    assert transform([0.3, 0.4], [[0.3, 0.4]]).values == pytest.approx([2.0])


def test_transform_matches_scalar_oracle():
    rng = np.random.default_rng(0)
    P, e = rng.normal(size=(3, 4)), rng.normal(size=4)
    t = transform(e, P)
    assert np.all((0 <= t.values) & (t.values <= 2))
    assert t.values == pytest.approx([scalar_cosine(e, p) for p in P], abs=1e-12)


def test_transform_shape_mismatch():
    with pytest.raises(ValueError):
        transform([1, 0, 0], [[1, 0]])


def test_k_filter_examples():
    t = TransformedVector(np.array([2.0, 1.0, 0.0]), np.ones(3, bool))
    f = k_filter(t, 2)
    assert f.values.tolist() == [2, 1, 0] and f.active_mask.tolist() == [True, True, False]
    tie = k_filter(TransformedVector(np.ones(3), np.ones(3, bool)), 1)
    assert tie.active_mask.tolist() == [True, False, False]
    assert tie.values.tolist() == [1, 0, 0]
    same = k_filter(t, 3)
    assert np.array_equal(same.values, t.values) and same.active_mask.all()
    assert t.values.tolist() == [2, 1, 0]  # input untouched
    for k in (0, 4):
        with pytest.raises(ValueError):
            k_filter(t, k)


@given(arrays(np.float64, st.integers(1, 8), elements=st.floats(0, 2)), st.data())
def test_k_filter_properties(values, data):
    L = len(values)
    k = data.draw(st.integers(1, L))
    t = TransformedVector(values, np.ones(L, bool))
    f = k_filter(t, k)
    assert f.active_mask.sum() == k
    assert np.all(f.values[~f.active_mask] == 0)
    assert np.array_equal(f.values[f.active_mask], values[f.active_mask])
    # every kept value beats or ties every dropped one
    if k < L:
        assert values[f.active_mask].min() >= values[~f.active_mask].max()
        assert np.all(f.active_mask <= k_filter(t, k + 1).active_mask)


def test_affinity_hand_instance():
    one = np.ones((1, 1))
    m = PrototypeModel(one, one, one, one, one, one, 1, 1)
    assert affinity(m, 0, 0) == 4.0


def random_model(seed=0, N=4, M=6, d=3, Lu=3, Li=2, ku=None, ki=None):
    rng = np.random.default_rng(seed)
    return PrototypeModel(rng.normal(size=(N, d)), rng.normal(size=(M, d)),
                          rng.normal(size=(Lu, d)), rng.normal(size=(Li, d)),
                          rng.normal(size=(Li, d)), rng.normal(size=(Lu, d)),
                          ku or Lu, ki or Li)


def test_affinity_unfiltered_when_k_is_L():
    m = random_model()
    for u in range(4):
        for i in range(6):
            assert affinity(m, u, i, True) == pytest.approx(affinity(m, u, i, False), abs=1e-15)


def test_affinity_scale_decomposition():
    m = random_model(1)
    base = affinity(m, 0, 0, False)
    u_hat_term = float((m.Wu @ m.U[0]) @ transform(m.I[0], m.Pi).values)
    m.U[0] *= 10
    assert affinity(m, 0, 0, False) - base == pytest.approx(9 * u_hat_term, abs=1e-10)


@given(st.integers(0, 10_000))
@settings(max_examples=30, deadline=None)
def test_affinity_linear_in_maps(seed):
    m = random_model(seed, ku=2, ki=1)
    rng = np.random.default_rng(seed + 1)
    A, B = rng.normal(size=m.Wu.shape), rng.normal(size=m.Wi.shape)

    def aff(Wu, Wi):
        mm = PrototypeModel(m.U, m.I, m.Pu, m.Pi, Wu, Wi, m.k_u, m.k_i)
        return affinity(mm, 1, 2, True)

    lhs = aff(m.Wu + 2 * A, m.Wi + 2 * B)
    rhs = aff(m.Wu, m.Wi) + 2 * aff(A, B)
    assert lhs == pytest.approx(rhs, abs=1e-10)


def test_affinity_index_errors():
    m = random_model()
    with pytest.raises(IndexError):
        affinity(m, 4, 0)
    with pytest.raises(IndexError):
        affinity(m, 0, -1)


def test_score_all_items_matches_affinity():
    m = random_model(2, N=3, M=150, ku=2, ki=1)
    rng = np.random.default_rng(3)
    cands = rng.integers(0, 150, size=100)
    batch = score_all_items(m, 1, cands, True)
    single = np.array([affinity(m, 1, int(i), True) for i in cands])
    assert np.max(np.abs(batch - single)) < 1e-12
    assert score_all_items(m, 1, cands[:1])[0] == affinity(m, 1, int(cands[0]))
    perm = rng.permutation(100)
    assert np.array_equal(score_all_items(m, 1, cands[perm], True), batch[perm])
    with pytest.raises(ValueError):
        score_all_items(m, 1, [])


def test_prototype_model_validation():
    m = random_model()
    with pytest.raises(ValueError):
        PrototypeModel(m.U, m.I, m.Pu, m.Pi, m.Wu, m.Wi, 4, 1)
    with pytest.raises(ValueError):
        PrototypeModel(m.U, m.I, m.Pu, m.Pi, m.Wi, m.Wu, 1, 1)


def test_init_range_and_determinism():
    a = init_model("protomf", 5, 7, 3, 2, 4, rng=9)
    b = init_model("protomf", 5, 7, 3, 2, 4, rng=9)
    for name, v in a.params().items():
        assert np.array_equal(v, b.params()[name])
        assert np.all(np.abs(v) <= 0.05)
    assert a.Wu.shape == (4, 3) and a.Wi.shape == (2, 3)


@pytest.mark.parametrize("kind", ["protomf", "mf"])
def test_checkpoint_round_trip(tmp_path, kind):
    m = init_model(kind, 5, 7, 3, 2, 4, k_u=1, k_i=2, rng=0)
    save_checkpoint(tmp_path / "m.ckpt", m, {"seed": 1})
    back, cfg = load_checkpoint(tmp_path / "m.ckpt")
    assert cfg == {"seed": 1} and back.kind == kind
    for name, v in m.params().items():
        assert np.array_equal(v, back.params()[name])
    assert (tmp_path / "m.ckpt").read_bytes().startswith(CKPT_MAGIC)
    if kind == "protomf":
        assert (back.k_u, back.k_i) == (1, 2)


def test_checkpoint_rejects_foreign_file(tmp_path):
    (tmp_path / "x").write_bytes(b"hello")
    with pytest.raises(DataError):
        load_checkpoint(tmp_path / "x")
