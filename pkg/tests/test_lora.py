"""Low-rank adapter algebra against dense numpy oracles and hand values."""

import numpy as np
import pytest

from edgesched.lora import (
    LoraAdapter,
    apply,
    delta,
    init_adapter,
    load_matrix,
    merge,
    reg_term,
    save_matrix,
    validate_matrix,
)


def small_adapter(lam=1.0):
    a = np.array([[1.0, 2.0]])
    b = np.array([[3.0], [4.0]])
    return LoraAdapter(a=a, b=b, lam=lam, rank=1)


def random_adapter(dim, rank, seed, lam=1.0):
    rng = np.random.default_rng(seed)
    return LoraAdapter(
        a=rng.normal(size=(rank, dim)),
        b=rng.normal(size=(dim, rank)),
        lam=lam,
        rank=rank,
    )


# ---------------------------------------------------------------------------
# construction


def test_init_up_projection_is_bit_zero():
    ad = init_adapter(12, 3, 0.02, np.random.default_rng(0))
    assert ad.b.tobytes() == np.zeros((12, 3)).tobytes()
    assert ad.a.shape == (3, 12)
    assert ad.lam == 1.0


def test_init_sigma_zero_gives_zero_down_projection():
    ad = init_adapter(6, 2, 0.0, np.random.default_rng(0))
    assert not ad.a.any()


def test_init_entry_spread_matches_sigma():
    ad = init_adapter(1000, 10, 0.05, np.random.default_rng(123))
    assert ad.a.std() == pytest.approx(0.05, rel=0.05)
    assert abs(ad.a.mean()) < 0.005


def test_init_validates_arguments():
    rng = np.random.default_rng(0)
    with pytest.raises(ValueError):
        init_adapter(0, 1, 0.1, rng)
    with pytest.raises(ValueError):
        init_adapter(4, 0, 0.1, rng)
    with pytest.raises(ValueError):
        init_adapter(4, 1, -0.1, rng)


def test_rank_not_below_dim_warns():
    with pytest.warns(UserWarning):
        init_adapter(4, 4, 0.1, np.random.default_rng(0))


def test_adapter_shape_mismatch_names_expected_shape():
    with pytest.raises(ValueError, match=r"\(3, 2\)"):
        LoraAdapter(a=np.zeros((2, 3)), b=np.zeros((2, 3)), lam=1.0, rank=2)


def test_param_count_saves_parameters_iff_rank_below_half_dim():
    for dim in (4, 8, 16):
        for rank in range(1, dim):
            ad = random_adapter(dim, rank, seed=dim * 100 + rank)
            assert ad.param_count() == 2 * rank * dim
            assert (ad.param_count() < dim * dim) == (rank < dim / 2)


# ---------------------------------------------------------------------------
# encoded update


def test_delta_zero_up_projection_is_zero_matrix():
    ad = init_adapter(5, 2, 0.3, np.random.default_rng(4))
    assert delta(ad).tobytes() == np.zeros((5, 5)).tobytes()


def test_delta_rank_one_outer_product():
    assert np.array_equal(delta(small_adapter()), [[3.0, 6.0], [4.0, 8.0]])


def test_delta_matches_triple_loop():
    ad = random_adapter(7, 3, seed=21)
    expect = np.zeros((7, 7))
    for i in range(7):
        for j in range(7):
            for k in range(3):
                expect[i, j] += ad.b[i, k] * ad.a[k, j]
    assert np.allclose(delta(ad), expect, rtol=0, atol=1e-12)


def test_delta_rank_bounded_by_factor_rank():
    ad = random_adapter(8, 2, seed=5)
    s = np.linalg.svd(delta(ad), compute_uv=False)
    assert s[2] < 1e-10
    assert s[1] > 1e-6


# ---------------------------------------------------------------------------
# merge


def test_merge_fresh_adapter_leaves_base_bits_untouched():
    rng = np.random.default_rng(8)
    w = rng.normal(size=(10, 10))
    ad = init_adapter(10, 3, 0.1, rng)
    assert merge(w, ad).tobytes() == w.tobytes()
    assert w.tobytes() == merge(w, ad).tobytes()  # input not mutated


def test_merge_hand_value_identity_base():
    out = merge(np.eye(2), small_adapter(lam=2.0))
    assert np.array_equal(out, [[7.0, 12.0], [8.0, 17.0]])


def test_merge_linear_in_lam():
    w = np.random.default_rng(3).normal(size=(6, 6))
    ad1 = random_adapter(6, 2, seed=9, lam=0.5)
    ad2 = random_adapter(6, 2, seed=9, lam=1.0)
    gain1 = merge(w, ad1) - w
    gain2 = merge(w, ad2) - w
    assert np.allclose(2.0 * gain1, gain2, rtol=0, atol=1e-12)


def test_merge_rejects_mismatched_base():
    with pytest.raises(ValueError, match=r"\(2, 2\)"):
        merge(np.eye(3), small_adapter())
    with pytest.raises(ValueError):
        merge(np.eye(2, dtype=np.float32), small_adapter())


# ---------------------------------------------------------------------------
# factored forward product


def test_apply_fresh_adapter_equals_plain_product():
    rng = np.random.default_rng(13)
    w = rng.normal(size=(9, 9))
    x = rng.normal(size=9)
    ad = init_adapter(9, 2, 0.1, rng)
    assert np.array_equal(apply(w, ad, x), w @ x)


def test_apply_zero_input_gives_zero():
    ad = random_adapter(5, 2, seed=1)
    out = apply(np.eye(5), ad, np.zeros(5))
    assert not out.any()


def test_apply_matches_merged_dense_product():
    rng = np.random.default_rng(77)
    w = rng.normal(size=(16, 16))
    ad = random_adapter(16, 2, seed=78, lam=0.7)
    x = rng.normal(size=16)
    dense = merge(w, ad) @ x
    assert np.allclose(apply(w, ad, x), dense, rtol=1e-9, atol=0)


def test_apply_accepts_matrix_right_hand_side():
    rng = np.random.default_rng(6)
    w = rng.normal(size=(4, 4))
    ad = random_adapter(4, 1, seed=7)
    x = rng.normal(size=(4, 3))
    out = apply(w, ad, x)
    assert out.shape == (4, 3)
    for col in range(3):
        assert np.allclose(out[:, col], apply(w, ad, x[:, col]),
                           rtol=1e-12, atol=1e-12)


def test_apply_validates_input_shape():
    ad = random_adapter(4, 1, seed=2)
    with pytest.raises(ValueError):
        apply(np.eye(4), ad, np.zeros(5))
    with pytest.raises(ValueError):
        apply(np.eye(4), ad, np.zeros((4, 2, 2)))


# ---------------------------------------------------------------------------
# regularization


def test_reg_term_zero_for_sigma_zero_adapter():
    ad = init_adapter(7, 2, 0.0, np.random.default_rng(0))
    assert reg_term(ad) == 0.0


def test_reg_term_hand_value():
    assert reg_term(small_adapter()) == 30.0


def test_reg_term_quadratic_homogeneity():
    ad = random_adapter(6, 2, seed=44)
    scaled = LoraAdapter(a=3.0 * ad.a, b=3.0 * ad.b, lam=ad.lam, rank=ad.rank)
    assert reg_term(scaled) == pytest.approx(9.0 * reg_term(ad), rel=1e-12)


# ---------------------------------------------------------------------------
# fixtures on disk


def test_save_load_round_trips_exactly(tmp_path):
    rng = np.random.default_rng(31)
    m = rng.normal(size=(5, 3)) * np.exp(rng.normal(size=(5, 3)) * 20)
    path = str(tmp_path / "m.txt")
    save_matrix(m, path)
    assert load_matrix(path).tobytes() == m.tobytes()


def test_load_matrix_rejects_malformed_files(tmp_path):
    bad_header = tmp_path / "h.txt"
    bad_header.write_text("3\n1 2 3\n")
    with pytest.raises(ValueError):
        load_matrix(str(bad_header))
    short_row = tmp_path / "r.txt"
    short_row.write_text("2 3\n1.0 2.0 3.0\n4.0 5.0\n")
    with pytest.raises(ValueError):
        load_matrix(str(short_row))


def test_validate_matrix_contract():
    with pytest.raises(ValueError):
        validate_matrix(np.zeros(4))
    with pytest.raises(ValueError):
        validate_matrix(np.zeros((2, 2), dtype=np.float32))
    bad = np.zeros((2, 2))
    bad[0, 0] = np.nan
    with pytest.raises(ValueError):
        validate_matrix(bad)
    with pytest.raises(ValueError):
        validate_matrix([[1.0, 2.0]])
