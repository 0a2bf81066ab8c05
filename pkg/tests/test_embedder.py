import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from trlg import digest as dg
from trlg import embedder as em
from trlg.errors import DimensionError, KeyValidationError
from trlg.metrics import psnr


@settings(max_examples=100, deadline=None)
@given(arrays(np.uint8, 4), st.integers(0, 255), arrays(np.bool_, 4))
def test_lsb_match_scalar_properties(block, word, cand):
    out = em.lsb_match_embed(block, word, cand)
    got = (int(out[0] & 3) << 6) | (int(out[1] & 3) << 4) | (int(out[2] & 3) << 2) | int(out[3] & 3)
    assert got == word
    assert np.abs(out.astype(int) - block).max() <= 3


def test_lsb_saturation():
    out = em.lsb_match_embed([255, 255, 255, 255], 0)
    assert out.tolist() == [252, 252, 252, 252]
    out = em.lsb_match_embed([0, 0, 0, 0], 255)
    assert out.tolist() == [3, 3, 3, 3]


@settings(max_examples=20, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_vectorized_matches_scalar(seed):
    rng = np.random.default_rng(seed)
    plane = rng.integers(0, 256, (8, 8), dtype=np.uint8)
    words = rng.integers(0, 256, (4, 4), dtype=np.uint8)
    cand = rng.random((8, 8)) < 0.25
    out = em.embed_plane(plane, words, cand)
    for i, j in np.ndindex(4, 4):
        blk = plane[2 * i : 2 * i + 2, 2 * j : 2 * j + 2]
        c = cand[2 * i : 2 * i + 2, 2 * j : 2 * j + 2]
        assert np.array_equal(out[2 * i : 2 * i + 2, 2 * j : 2 * j + 2].ravel(),
                              em.lsb_match_embed(blk, words[i, j], c))
    assert np.array_equal(em.extract_words(out)[0], words)


def test_candidate_samples_take_replacement(keys):
    m = em.candidate_mask((16, 16), keys.key3, keys.key4, 3)
    assert m.shape == (3, 16, 16)
    per_block = m.reshape(3, 8, 2, 8, 2).sum(axis=(0, 2, 4))
    assert np.all(per_block == 1)


def test_relation_and_dc_bytes():
    assert em.relation_byte(0, 0) == 0
    assert em.relation_byte(4, 0) == em.relation_byte(40, 0)
    assert 0 <= em.relation_byte(-8, 4) < 256
    # 1e14 / 2 is a multiple of 256
    assert em.dc_byte(12345) == 0


def test_hash_ignores_lsbs_and_sees_msbs(small_color, keys):
    h = em.content_hash(small_color, keys.key3, keys.key4)
    assert h.combined.shape == (32, 32)
    assert np.array_equal(em.content_hash(small_color ^ 3, keys.key3, keys.key4).combined, h.combined)
    changed = small_color.copy()
    changed[:4, :4] ^= 0x80
    h2 = em.content_hash(changed, keys.key3, keys.key4)
    diff = h2.combined != h.combined
    assert not diff[1:, :].any() and not diff[:, 1:].any()


def test_bind_is_involution(keys):
    rng = np.random.default_rng(0)
    psi = rng.integers(0, 256, (3, 16, 16), dtype=np.uint8)
    img = rng.integers(0, 256, (32, 32, 3), dtype=np.uint8)
    h = em.content_hash(img, keys.key3, keys.key4)
    assert np.array_equal(em.unbind_from_content(em.bind_to_content(psi, h), h), psi)


def test_encrypt_round_trip(keys):
    psi = np.random.default_rng(1).integers(0, 256, (1, 16, 16), dtype=np.uint8)
    enc = em.encrypt_permute(psi, keys.key5, keys.key6)
    assert not np.array_equal(enc, psi)
    assert np.array_equal(em.decrypt_depermute(enc, keys.key5, keys.key6), psi)
    with pytest.raises(KeyValidationError):
        em.apply_key7(enc, b"\x01\x02")


def test_permute_bits_inverse():
    v = np.arange(256, dtype=np.uint8)
    for p in range(8):
        assert np.array_equal(em.depermute_bits(em.permute_bits(v, p), p), v)


@pytest.mark.parametrize("color", [False, True])
def test_assemble_round_trip(color):
    rng = np.random.default_rng(2)
    n = 3 if color else 1
    phi = rng.integers(0, 2, (8, 8, 17 if color else 5), dtype=np.uint8)
    s1 = [rng.integers(0, 2, (8, 8), dtype=np.uint8) for _ in range(n)]
    s2 = [rng.integers(0, 2, (8, 8), dtype=np.uint8) for _ in range(n)]
    auth = rng.integers(0, 2, (8, 8), dtype=np.uint8)
    psi = em.assemble_watermark(phi, s1, s2, auth)
    assert psi.shape == (n, 8, 8)
    p2, a1, a2, au = em.disassemble_watermark(psi)
    assert np.array_equal(p2, phi) and np.array_equal(au, auth)
    assert all(np.array_equal(x, y) for x, y in zip(a1 + a2, s1 + s2))


def test_records_phi_round_trip():
    rng = np.random.default_rng(3)
    b1 = rng.integers(0, 2, (4, 4, 34), dtype=np.uint8)
    b2 = rng.integers(0, 2, (4, 4, 34), dtype=np.uint8)
    phi = em.records_to_phi(b1, b2)
    assert phi.shape == (8, 8, 17)
    r1, r2 = em.phi_to_records(phi)
    assert np.array_equal(r1, b1) and np.array_equal(r2, b2)
    g = rng.integers(0, 2, (4, 4, dg.GRAY_BITS), dtype=np.uint8)
    r1, r2 = em.phi_to_records(em.records_to_phi(g))
    assert np.array_equal(r1, g) and r2 is None


def test_embed_gray(wm_gray, small_gray):
    assert wm_gray.image.shape == small_gray.shape
    assert np.abs(wm_gray.image.astype(int) - small_gray).max() <= 3
    assert psnr(small_gray, wm_gray.image) > 44
    assert len(wm_gray.keys.key7) == 1
    assert np.array_equal(em.extract_words(wm_gray.image), wm_gray.psi_final)


def test_embed_color(wm_color, small_color):
    assert len(wm_color.keys.key7) == 3
    assert psnr(small_color, wm_color.image) > 44
    assert np.array_equal(em.extract_words(wm_color.image), wm_color.psi_final)


def test_embed_fixed_key7_is_deterministic(small_gray, keys, wm_gray):
    again = em.embed(small_gray, keys, thresholds=wm_gray.thresholds, key7=wm_gray.keys.key7)
    assert np.array_equal(again.image, wm_gray.image)


def test_embed_rejects_bad_dimensions(keys):
    with pytest.raises(DimensionError):
        em.embed(np.zeros((120, 128), np.uint8), keys)
    padded, pad = em.prepare_host(np.zeros((120, 130), np.uint8), pad=True)
    assert padded.shape == (128, 144) and pad == (8, 14)
    with pytest.raises(ValueError):
        em.embed(np.zeros((128, 128), np.float64), keys)
