import numpy as np
import pytest

from trlg import embedder as em
from trlg import recovery
from trlg.attacks import AttackSpec, apply_attack
from trlg.errors import KeyValidationError
from trlg.metrics import psnr


@pytest.mark.parametrize("which", ["wm_gray", "wm_color"])
def test_clean_image_is_untouched(which, request):
    wm = request.getfixturevalue(which)
    tr = recovery.authenticate(wm.image, wm.keys)
    assert not tr.tamper.any() and not tr.raw.any()
    res = recovery.recover(wm.image, wm.keys)
    assert np.array_equal(res.image, wm.image) and not res.recovery_map.any()


def test_extraction_inverts_embedding(wm_color):
    ex = recovery.extract_watermark(wm_color.image, wm_color.keys)
    assert np.array_equal(ex.psi_final, wm_color.psi_final)
    assert np.array_equal(ex.psi_encrypted, wm_color.psi_encrypted)
    assert np.array_equal(ex.psi, wm_color.psi)


def test_single_msb_change_is_local(wm_gray):
    # the content hash reads one candidate sample per 2x2 block
    cand = em.candidate_mask(wm_gray.image.shape, wm_gray.keys.key3, wm_gray.keys.key4, 1)[0]
    r, c = np.argwhere(cand[70:72, 40:42])[0]
    img = wm_gray.image.copy()
    img[70 + r, 40 + c] ^= 0x40
    tr = recovery.authenticate(img, wm_gray.keys, closing=False)
    ys, xs = np.nonzero(tr.tamper)
    assert tr.tamper.any()
    # flagged blocks stay inside the enclosing 4x4 hash block
    assert set(ys.tolist()) <= {34, 35} and set(xs.tolist()) <= {20, 21}


def test_lsb_change_flags_its_block(wm_gray):
    img = wm_gray.image.copy()
    img[10, 10] ^= 1
    tr = recovery.authenticate(img, wm_gray.keys, closing=False)
    if tr.raw.any():
        assert tr.tamper[4:6, 4:6].any() and tr.tamper.sum() <= 4


def test_close_map():
    raw = np.zeros((12, 12), np.uint8)
    raw[4, 4] = raw[4, 6] = 1
    closed = recovery.close_map(raw)
    assert closed[4, 5] == 1 and closed[0, 0] == 0
    assert np.all(closed >= raw)
    edge = np.zeros((12, 12), np.uint8)
    edge[:, 0] = 1
    assert recovery.close_map(edge)[:, 0].all()


def test_promote_to_hash_blocks():
    raw = np.zeros((4, 4), np.uint8)
    raw[1, 2] = 1
    out = recovery.promote_to_hash_blocks(raw)
    assert out[:2, 2:].all() and out.sum() == 4


def test_recover_splice_improves_and_preserves_outside(wm_color, small_color):
    att = apply_attack(wm_color.image, AttackSpec("splice", 0.1, "center", rng_seed=3))
    res = recovery.recover(att.image, wm_color.keys)
    mask = np.repeat(np.repeat(res.tamper.astype(bool), 2, 0), 2, 1)
    assert np.array_equal(res.image[~mask], att.image[~mask])
    truth = att.mask.astype(bool)
    assert res.tamper[truth].mean() > 0.95
    assert psnr(small_color, res.image) > psnr(small_color, att.image) + 10
    codes = set(np.unique(res.recovery_map).tolist())
    assert codes <= {int(s) for s in recovery.Source}
    assert int(recovery.Source.PRIMARY1) in codes


def test_recover_gray_large_region(wm_gray, small_gray):
    att = apply_attack(wm_gray.image, AttackSpec("splice", 0.5, "left_to_right", rng_seed=1))
    res = recovery.recover(att.image, wm_gray.keys)
    assert res.image.shape == small_gray.shape
    assert psnr(small_gray, res.image) > psnr(small_gray, att.image) + 8


def test_wrong_key7_length(wm_gray):
    with pytest.raises(KeyValidationError):
        recovery.authenticate(wm_gray.image, wm_gray.keys.with_key7(b"\x00\x00\x00"))


def test_render_maps():
    rmap = np.array([[0, 1], [5, 3]], np.uint8)
    rgb = recovery.render_recovery_map(rmap)
    assert rgb.shape == (2, 2, 3) and rgb[0, 0].tolist() == [0, 0, 0] and rgb[0, 1].tolist() == [255, 0, 0]
    t = recovery.render_tamper_map(np.array([[0, 1]]))
    assert t.tolist() == [[0, 255]]
