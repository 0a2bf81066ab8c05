import numpy as np
import pytest

from trlg.attacks import AttackError, AttackSpec, apply_attack, changed_blocks, region_rect


@pytest.fixture
def pair():
    rng = np.random.default_rng(0)
    return (rng.integers(0, 256, (64, 64), dtype=np.uint8),
            rng.integers(0, 256, (64, 64), dtype=np.uint8))


def test_center_half_rate():
    assert region_rect((512, 512), AttackSpec(rate=0.5)) == (74, 74, 438, 438)


def test_band_regions():
    assert region_rect((64, 64), AttackSpec(rate=0.25, region="left_to_right")) == (0, 0, 64, 16)
    assert region_rect((64, 64), AttackSpec(rate=0.25, region="up_to_bottom")) == (0, 0, 16, 64)
    assert region_rect((64, 64), AttackSpec(region="rect", rect=(3, 5, 9, 11))) == (2, 4, 10, 12)


def test_rate_zero(pair):
    img, _ = pair
    res = apply_attack(img, AttackSpec(rate=0.0))
    assert np.array_equal(res.image, img) and not res.mask.any()


def test_spec_validation():
    with pytest.raises(AttackError):
        AttackSpec(kind="blur")
    with pytest.raises(AttackError):
        AttackSpec(rate=1.5)
    with pytest.raises(AttackError):
        AttackSpec(region="rect")


def test_donor_required(pair):
    img, _ = pair
    with pytest.raises(AttackError):
        apply_attack(img, AttackSpec(kind="collage"))
    with pytest.raises(AttackError):
        apply_attack(img, AttackSpec(kind="collage"), donor=img[:32])


def test_protocol_keeps_lsbs(pair):
    img, donor = pair
    res = apply_attack(img, AttackSpec(kind="protocol", rate=0.5), donor)
    assert np.array_equal(res.image & 3, img & 3)
    t, l, b, r = res.region
    assert np.array_equal(res.image[t:b, l:r] >> 2, donor[t:b, l:r] >> 2)


def test_collage_and_mask(pair):
    img, donor = pair
    res = apply_attack(img, AttackSpec(kind="collage", rate=0.25, region="left_to_right"), donor)
    assert np.array_equal(res.image[:, :16], donor[:, :16])
    assert np.array_equal(res.image[:, 16:], img[:, 16:])
    assert np.array_equal(res.mask, changed_blocks(img, res.image))
    assert res.mask[:, :8].mean() > 0.95 and not res.mask[:, 8:].any()


@pytest.mark.parametrize("kind", ["copy_move", "vector_quantization"])
def test_moves_are_block_aligned_and_seeded(pair, kind):
    img, donor = pair
    spec = AttackSpec(kind=kind, rate=0.1, rng_seed=9)
    a = apply_attack(img, spec, donor)
    assert np.array_equal(a.image, apply_attack(img, spec, donor).image)
    assert a.mask.any()


def test_splice_noise_seeded(pair):
    img, _ = pair
    a = apply_attack(img, AttackSpec(rate=0.1, rng_seed=1))
    b = apply_attack(img, AttackSpec(rate=0.1, rng_seed=2))
    assert not np.array_equal(a.image, b.image)


def test_color_mask():
    img = np.zeros((8, 8, 3), np.uint8)
    other = img.copy()
    other[5, 6, 2] = 1
    m = changed_blocks(img, other)
    assert m.shape == (4, 4) and m[2, 3] == 1 and m.sum() == 1
