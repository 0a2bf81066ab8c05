import json

import numpy as np
import pytest

from trlg.cli import EXIT_INPUT, EXIT_KEY, EXIT_OK, main
from trlg.imagecore import load_image, save_image

FAST = {"ga": {"population": 8, "generations": 4}, "threshold_ga": {"population": 8, "generations": 4}}


@pytest.fixture
def work(tmp_path, small_color):
    save_image(tmp_path / "host.png", small_color)
    (tmp_path / "cfg.json").write_text(json.dumps(FAST))
    assert main(["keygen", "--out", str(tmp_path / "k.txt"), "--seed", "3"]) == EXIT_OK
    return tmp_path


def test_keygen_deterministic(tmp_path):
    main(["keygen", "--out", str(tmp_path / "a.txt"), "--seed", "8"])
    main(["keygen", "--out", str(tmp_path / "b.txt"), "--seed", "8"])
    assert (tmp_path / "a.txt").read_text() == (tmp_path / "b.txt").read_text()


def test_full_workflow(work, capsys):
    w = str(work)
    assert main(["embed", "--input", f"{w}/host.png", "--keys", f"{w}/k.txt", "--output", f"{w}/wm.png",
                 "--keys-out", f"{w}/k7.txt", "--config", f"{w}/cfg.json", "--report", f"{w}/e.csv"]) == EXIT_OK
    assert "key7" in (work / "k7.txt").read_text()
    assert (work / "e.csv").read_text().startswith("metric,value")
    assert main(["verify", "--input", f"{w}/wm.png", "--keys", f"{w}/k7.txt", "--map", f"{w}/m.png"]) == EXIT_OK
    assert "tampered_blocks: 0" in capsys.readouterr().out
    assert main(["attack", "--input", f"{w}/wm.png", "--output", f"{w}/att.png", "--rate", "0.2",
                 "--mask", f"{w}/mask.png"]) == EXIT_OK
    assert main(["recover", "--input", f"{w}/att.png", "--keys", f"{w}/k7.txt", "--output", f"{w}/rec.png",
                 "--tamper-map", f"{w}/t.png", "--recovery-map", f"{w}/r.png", "--original", f"{w}/host.png"]) == EXIT_OK
    out = capsys.readouterr().out
    assert "psnr:" in out and "blocks_primary1" in out
    assert load_image(work / "r.png").shape == (64, 64, 3)
    assert main(["report", "--image", f"{w}/rec.png", "--original", f"{w}/host.png",
                 "--digest-dir", f"{w}/dig", "--config", f"{w}/cfg.json"]) == EXIT_OK
    assert (work / "dig" / "primary.png").exists() and (work / "dig" / "secondary_2.png").exists()


def test_missing_key7_is_key_error(work):
    w = str(work)
    assert main(["verify", "--input", f"{w}/host.png", "--keys", f"{w}/k.txt"]) == EXIT_KEY


def test_input_errors(work, tmp_path):
    w = str(work)
    assert main(["embed", "--input", f"{w}/nope.png", "--keys", f"{w}/k.txt", "--output", f"{w}/o.png"]) == EXIT_INPUT
    save_image(tmp_path / "odd.png", np.zeros((120, 128), np.uint8))
    assert main(["embed", "--input", f"{w}/odd.png", "--keys", f"{w}/k.txt", "--output", f"{w}/o.png"]) == EXIT_INPUT
    (tmp_path / "bad.json").write_text("{\"colour\": 1}")
    assert main(["embed", "--input", f"{w}/host.png", "--keys", f"{w}/k.txt", "--output", f"{w}/o.png",
                 "--config", str(tmp_path / "bad.json")]) == EXIT_INPUT
    assert main(["attack", "--input", f"{w}/host.png", "--output", f"{w}/o.png", "--kind", "collage"]) == EXIT_INPUT
    assert main(["report", "--image", f"{w}/host.png"]) == EXIT_INPUT


def test_bad_keyfile(work):
    (work / "bad.txt").write_text("key1 = nonsense\n")
    w = str(work)
    assert main(["embed", "--input", f"{w}/host.png", "--keys", f"{w}/bad.txt", "--output", f"{w}/o.png"]) == EXIT_KEY


def test_padding_flag(work, tmp_path):
    save_image(tmp_path / "odd.png", np.full((120, 124), 90, np.uint8))
    w = str(work)
    assert main(["embed", "--input", str(tmp_path / "odd.png"), "--keys", f"{w}/k.txt", "--output", f"{w}/p.png",
                 "--keys-out", f"{w}/kp.txt", "--pad", "--config", f"{w}/cfg.json"]) == EXIT_OK
    assert load_image(work / "p.png", multiple=16).shape == (128, 128)
