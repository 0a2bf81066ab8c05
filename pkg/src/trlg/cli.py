"""Command-line frontend: ``trlg <keygen|embed|verify|recover|attack|report>``."""

from __future__ import annotations

import argparse
import csv
import json
import logging
import sys
from pathlib import Path

import numpy as np

from . import attacks, digest, embedder, recovery
from .chaos import generate_keychain, read_keyfile, write_keyfile
from .errors import DimensionError, ImageFormatError, KeyValidationError
from .gaopt import GaConfig, default_threads, optimize_thresholds
from .halftone import inverse_halftone
from .imagecore import load_image, luminance, save_image
from .metrics import quality_report

EXIT_OK = 0
EXIT_INPUT = 2
EXIT_KEY = 3
EXIT_INTERNAL = 4

log = logging.getLogger("trlg")


class InputError(Exception):
    pass


# -- config --------------------------------------------------------------------


def load_config(path) -> dict:
    """JSON file with optional ``threads``, ``ga`` and ``threshold_ga`` blocks."""
    if path is None:
        return {}
    try:
        cfg = json.loads(Path(path).read_text())
    except OSError as exc:
        raise InputError(f"cannot read config {path}: {exc}") from None
    except json.JSONDecodeError as exc:
        raise InputError(f"config {path} is not valid JSON: {exc}") from None
    if not isinstance(cfg, dict):
        raise InputError(f"config {path} must hold a JSON object")
    unknown = set(cfg) - {"threads", "ga", "threshold_ga"}
    if unknown:
        raise InputError(f"config {path}: unknown keys {sorted(unknown)}")
    return cfg


def _ga(block) -> GaConfig:
    if block is None:
        return GaConfig()
    try:
        return GaConfig(**block)
    except TypeError as exc:
        raise InputError(f"bad GA config: {exc}") from None


def resolve_threads(args, cfg) -> int:
    if getattr(args, "threads", None) is not None:
        n = args.threads
    elif "threads" in cfg:
        n = cfg["threads"]
    else:
        n = default_threads()
    if not isinstance(n, int) or n < 1:
        raise InputError(f"threads must be a positive integer, got {n!r}")
    return n


# -- reports -------------------------------------------------------------------


def quality_rows(a, b) -> list[tuple[str, float]]:
    q = quality_report(a, b)
    rows = [("psnr", q.psnr), ("ssim", q.ssim)]
    if np.asarray(a).ndim == 3:
        rows.append(("ssim_volumetric", q.ssim_volumetric))
        for name, p, s in zip("rgb", q.plane_psnr, q.plane_ssim):
            rows += [(f"psnr_{name}", p), (f"ssim_{name}", s)]
    return rows


def emit_report(rows, path=None) -> None:
    for k, v in rows:
        print(f"{k}: {v:.6g}" if isinstance(v, float) else f"{k}: {v}")
    if path is not None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["metric", "value"])
            w.writerows(rows)


def _keys_with_key7(path):
    keys = read_keyfile(path)
    if keys.key7 is None:
        raise KeyValidationError(f"{path} has no key7; run 'trlg embed' first")
    return keys


# -- commands ------------------------------------------------------------------


def cmd_keygen(args) -> int:
    write_keyfile(args.out, generate_keychain(args.seed))
    print(f"wrote {args.out}")
    return EXIT_OK


def cmd_embed(args) -> int:
    cfg = load_config(args.config)
    threads = resolve_threads(args, cfg)
    host = load_image(args.input, multiple=embedder.MULTIPLE, pad=args.pad)
    keys = read_keyfile(args.keys)
    res = embedder.embed(host, keys, ga_cfg=_ga(cfg.get("ga")), threshold_cfg=_ga(cfg.get("threshold_ga")),
                         threads=threads)
    save_image(args.output, res.image)
    write_keyfile(args.keys_out or args.keys, res.keys)
    rows = quality_rows(host, res.image) + [("key7", res.keys.key7.hex())]
    emit_report(rows, args.report)
    return EXIT_OK


def cmd_verify(args) -> int:
    img = load_image(args.input, multiple=embedder.MULTIPLE)
    keys = _keys_with_key7(args.keys)
    tr = recovery.authenticate(img, keys, closing=not args.no_closing)
    if args.map:
        save_image(args.map, recovery.render_tamper_map(tr.tamper))
    n = int(tr.tamper.sum())
    rows = [("tampered_blocks", n), ("total_blocks", int(tr.tamper.size)),
            ("tampered_fraction", n / tr.tamper.size), ("raw_mismatches", int(tr.raw.sum()))]
    emit_report(rows, args.report)
    return EXIT_OK


def cmd_recover(args) -> int:
    img = load_image(args.input, multiple=embedder.MULTIPLE)
    keys = _keys_with_key7(args.keys)
    res = recovery.recover(img, keys)
    save_image(args.output, res.image)
    if args.tamper_map:
        save_image(args.tamper_map, recovery.render_tamper_map(res.tamper))
    if args.recovery_map:
        save_image(args.recovery_map, recovery.render_recovery_map(res.recovery_map))
    counts = np.bincount(res.recovery_map.ravel(), minlength=len(recovery.Source))
    rows = [("tampered_blocks", int(res.tamper.sum()))]
    rows += [(f"blocks_{s.name.lower()}", int(counts[s])) for s in recovery.Source]
    if args.original:
        orig = load_image(args.original, multiple=embedder.MULTIPLE)
        if orig.shape != img.shape:
            raise InputError(f"original {orig.shape} and input {img.shape} differ in shape")
        rows += quality_rows(orig, res.image)
    emit_report(rows, args.report)
    return EXIT_OK


def _parse_rect(text):
    if text is None:
        return None
    try:
        vals = tuple(int(v) for v in text.split(","))
    except ValueError:
        raise InputError(f"--rect expects top,left,bottom,right integers, got {text!r}") from None
    if len(vals) != 4:
        raise InputError("--rect expects four integers")
    return vals


def cmd_attack(args) -> int:
    img = load_image(args.input, multiple=2)
    donor = load_image(args.donor, multiple=2) if args.donor else None
    region = "rect" if args.rect else args.region
    spec = attacks.AttackSpec(args.kind, args.rate, region, _parse_rect(args.rect), args.seed)
    res = attacks.apply_attack(img, spec, donor)
    save_image(args.output, res.image)
    if args.mask:
        save_image(args.mask, recovery.render_tamper_map(res.mask))
    emit_report([("modified_blocks", int(res.mask.sum())), ("total_blocks", int(res.mask.size)),
                 ("region", ",".join(map(str, res.region)))], args.report)
    return EXIT_OK


def cmd_report(args) -> int:
    img = load_image(args.image, multiple=4)
    rows = []
    if args.original:
        orig = load_image(args.original, multiple=4)
        if orig.shape != img.shape:
            raise InputError(f"original {orig.shape} and image {img.shape} differ in shape")
        rows += quality_rows(orig, img)
    if args.digest_dir:
        out = Path(args.digest_dir)
        out.mkdir(parents=True, exist_ok=True)
        cfg = load_config(args.config)
        th = optimize_thresholds(luminance(img), _ga(cfg.get("threshold_ga")).with_(threads=resolve_threads(args, cfg)))
        d = digest.generate_primary(img, th)
        save_image(out / "primary.png", digest.primary_preview(d))
        sec = digest.generate_secondary(img)
        for k, b in enumerate(sec.bits):
            save_image(out / f"secondary_{k}.png", (b * 255).astype(np.uint8))
            save_image(out / f"secondary_{k}_inverse.png", inverse_halftone(b))
        rows.append(("digest_dir", str(out)))
    if not rows:
        raise InputError("nothing to report: give --original and/or --digest-dir")
    emit_report(rows, args.report)
    return EXIT_OK


# -- parser --------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="trlg", description="Fragile self-recovery watermarking.")
    p.add_argument("--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, config=False):
        sp.add_argument("--report", help="also write the report as CSV")
        if config:
            sp.add_argument("--config", help="JSON config (threads, ga, threshold_ga)")
            sp.add_argument("--threads", type=int, help="worker threads (default: TRLG_THREADS or 1)")

    s = sub.add_parser("keygen", help="write a fresh key file")
    s.add_argument("--out", required=True)
    s.add_argument("--seed", type=int, help="RNG seed (OS entropy if omitted)")
    s.set_defaults(func=cmd_keygen)

    s = sub.add_parser("embed", help="watermark an image")
    s.add_argument("--input", required=True)
    s.add_argument("--keys", required=True)
    s.add_argument("--output", required=True)
    s.add_argument("--keys-out", help="where to write the key file with key7 (default: overwrite --keys)")
    s.add_argument("--pad", action="store_true", help="edge-pad the host to a multiple of 16")
    common(s, config=True)
    s.set_defaults(func=cmd_embed)

    s = sub.add_parser("verify", help="authenticate an image and write its tamper map")
    s.add_argument("--input", required=True)
    s.add_argument("--keys", required=True)
    s.add_argument("--map", help="tamper-map PNG (white = tampered)")
    s.add_argument("--no-closing", action="store_true", help="skip the morphological closing")
    common(s)
    s.set_defaults(func=cmd_verify)

    s = sub.add_parser("recover", help="repair tampered regions")
    s.add_argument("--input", required=True)
    s.add_argument("--keys", required=True)
    s.add_argument("--output", required=True)
    s.add_argument("--tamper-map")
    s.add_argument("--recovery-map", help="colour-coded provenance PNG")
    s.add_argument("--original", help="reference image for a quality report")
    common(s)
    s.set_defaults(func=cmd_recover)

    s = sub.add_parser("attack", help="simulate tampering")
    s.add_argument("--input", required=True)
    s.add_argument("--output", required=True)
    s.add_argument("--mask", help="ground-truth mask PNG at 2x2-block resolution")
    s.add_argument("--kind", choices=attacks.KINDS, default="splice")
    s.add_argument("--rate", type=float, default=0.1)
    s.add_argument("--region", choices=[r for r in attacks.REGIONS if r != "rect"], default="center")
    s.add_argument("--rect", help="explicit top,left,bottom,right (overrides --region)")
    s.add_argument("--donor", help="second image, needed for collage/VQ/protocol")
    s.add_argument("--seed", type=int, default=0)
    common(s)
    s.set_defaults(func=cmd_attack)

    s = sub.add_parser("report", help="quality metrics and digest dumps")
    s.add_argument("--image", required=True)
    s.add_argument("--original")
    s.add_argument("--digest-dir", help="dump primary/secondary digests as PNG")
    common(s, config=True)
    s.set_defaults(func=cmd_report)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s %(message)s")
    try:
        return args.func(args)
    except KeyValidationError as exc:
        print(f"trlg: key error: {exc}", file=sys.stderr)
        return EXIT_KEY
    except (InputError, ImageFormatError, DimensionError, attacks.AttackError, OSError, ValueError) as exc:
        print(f"trlg: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except Exception as exc:  # pragma: no cover - last resort
        log.debug("internal error", exc_info=True)
        print(f"trlg: internal error: {exc}", file=sys.stderr)
        return EXIT_INTERNAL


if __name__ == "__main__":
    sys.exit(main())
