"""Batch front end: file I/O, config parsing, and the four run modes.

Images travel as binary PGM (P5, 8- or 16-bit, normalized to [0, 1] on
load); masks as binary PGM with 0/255 values; contour overlays as binary
PPM (P6) with the inner contour in red and the outer in green.  Configs
are flat ``key = value`` text files (``#`` comments) addressing every
tunable field, e.g. ``endo.mu = 0.2`` or ``ellipse.cx = 63.5``.

Modes:

* ``segment`` — run the two-stage pipeline on one image, writing masks,
  an overlay, optional snapshots, and a metrics CSV when labels are given.
* ``ablate-preproc`` — run the inner stage once per preprocessing
  selection (six fixed arms) at a shared iteration budget.
* ``compare-baseline`` — run the distance-regularized pipeline and the
  reinitialization baseline side by side.
* ``phantom`` — generate a synthetic phantom and segment it end to end.

Every output is reproducible byte-for-byte from the inputs; the only
non-deterministic CSV column is ``wall_ms``.  Failures exit with code 2
(invalid input/config), 3 (numeric failure), or 4 (containment failure)
and leave a machine-readable ``error.json`` in the output directory.
"""

import argparse
import csv
import dataclasses
import json
import sys
import time
from dataclasses import dataclass
from pathlib import Path
from typing import Optional

import numpy as np

from . import metrics
from .errors import InvalidArgumentError, ParseError, ToolError
from .imgrid import EllipseSpec
from .pipeline import (
    PREPROC_CHOICES,
    CaseConfig,
    make_phantom,
    segment_endocardium,
    segment_endocardium_baseline,
    segment_epicardium,
    segment_epicardium_baseline,
)
from .preproc import BilateralParams, WienerParams
from .drlse import DrlseParams

CSV_COLUMNS = ("case", "stage", "preproc", "method",
               "dice", "hausdorff", "pa", "mcc", "iterations", "wall_ms")


# ---------------------------------------------------------------------------
# PGM / PPM I/O

def _header_tokens(data, path, count):
    """Parse ``count`` whitespace-separated header tokens (honoring '#'
    comments) from raw netpbm bytes; returns (tokens, raster_offset)."""
    tokens = []
    i, n = 0, len(data)
    while len(tokens) < count:
        while i < n and data[i:i + 1].isspace():
            i += 1
        if i < n and data[i:i + 1] == b"#":
            while i < n and data[i:i + 1] != b"\n":
                i += 1
            continue
        if i >= n:
            raise ParseError(f"{path}: truncated header")
        j = i
        while j < n and not data[j:j + 1].isspace() and data[j:j + 1] != b"#":
            j += 1
        tokens.append(data[i:j])
        i = j
    if i >= n or not data[i:i + 1].isspace():
        raise ParseError(f"{path}: malformed header")
    return tokens, i + 1


def _load_pgm(path):
    """Decode a binary PGM (P5) into a uint array plus its maxval."""
    p = Path(path)
    if not p.is_file():
        raise ParseError(f"{p}: no such file")
    data = p.read_bytes()
    tokens, offset = _header_tokens(data, p, 4)
    magic = tokens[0]
    if magic == b"P6":
        raise ParseError(f"{p}: multi-channel PPM given where grayscale expected")
    if magic != b"P5":
        raise ParseError(f"{p}: unsupported format {magic!r} (want binary PGM 'P5')")
    try:
        width, height, maxval = (int(t) for t in tokens[1:4])
    except ValueError:
        raise ParseError(f"{p}: non-numeric header fields") from None
    if width < 1 or height < 1 or not (0 < maxval < 65536):
        raise ParseError(f"{p}: bad dimensions or maxval in header")
    dtype = np.dtype(">u2") if maxval > 255 else np.dtype("u1")
    need = width * height * dtype.itemsize
    raster = data[offset:offset + need]
    if len(raster) < need:
        raise ParseError(f"{p}: truncated raster "
                         f"(expected {need} bytes, got {len(raster)})")
    arr = np.frombuffer(raster, dtype=dtype).reshape(height, width)
    return arr, maxval


def load_gray(path):
    """Load a grayscale image from binary PGM, normalized to [0, 1] by
    the file's declared maximum value."""
    arr, maxval = _load_pgm(path)
    return arr.astype(float) / float(maxval)


def load_mask(path):
    """Load a binary mask from PGM; any nonzero sample is foreground."""
    arr, _ = _load_pgm(path)
    return arr > 0


def save_gray(img, path):
    """Write a [0, 1] image as 8-bit binary PGM."""
    arr = np.clip(np.asarray(img, dtype=float), 0.0, 1.0)
    out = np.rint(arr * 255.0).astype(np.uint8)
    height, width = out.shape
    with open(path, "wb") as fh:
        fh.write(b"P5\n%d %d\n255\n" % (width, height))
        fh.write(out.tobytes())


def save_mask(mask, path):
    """Write a boolean mask as binary PGM with values 0/255."""
    m = np.asarray(mask, dtype=bool)
    out = np.where(m, np.uint8(255), np.uint8(0))
    height, width = out.shape
    with open(path, "wb") as fh:
        fh.write(b"P5\n%d %d\n255\n" % (width, height))
        fh.write(out.tobytes())


def _draw_chains(rgb, chains, color):
    """Rasterize point chains onto an RGB buffer by sampling each segment
    at its endpoints and midpoint (chain points are at most ~1.4 px
    apart, so this leaves no visible gaps)."""
    height, width = rgb.shape[:2]
    for chain in chains:
        pts = np.asarray(chain, dtype=float).reshape(-1, 2)
        if len(pts) == 0:
            continue
        if len(pts) == 1:
            samples = pts
        else:
            mids = 0.5 * (pts[:-1] + pts[1:])
            samples = np.vstack([pts, mids])
        xs = np.clip(np.rint(samples[:, 0]).astype(int), 0, width - 1)
        ys = np.clip(np.rint(samples[:, 1]).astype(int), 0, height - 1)
        rgb[ys, xs] = color


def save_overlay(img, endo_contours, epi_contours, path):
    """Write the image as PPM with the inner contour drawn red and the
    outer contour drawn green.  Empty contour lists yield a plain
    grayscale-to-RGB conversion."""
    arr = np.clip(np.asarray(img, dtype=float), 0.0, 1.0)
    gray = np.rint(arr * 255.0).astype(np.uint8)
    rgb = np.repeat(gray[:, :, None], 3, axis=2)
    _draw_chains(rgb, endo_contours or [], np.array([255, 0, 0], dtype=np.uint8))
    _draw_chains(rgb, epi_contours or [], np.array([0, 255, 0], dtype=np.uint8))
    height, width = gray.shape
    with open(path, "wb") as fh:
        fh.write(b"P6\n%d %d\n255\n" % (width, height))
        fh.write(rgb.tobytes())


# ---------------------------------------------------------------------------
# Config files

def parse_config(path):
    """Parse a flat ``key = value`` config file into an ordered dict.

    Blank lines and ``#`` comments are skipped; later occurrences of a
    key override earlier ones.
    """
    p = Path(path)
    if not p.is_file():
        raise ParseError(f"{p}: no such config file")
    values = {}
    for lineno, line in enumerate(p.read_text().splitlines(), start=1):
        stripped = line.strip()
        if not stripped or stripped.startswith("#"):
            continue
        if "=" not in stripped:
            raise ParseError(f"{p}:{lineno}: expected 'key = value', got {line!r}")
        key, _, raw = stripped.partition("=")
        values[key.strip()] = raw.strip()
    return values


_FLOAT_KEYS_STAGE = ("mu", "lambda", "alpha", "epsilon", "sigma", "timestep")
_INT_KEYS_STAGE = ("iters", "smooth_every")


def _convert(key, raw, kind):
    try:
        return kind(raw)
    except ValueError:
        raise ParseError(f"config key {key!r}: cannot parse {raw!r}") from None


def build_case_config(values) -> CaseConfig:
    """Materialize a CaseConfig from parsed key/value strings, leaving
    unmentioned fields at their defaults.  Unknown keys are rejected."""
    top = {}
    stage_overrides = {"endo": {}, "epi": {}}
    ellipse = {}
    bilateral = {}
    wiener = {}
    for key, raw in values.items():
        if key == "preproc":
            top["preproc"] = raw
        elif key in ("c0", "edge_scale"):
            top[key] = _convert(key, raw, float)
        elif key in ("epi_dilate_px", "snapshot_every"):
            top[key] = _convert(key, raw, int)
        elif key == "baseline.reinit_every":
            top["baseline_reinit_every"] = _convert(key, raw, int)
        elif key == "baseline.gamma":
            top["baseline_gamma"] = _convert(key, raw, float)
        elif key.startswith("ellipse."):
            field = key.split(".", 1)[1]
            if field not in ("cx", "cy", "rx", "ry"):
                raise ParseError(f"unknown config key {key!r}")
            ellipse[field] = _convert(key, raw, float)
        elif key.startswith(("endo.", "epi.")):
            stage, field = key.split(".", 1)
            if field in _FLOAT_KEYS_STAGE:
                attr = "lam" if field == "lambda" else field
                stage_overrides[stage][attr] = _convert(key, raw, float)
            elif field in _INT_KEYS_STAGE:
                stage_overrides[stage][field] = _convert(key, raw, int)
            else:
                raise ParseError(f"unknown config key {key!r}")
        elif key == "bilateral.half_window":
            bilateral["half_window"] = _convert(key, raw, int)
        elif key in ("bilateral.sigma_s", "bilateral.sigma_r"):
            bilateral[key.split(".", 1)[1]] = _convert(key, raw, float)
        elif key == "wiener.half_window":
            wiener["half_window"] = _convert(key, raw, int)
        elif key == "wiener.noise_variance":
            wiener["noise_variance"] = (
                None if raw == "estimate" else _convert(key, raw, float)
            )
        else:
            raise ParseError(f"unknown config key {key!r}")

    if ellipse:
        defaults = CaseConfig().ellipse
        merged = {f: ellipse.get(f, getattr(defaults, f))
                  for f in ("cx", "cy", "rx", "ry")}
        top["ellipse"] = EllipseSpec(**merged)
    if stage_overrides["endo"]:
        top["endo"] = DrlseParams(**stage_overrides["endo"])
    if stage_overrides["epi"]:
        top["epi"] = DrlseParams(**stage_overrides["epi"])
    if bilateral:
        top["bilateral"] = BilateralParams(**bilateral)
    if wiener:
        top["wiener"] = WienerParams(**wiener)
    return CaseConfig(**top)


# ---------------------------------------------------------------------------
# Run manifest and modes

@dataclass
class RunManifest:
    """One batch invocation: the mode, the input/output paths, and the
    phantom-generation knobs used by the ``phantom`` mode."""

    mode: str
    out_dir: str
    image: Optional[str] = None
    config: Optional[str] = None
    label_endo: Optional[str] = None
    label_epi: Optional[str] = None
    snapshot_every: Optional[int] = None
    size: int = 128
    seed: int = 7
    noise_sigma: float = 0.05


def _metric_cell(value):
    return "NA" if value is None else f"{value:.6f}"


def _csv_row(case, stage, preproc, method, rep, iterations, wall_ms):
    if rep is None:
        rep = metrics.MetricsReport(dice=None, hausdorff=None, pa=None, mcc=None)
    return {
        "case": case,
        "stage": stage,
        "preproc": preproc,
        "method": method,
        "dice": _metric_cell(rep.dice),
        "hausdorff": _metric_cell(rep.hausdorff),
        "pa": _metric_cell(rep.pa),
        "mcc": _metric_cell(rep.mcc),
        "iterations": str(iterations),
        "wall_ms": str(wall_ms),
    }


def _write_csv(path, rows):
    with open(path, "w", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=CSV_COLUMNS)
        writer.writeheader()
        writer.writerows(rows)


def _load_config_for(manifest) -> CaseConfig:
    if manifest.config is not None:
        cfg = build_case_config(parse_config(manifest.config))
    else:
        cfg = CaseConfig()
    if manifest.snapshot_every is not None:
        cfg = dataclasses.replace(cfg, snapshot_every=manifest.snapshot_every)
    return cfg


def _load_labels_for(manifest, img):
    """Load whichever label masks the manifest names, checking their
    dimensions against the working image up front."""
    labels = []
    for role, path in (("endo", manifest.label_endo), ("epi", manifest.label_epi)):
        if path is None:
            labels.append(None)
            continue
        mask = load_mask(path)
        if mask.shape != img.shape:
            raise InvalidArgumentError(
                f"{role} label {mask.shape} does not match image {img.shape} "
                f"(from {path})"
            )
        labels.append(mask)
    if labels[0] is None and labels[1] is None:
        return None
    return tuple(labels)


def _snapshot_writer(img, out_dir):
    def write(stage, iteration, contours):
        endo = contours if stage == "endo" else []
        epi = contours if stage == "epi" else []
        save_overlay(img, endo, epi,
                     out_dir / f"snapshot_{stage}_{iteration:03d}.ppm")
    return write


def _timed(fn, *args, **kwargs):
    start = time.perf_counter()
    result = fn(*args, **kwargs)
    wall_ms = int(round((time.perf_counter() - start) * 1000.0))
    return result, wall_ms


def _segment_case(img, labels, cfg, case, out_dir, write_masks=True):
    """Run both stages with per-stage timing, write the standard
    artifacts, and return the CSV rows."""
    on_snapshot = _snapshot_writer(img, out_dir) if cfg.snapshot_every else None
    endo_res, endo_ms = _timed(segment_endocardium, img, cfg, on_snapshot)
    epi_res, epi_ms = _timed(segment_epicardium, img, endo_res.mask, cfg, on_snapshot)
    if write_masks:
        save_mask(endo_res.mask, out_dir / "endo_mask.pgm")
        save_mask(epi_res.mask, out_dir / "epi_mask.pgm")
        save_overlay(img, endo_res.contour, epi_res.contour, out_dir / "overlay.ppm")
    rows = []
    if labels is not None:
        endo_label, epi_label = labels
        rep_endo = metrics.report(endo_res.mask, endo_label) if endo_label is not None else None
        rep_epi = metrics.report(epi_res.mask, epi_label) if epi_label is not None else None
        rows.append(_csv_row(case, "endo", cfg.preproc, "drlse",
                             rep_endo, endo_res.iterations_run, endo_ms))
        rows.append(_csv_row(case, "epi", cfg.preproc, "drlse",
                             rep_epi, epi_res.iterations_run, epi_ms))
    return rows


def _run_segment(manifest, out_dir):
    img = load_gray(manifest.image)
    cfg = _load_config_for(manifest)
    labels = _load_labels_for(manifest, img)
    case = Path(manifest.image).stem
    rows = _segment_case(img, labels, cfg, case, out_dir)
    if rows:
        _write_csv(out_dir / "metrics.csv", rows)


def _run_ablate(manifest, out_dir):
    img = load_gray(manifest.image)
    cfg = _load_config_for(manifest)
    labels = _load_labels_for(manifest, img)
    endo_label = labels[0] if labels is not None else None
    case = Path(manifest.image).stem
    rows = []
    for name in PREPROC_CHOICES:
        arm_cfg = dataclasses.replace(cfg, preproc=name)
        result, wall_ms = _timed(segment_endocardium, img, arm_cfg)
        save_mask(result.mask, out_dir / f"endo_mask_{name}.pgm")
        rep = metrics.report(result.mask, endo_label) if endo_label is not None else None
        rows.append(_csv_row(case, "endo", name, "drlse",
                             rep, result.iterations_run, wall_ms))
    _write_csv(out_dir / "ablation.csv", rows)


def _run_compare(manifest, out_dir):
    img = load_gray(manifest.image)
    cfg = _load_config_for(manifest)
    labels = _load_labels_for(manifest, img)
    endo_label, epi_label = labels if labels is not None else (None, None)
    case = Path(manifest.image).stem

    endo_d, endo_d_ms = _timed(segment_endocardium, img, cfg)
    epi_d, epi_d_ms = _timed(segment_epicardium, img, endo_d.mask, cfg)
    endo_b, endo_b_ms = _timed(segment_endocardium_baseline, img, cfg)
    epi_b, epi_b_ms = _timed(segment_epicardium_baseline, img, endo_b.mask, cfg)

    save_mask(endo_d.mask, out_dir / "endo_mask_drlse.pgm")
    save_mask(epi_d.mask, out_dir / "epi_mask_drlse.pgm")
    save_mask(endo_b.mask, out_dir / "endo_mask_lsf.pgm")
    save_mask(epi_b.mask, out_dir / "epi_mask_lsf.pgm")
    save_overlay(img, endo_d.contour, epi_d.contour, out_dir / "overlay_drlse.ppm")
    save_overlay(img, endo_b.contour, epi_b.contour, out_dir / "overlay_lsf.ppm")

    def rep(mask, label):
        return metrics.report(mask, label) if label is not None else None

    rows = [
        _csv_row(case, "endo", cfg.preproc, "drlse",
                 rep(endo_d.mask, endo_label), endo_d.iterations_run, endo_d_ms),
        _csv_row(case, "epi", cfg.preproc, "drlse",
                 rep(epi_d.mask, epi_label), epi_d.iterations_run, epi_d_ms),
        _csv_row(case, "endo", cfg.preproc, "lsf",
                 rep(endo_b.mask, endo_label), endo_b.iterations_run, endo_b_ms),
        _csv_row(case, "epi", cfg.preproc, "lsf",
                 rep(epi_b.mask, epi_label), epi_b.iterations_run, epi_b_ms),
    ]
    _write_csv(out_dir / "comparison.csv", rows)


def _run_phantom(manifest, out_dir):
    scale = manifest.size / 128.0
    img, endo_label, epi_label = make_phantom(
        size=manifest.size,
        r_inner=30.0 * scale,
        r_outer=45.0 * scale,
        noise_sigma=manifest.noise_sigma,
        seed=manifest.seed,
    )
    save_gray(img, out_dir / "phantom.pgm")
    save_mask(endo_label, out_dir / "label_endo.pgm")
    save_mask(epi_label, out_dir / "label_epi.pgm")
    cfg = _load_config_for(manifest)
    explicit_ellipse = (manifest.config is not None
                        and any(k.startswith("ellipse.")
                                for k in parse_config(manifest.config)))
    if not explicit_ellipse:
        center = (manifest.size - 1) / 2.0
        cfg = dataclasses.replace(
            cfg, ellipse=EllipseSpec(cx=center, cy=center,
                                     rx=15.0 * scale, ry=15.0 * scale))
    rows = _segment_case(img, (endo_label, epi_label), cfg, "phantom", out_dir)
    _write_csv(out_dir / "metrics.csv", rows)


def run(manifest: RunManifest):
    """Execute one manifest; returns the process exit code and leaves a
    machine-readable ``error.json`` in the output directory on failure."""
    out_dir = Path(manifest.out_dir)
    try:
        out_dir.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        print(f"drlseg: cannot create output directory: {exc}", file=sys.stderr)
        return 2
    try:
        if manifest.mode == "segment":
            _run_segment(manifest, out_dir)
        elif manifest.mode == "ablate-preproc":
            _run_ablate(manifest, out_dir)
        elif manifest.mode == "compare-baseline":
            _run_compare(manifest, out_dir)
        elif manifest.mode == "phantom":
            _run_phantom(manifest, out_dir)
        else:
            raise InvalidArgumentError(f"unknown mode {manifest.mode!r}")
        return 0
    except ToolError as exc:
        _record_error(out_dir, exc.kind, str(exc), exc.exit_code)
        return exc.exit_code
    except OSError as exc:
        _record_error(out_dir, "io", str(exc), 2)
        return 2


def _record_error(out_dir, kind, message, exit_code):
    record = {"error": kind, "message": message, "exit_code": exit_code}
    try:
        with open(out_dir / "error.json", "w") as fh:
            json.dump(record, fh, indent=2, sort_keys=True)
            fh.write("\n")
    except OSError:
        pass
    print(f"drlseg: {kind}: {message}", file=sys.stderr)


def main(argv=None):
    """Command-line entry point; returns the process exit code."""
    parser = argparse.ArgumentParser(
        prog="drlseg",
        description="Two-stage level-set segmentation of concentric boundaries.",
    )
    sub = parser.add_subparsers(dest="mode", required=True)

    def add_io_args(p, snapshots=False):
        p.add_argument("--image", required=True, help="input image (binary PGM)")
        p.add_argument("--config", required=True, help="key = value config file")
        p.add_argument("--label-endo", help="inner-boundary label mask (PGM)")
        p.add_argument("--label-epi", help="outer-boundary label mask (PGM)")
        p.add_argument("--out", required=True, help="output directory")
        if snapshots:
            p.add_argument("--snapshot-every", type=int, default=None,
                           help="write a contour snapshot every N iterations")

    add_io_args(sub.add_parser(
        "segment", help="segment one image with the two-stage pipeline"),
        snapshots=True)
    add_io_args(sub.add_parser(
        "ablate-preproc", help="run the inner stage once per preprocessing arm"))
    add_io_args(sub.add_parser(
        "compare-baseline",
        help="run the pipeline and the reinitialization baseline side by side"))

    ph = sub.add_parser("phantom",
                        help="generate a synthetic phantom and segment it")
    ph.add_argument("--size", type=int, default=128, help="phantom side length")
    ph.add_argument("--seed", type=int, default=7, help="noise seed")
    ph.add_argument("--noise-sigma", type=float, default=0.05,
                    help="noise standard deviation")
    ph.add_argument("--config", help="optional key = value config file")
    ph.add_argument("--out", required=True, help="output directory")
    ph.add_argument("--snapshot-every", type=int, default=None,
                    help="write a contour snapshot every N iterations")

    args = parser.parse_args(argv)
    manifest = RunManifest(
        mode=args.mode,
        out_dir=args.out,
        image=getattr(args, "image", None),
        config=getattr(args, "config", None),
        label_endo=getattr(args, "label_endo", None),
        label_epi=getattr(args, "label_epi", None),
        snapshot_every=getattr(args, "snapshot_every", None),
        size=getattr(args, "size", 128),
        seed=getattr(args, "seed", 7),
        noise_sigma=getattr(args, "noise_sigma", 0.05),
    )
    return run(manifest)


if __name__ == "__main__":
    sys.exit(main())
