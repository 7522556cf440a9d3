"""Command-line front end: ``phasemark embed|extract|attack|evaluate|synth``.

Every command exits 0 on success and 1 with a one-line message on any error.
"""

from __future__ import annotations

import math
import sys
import time
from pathlib import Path

import click

from . import transforms
from .attacks import ATTACKS, AttackSpec
from .embed import DEFAULT_SELECTED, EmbedConfig, embed_clip
from .extract import extract_clip
from .metrics import RunReport, bit_errors, clip_psnr, normalized_correlation, reports_to_csv
from .payload import KeySet, load_logo, write_pbm
from .synthetic import CLIP_KINDS, synthetic_clip, synthetic_logo
from .video import DEFAULT_SCENE_THRESHOLD, QCIF_HEIGHT, QCIF_WIDTH, read_yuv420, write_pgm, write_yuv420

# Default evaluate matrix: the single-frame attacks plus the temporal ones
DEFAULT_ATTACKS = (
    AttackSpec("None"),
    AttackSpec("Resize"),
    AttackSpec("Rotate90RoundTrip"),
    AttackSpec("CropQuarter"),
    AttackSpec("CropCenterKeep"),
    AttackSpec("Paint"),
    AttackSpec("GaussianLowpass"),
    AttackSpec("Sharpen"),
    AttackSpec("GaussianNoise"),
    AttackSpec("SaltPepper"),
    AttackSpec("PhasePerturb"),
    AttackSpec("HistEq"),
    AttackSpec("IntraCompress", {"quality": 100}),
    AttackSpec("IntraCompress", {"quality": 75}),
    AttackSpec("IntraCompress", {"quality": 50}),
    AttackSpec("FrameDrop"),
    AttackSpec("FrameAverage"),
    AttackSpec("FrameSwap"),
)


def _geometry(f):
    f = click.option("--width", default=QCIF_WIDTH, show_default=True, help="Frame width in pixels.")(f)
    f = click.option("--height", default=QCIF_HEIGHT, show_default=True, help="Frame height in pixels.")(f)
    return f


def _keys(f):
    f = click.option("--seed-scramble", default=2, show_default=True, help="PN scrambling seed.")(f)
    f = click.option("--seed-block-order", default=0, show_default=True, help="Chip layout seed.")(f)
    f = click.option("--seed-frame-select", default=0, show_default=True, help="Reserved key; recorded only.")(f)
    return f


def _embedding(f):
    f = click.option("--transform", type=click.Choice(transforms.KINDS), default=transforms.SCHT, show_default=True)(f)
    f = click.option("--T", "threshold", type=float, default=None, help="Boost threshold (default 10 DFT, 13 SCHT).")(f)
    f = click.option("--selected", default=DEFAULT_SELECTED, show_default=True, help="Blocks selected per frame.")(f)
    f = click.option("--guard", default=0, show_default=True, help="Extra embedded blocks past the selection.")(f)
    f = click.option("--scene-threshold", default=DEFAULT_SCENE_THRESHOLD, show_default=True)(f)
    return f


def _config(transform, threshold, selected, guard, scene_threshold, seed_scramble, seed_block_order, seed_frame_select):
    keys = KeySet(seed_scramble, seed_block_order, seed_frame_select)
    return EmbedConfig(transform, threshold, selected, keys, scene_threshold, guard)


def _fmt_db(value: float) -> str:
    return "inf" if math.isinf(value) else f"{value:.2f} dB"


class _Group(click.Group):
    def invoke(self, ctx):
        try:
            return super().invoke(ctx)
        except (ValueError, TypeError, OSError) as exc:
            raise click.ClickException(str(exc)) from exc


@click.group(cls=_Group)
def main():
    """Blind phase-domain watermarking of raw I420 video."""


@main.command()
@click.argument("clip_in", type=click.Path(exists=True, dir_okay=False))
@click.argument("logo", type=click.Path(exists=True, dir_okay=False))
@click.argument("clip_out", type=click.Path(dir_okay=False))
@_geometry
@_keys
@_embedding
@click.option("--dump-pgm", type=click.Path(file_okay=False), default=None, help="Write watermarked luma planes here.")
def embed(clip_in, logo, clip_out, width, height, dump_pgm, **opts):
    """Embed LOGO (36x44 PBM) into CLIP_IN and write CLIP_OUT."""
    cfg = _config(**opts)
    clip = read_yuv420(clip_in, width, height)
    marked = embed_clip(clip, load_logo(logo), cfg)
    write_yuv420(marked, clip_out)
    if dump_pgm:
        _dump(marked, dump_pgm)
    per_frame, mean, inf_frames = clip_psnr(clip, marked)
    click.echo(f"embedded {len(clip)} frames with {cfg.transform} T={cfg.T:g}")
    click.echo(f"PSNR mean {_fmt_db(mean)}, min {_fmt_db(min(per_frame))}, {inf_frames} unchanged frames")


@main.command()
@click.argument("clip_in", type=click.Path(exists=True, dir_okay=False))
@click.argument("logo_out", type=click.Path(dir_okay=False))
@_geometry
@_keys
@_embedding
@click.option("--reference", type=click.Path(exists=True, dir_okay=False), default=None, help="Original logo for NC/eBits.")
def extract(clip_in, logo_out, width, height, reference, **opts):
    """Recover the logo from CLIP_IN and write it to LOGO_OUT as PBM."""
    cfg = _config(**opts)
    result = extract_clip(read_yuv420(clip_in, width, height), cfg)
    write_pbm(logo_out, result.logo)
    diag = result.diagnostics()
    click.echo(f"scenes {diag['scenes']}, slots covered {diag['slots_covered']}/{result.accumulator.sums.size}")
    click.echo(f"chips per slot {diag['min_chips_per_slot']}..{diag['max_chips_per_slot']}")
    click.echo(f"mean bit confidence {diag['mean_confidence']:.4f}")
    click.echo("confidence histogram " + " ".join(str(c) for c in diag["confidence_histogram"]))
    if reference:
        ref = load_logo(reference)
        click.echo(f"eBits {bit_errors(ref, result.logo)}  NC {normalized_correlation(ref, result.logo):.4f}")


def _parse_params(items) -> dict:
    params = {}
    for item in items:
        key, sep, value = item.partition("=")
        if not sep:
            raise ValueError(f"--param expects key=value, got {item!r}")
        params[key] = _number(key, value)
    return params


def _number(key: str, value: str):
    if key == "path":
        return value
    try:
        return int(value)
    except ValueError:
        return float(value)


@main.command()
@click.argument("clip_in", type=click.Path(exists=True, dir_okay=False))
@click.argument("clip_out", type=click.Path(dir_okay=False))
@_geometry
@click.option("--spec", "spec_file", type=click.Path(exists=True, dir_okay=False), default=None, help="key=value attack file.")
@click.option("--kind", type=click.Choice(list(ATTACKS)), default=None)
@click.option("--param", "params", multiple=True, help="Attack parameter as key=value; repeatable.")
@click.option("--seed", type=int, default=None, help="RNG seed (overrides the spec file).")
@click.option("--transform", type=click.Choice(transforms.KINDS), default=transforms.DFT, show_default=True,
              help="Transform used by PhasePerturb.")
def attack(clip_in, clip_out, width, height, spec_file, kind, params, seed, transform):
    """Apply one attack to CLIP_IN and write CLIP_OUT."""
    if spec_file:
        spec = AttackSpec.from_text(Path(spec_file).read_text())
    elif kind:
        spec = AttackSpec(kind, _parse_params(params))
    else:
        raise click.UsageError("give --spec or --kind")
    if seed is not None:
        spec = AttackSpec(spec.kind, spec.params, seed)
    attacked = spec.apply(read_yuv420(clip_in, width, height), transform)
    write_yuv420(attacked, clip_out)
    click.echo(f"{spec.label} seed={spec.rng_seed}: {len(attacked)} frames")


def load_matrix(text: str) -> tuple[list[str], list[float | None], list[AttackSpec]]:
    """Parse an evaluate matrix.

    ``transforms = dft scht``, ``T = 22`` (or ``T = default``) and one
    ``attack = Kind key=value ... seed=N`` line per attack; ``#`` starts a comment.
    """
    kinds, thresholds, attacks = [], [], []
    for raw in text.splitlines():
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, value = (part.strip() for part in line.partition("="))
        if not sep:
            raise ValueError(f"matrix line needs key = value: {raw!r}")
        if key == "transforms":
            kinds += value.split()
        elif key == "T":
            thresholds += [None if v == "default" else float(v) for v in value.split()]
        elif key == "attack":
            name, *pairs = value.split()
            fields = dict(p.split("=", 1) for p in pairs)
            seed = int(fields.pop("seed", 0))
            attacks.append(AttackSpec(name, {k: _number(k, v) for k, v in fields.items()}, seed))
        else:
            raise ValueError(f"unknown matrix key {key!r}")
    for k in kinds:
        if k not in transforms.KINDS:
            raise ValueError(f"unknown transform {k!r}")
    return kinds or list(transforms.KINDS), thresholds or [22.0], attacks or list(DEFAULT_ATTACKS)


def evaluate_matrix(clip, logo, keys, kinds, thresholds, attacks, timing: bool = False, **cfg_extra) -> list[RunReport]:
    """Embed once per (transform, T), then attack and extract for every attack, in matrix order."""
    reports = []
    for kind in kinds:
        ops = transforms.count_ops(kind)
        for threshold in thresholds:
            cfg = EmbedConfig(kind, threshold, keys=keys, **cfg_extra)
            marked = embed_clip(clip, logo, cfg)
            for spec in attacks:
                start = time.perf_counter()
                attacked = spec.apply(marked, kind)
                result = extract_clip(attacked, cfg)
                elapsed = time.perf_counter() - start
                per_frame, mean, inf_frames = clip_psnr(clip, attacked)
                reports.append(
                    RunReport(
                        transform=kind,
                        T=cfg.T,
                        attack=spec.kind,
                        params=";".join(f"{k}={v}" for k, v in sorted(spec.params.items())),
                        seed=spec.rng_seed,
                        ebits=bit_errors(logo, result.logo),
                        nc=normalized_correlation(logo, result.logo),
                        frame_psnr=per_frame,
                        mean_psnr=mean,
                        inf_frames=inf_frames,
                        complex_adds=ops.complex_adds,
                        complex_mults=ops.complex_mults,
                        wall_time=elapsed if timing else None,
                    )
                )
    return reports


@main.command()
@click.argument("clip_in", type=click.Path(exists=True, dir_okay=False))
@click.argument("logo", type=click.Path(exists=True, dir_okay=False))
@click.argument("report", type=click.Path(dir_okay=False))
@_geometry
@_keys
@click.option("--matrix", type=click.Path(exists=True, dir_okay=False), default=None, help="Plain-text matrix file.")
@click.option("--timing/--no-timing", default=False, show_default=True,
              help="Fill the wall_time_s column (makes the CSV run-dependent).")
@click.option("--verbose", is_flag=True, help="Print a text block per cell.")
def evaluate(clip_in, logo, report, width, height, seed_scramble, seed_block_order, seed_frame_select, matrix, timing, verbose):
    """Run transform x T x attack cells on CLIP_IN and write REPORT as CSV.

    PSNR columns compare the attacked clip with the original.
    """
    kinds, thresholds, attacks = load_matrix(Path(matrix).read_text() if matrix else "")
    keys = KeySet(seed_scramble, seed_block_order, seed_frame_select)
    reports = evaluate_matrix(read_yuv420(clip_in, width, height), load_logo(logo), keys, kinds, thresholds, attacks, timing)
    Path(report).write_text(reports_to_csv(reports))
    if verbose:
        for r in reports:
            click.echo(r.text_block() + "\n")
    click.echo(f"{len(reports)} rows written to {report}")


@main.command()
@click.argument("clip_out", type=click.Path(dir_okay=False))
@click.option("--kind", type=click.Choice(CLIP_KINDS), default=CLIP_KINDS[0], show_default=True)
@click.option("--frames", default=36, show_default=True)
@click.option("--seed", default=0, show_default=True)
@click.option("--logo", "logo_out", type=click.Path(dir_okay=False), default=None, help="Also write a synthetic logo.")
def synth(clip_out, kind, frames, seed, logo_out):
    """Write a deterministic synthetic QCIF test clip (and optionally a logo)."""
    write_yuv420(synthetic_clip(kind, frames, seed), clip_out)
    if logo_out:
        write_pbm(logo_out, synthetic_logo(seed))
    click.echo(f"wrote {frames} frames of {kind!r} to {clip_out}")


def _dump(clip, directory) -> None:
    out = Path(directory)
    out.mkdir(parents=True, exist_ok=True)
    for t, frame in enumerate(clip):
        write_pgm(out / f"frame_{t:04d}.pgm", frame.y)


if __name__ == "__main__":
    sys.exit(main())
