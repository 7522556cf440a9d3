import csv

import numpy as np
import pytest
from click.testing import CliRunner

from phasemark.cli import DEFAULT_ATTACKS, evaluate_matrix, load_matrix, main
from phasemark.payload import KeySet, load_logo, write_pbm
from phasemark.synthetic import synthetic_clip, synthetic_logo
from phasemark.video import read_yuv420, write_yuv420


@pytest.fixture
def workdir(tmp_path):
    write_yuv420(synthetic_clip("studio", 12, seed=1), tmp_path / "in.yuv")
    write_pbm(tmp_path / "logo.pbm", synthetic_logo(1))
    return tmp_path


def run(*args):
    return CliRunner().invoke(main, [str(a) for a in args])


class TestHappyPath:
    def test_synth(self, tmp_path):
        res = run("synth", tmp_path / "s.yuv", "--frames", 3, "--logo", tmp_path / "l.pbm")
        assert res.exit_code == 0, res.output
        assert len(read_yuv420(tmp_path / "s.yuv")) == 3
        assert load_logo(tmp_path / "l.pbm").shape == (36, 44)

    @pytest.mark.parametrize("kind", ["dft", "scht"])
    def test_embed_extract(self, workdir, kind):
        res = run("embed", workdir / "in.yuv", workdir / "logo.pbm", workdir / "out.yuv", "--transform", kind,
                  "--dump-pgm", workdir / "pgm")
        assert res.exit_code == 0, res.output
        assert "PSNR mean" in res.output
        assert len(list((workdir / "pgm").glob("*.pgm"))) == 12
        res = run("extract", workdir / "out.yuv", workdir / "got.pbm", "--transform", kind,
                  "--reference", workdir / "logo.pbm")
        assert res.exit_code == 0, res.output
        assert "scenes 1" in res.output
        assert load_logo(workdir / "got.pbm").shape == (36, 44)

    def test_perfect_channel_36_frames(self, tmp_path):
        write_yuv420(synthetic_clip("studio", 36, seed=0), tmp_path / "in.yuv")
        write_pbm(tmp_path / "logo.pbm", synthetic_logo(0))
        assert run("embed", tmp_path / "in.yuv", tmp_path / "logo.pbm", tmp_path / "out.yuv").exit_code == 0
        res = run("extract", tmp_path / "out.yuv", tmp_path / "got.pbm", "--reference", tmp_path / "logo.pbm")
        assert "eBits 0  NC 1.0000" in res.output

    def test_wrong_key(self, workdir):
        run("embed", workdir / "in.yuv", workdir / "logo.pbm", workdir / "out.yuv")
        res = run("extract", workdir / "out.yuv", workdir / "got.pbm", "--seed-scramble", 99)
        assert res.exit_code == 0
        got, ref = load_logo(workdir / "got.pbm"), load_logo(workdir / "logo.pbm")
        assert (got != ref).sum() > 500

    def test_attack_by_kind_and_by_spec(self, workdir):
        res = run("attack", workdir / "in.yuv", workdir / "a.yuv", "--kind", "SaltPepper", "--param", "density=0.05",
                  "--seed", 4)
        assert res.exit_code == 0, res.output
        (workdir / "spec.txt").write_text("kind=SaltPepper\ndensity=0.05\nseed=4\n")
        res = run("attack", workdir / "in.yuv", workdir / "b.yuv", "--spec", workdir / "spec.txt")
        assert res.exit_code == 0, res.output
        assert (workdir / "a.yuv").read_bytes() == (workdir / "b.yuv").read_bytes()


class TestErrors:
    def test_wrong_logo_size(self, workdir):
        write_pbm(workdir / "small.pbm", np.zeros((30, 40), np.uint8))
        res = run("embed", workdir / "in.yuv", workdir / "small.pbm", workdir / "out.yuv")
        assert res.exit_code != 0
        assert "40x30" in res.output

    def test_width_not_multiple_of_8(self, workdir):
        res = run("embed", workdir / "in.yuv", workdir / "logo.pbm", workdir / "out.yuv", "--width", 100)
        assert res.exit_code != 0 and "Error" in res.output

    def test_truncated_clip(self, workdir):
        data = (workdir / "in.yuv").read_bytes()
        (workdir / "cut.yuv").write_bytes(data[:-100])
        res = run("extract", workdir / "cut.yuv", workdir / "got.pbm")
        assert res.exit_code != 0 and "multiple" in res.output

    def test_attack_needs_kind(self, workdir):
        assert run("attack", workdir / "in.yuv", workdir / "a.yuv").exit_code != 0

    def test_bad_param(self, workdir):
        res = run("attack", workdir / "in.yuv", workdir / "a.yuv", "--kind", "Resize", "--param", "nope")
        assert res.exit_code != 0


class TestMatrix:
    def test_parse(self):
        kinds, ts, attacks = load_matrix(
            "# cells\ntransforms = dft\nT = 22 default\nattack = SaltPepper density=0.02 seed=3\nattack = Resize\n"
        )
        assert kinds == ["dft"] and ts == [22.0, None]
        assert [a.kind for a in attacks] == ["SaltPepper", "Resize"]
        assert attacks[0].params == {"density": 0.02} and attacks[0].rng_seed == 3

    def test_defaults(self):
        kinds, ts, attacks = load_matrix("")
        assert kinds == ["dft", "scht"] and ts == [22.0]
        assert len(kinds) * len(attacks) >= 24 and attacks == list(DEFAULT_ATTACKS)

    @pytest.mark.parametrize("text", ["transforms = dct\n", "colour = red\n", "just words\n"])
    def test_bad(self, text):
        with pytest.raises(ValueError):
            load_matrix(text)

    def test_in_process_matrix(self):
        clip = synthetic_clip("studio", 6, seed=2)
        _, _, attacks = load_matrix("attack = None\nattack = Paint\n")
        reports = evaluate_matrix(clip, synthetic_logo(2), KeySet(), ["scht"], [None, 22.0], attacks)
        assert [(r.T, r.attack) for r in reports] == [(13, "None"), (13, "Paint"), (22, "None"), (22, "Paint")]


class TestEvaluate:
    def test_default_matrix_is_reproducible(self, tmp_path):
        write_yuv420(synthetic_clip("harbor", 6, seed=5), tmp_path / "in.yuv")
        write_pbm(tmp_path / "logo.pbm", synthetic_logo(5))
        for name in ("a.csv", "b.csv"):
            res = run("evaluate", tmp_path / "in.yuv", tmp_path / "logo.pbm", tmp_path / name)
            assert res.exit_code == 0, res.output
        text = (tmp_path / "a.csv").read_text()
        assert text == (tmp_path / "b.csv").read_text()
        rows = list(csv.DictReader(text.splitlines()))
        assert len(rows) >= 24
        assert {r["transform"] for r in rows} == {"dft", "scht"}
        assert all(r["wall_time_s"] == "" for r in rows)

    def test_timing_and_verbose(self, tmp_path):
        write_yuv420(synthetic_clip("harbor", 3, seed=5), tmp_path / "in.yuv")
        write_pbm(tmp_path / "logo.pbm", synthetic_logo(5))
        (tmp_path / "m.txt").write_text("transforms = scht\nattack = None\n")
        res = run("evaluate", tmp_path / "in.yuv", tmp_path / "logo.pbm", tmp_path / "r.csv", "--matrix",
                  tmp_path / "m.txt", "--timing", "--verbose")
        assert res.exit_code == 0, res.output
        assert "wall time" in res.output
        rows = list(csv.DictReader((tmp_path / "r.csv").read_text().splitlines()))
        assert len(rows) == 1 and float(rows[0]["wall_time_s"]) > 0
