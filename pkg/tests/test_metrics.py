import csv
import io
import math

import numpy as np
import pytest

from phasemark.metrics import (
    CSV_COLUMNS,
    RunReport,
    bit_error_rate,
    bit_errors,
    clip_psnr,
    mse,
    normalized_correlation,
    psnr,
    reports_to_csv,
)
from phasemark.video import Clip, FramePlanes


class TestPSNR:
    def test_identical_is_inf(self):
        f = FramePlanes.gray()
        assert psnr(f, f) == math.inf

    def test_unit_mse(self):
        a = np.zeros((8, 8))
        assert mse(a, a + 1) == 1
        assert psnr(a, a + 1) == pytest.approx(48.1308, abs=1e-4)

    def test_one_pixel_full_swing(self):
        a = np.zeros((144, 176), np.uint8)
        b = a.copy()
        b[0, 0] = 255
        assert psnr(a, b) == pytest.approx(10 * math.log10(144 * 176), abs=1e-9)
        assert psnr(a, b) == pytest.approx(44.04, abs=0.01)

    def test_uint8_does_not_wrap(self):
        assert mse(np.array([0], np.uint8), np.array([255], np.uint8)) == 255**2

    def test_shape_mismatch(self):
        with pytest.raises(ValueError):
            mse(np.zeros(3), np.zeros(4))

    def test_decreases_with_noise(self, rng):
        y = rng.integers(50, 200, (144, 176)).astype(float)
        values = [psnr(y, y + rng.normal(0, s, y.shape)) for s in (1, 2, 4, 8)]
        assert all(a > b for a, b in zip(values, values[1:]))

    def test_clip_psnr_skips_inf(self):
        a = Clip((FramePlanes.gray(), FramePlanes.gray()))
        b = Clip((FramePlanes.gray(), FramePlanes.gray(level=129)))
        per_frame, mean, inf_frames = clip_psnr(a, b)
        assert per_frame[0] == math.inf and inf_frames == 1
        assert mean == pytest.approx(48.1308, abs=1e-4)

    def test_clip_length_mismatch(self):
        with pytest.raises(ValueError):
            clip_psnr(Clip((FramePlanes.gray(),)), Clip((FramePlanes.gray(),) * 2))


class TestRecovery:
    def test_nc_identical(self, logo):
        assert normalized_correlation(logo, logo) == 1.0

    def test_nc_all_zero_extraction(self, logo):
        assert normalized_correlation(logo, np.zeros_like(logo)) == 0.0

    def test_nc_ignores_reference_zeros(self, logo):
        assert normalized_correlation(logo, np.ones_like(logo)) == 1.0

    def test_nc_zero_reference(self):
        with pytest.raises(ValueError):
            normalized_correlation(np.zeros((36, 44)), np.ones((36, 44)))

    def test_ebits_symmetric(self, logo, rng):
        other = rng.integers(0, 2, logo.shape)
        assert bit_errors(logo, other) == bit_errors(other, logo)

    def test_complement(self, logo):
        assert bit_errors(logo, 1 - logo) == 1584
        assert bit_error_rate(logo, 1 - logo) == 1.0

    def test_shape_mismatch(self, logo):
        with pytest.raises(ValueError):
            bit_errors(logo, logo[:, :40])


class TestRunReport:
    def make(self, **kw):
        base = dict(transform="scht", T=22.0, attack="Resize", params="", seed=0, ebits=12, nc=0.99123, mean_psnr=40.0)
        base.update(kw)
        return RunReport(**base)

    def test_ber(self):
        assert self.make().ber == pytest.approx(12 / 1584)

    def test_ebits_range(self):
        with pytest.raises(ValueError):
            self.make(ebits=1585)

    def test_csv_row(self):
        row = self.make(wall_time=None).csv_row()
        assert len(row) == len(CSV_COLUMNS)
        assert row[:7] == ["scht", "22", "Resize", "", "0", "12", "0.9912"]
        assert row[-1] == ""

    def test_inf_psnr_text(self):
        r = self.make(mean_psnr=math.inf)
        assert r.csv_row()[CSV_COLUMNS.index("mean_psnr")] == "inf"
        assert "inf" in r.text_block()

    def test_csv_parses(self):
        text = reports_to_csv([self.make(), self.make(attack="Paint", wall_time=0.5)])
        rows = list(csv.reader(io.StringIO(text)))
        assert tuple(rows[0]) == CSV_COLUMNS
        assert len(rows) == 3 and rows[2][-1] == "0.500"

    def test_text_block(self):
        text = self.make(complex_adds=384).text_block()
        assert "eBits      12 / 1584" in text and "384 complex adds" in text
