import numpy as np
import pytest

import lofi.simulate as sim
from lofi.csi import (
    CsiSequence,
    complete,
    count_lost,
    count_lost_stream,
    ingest,
    read_csi_csv,
    read_csi_sequence,
    write_csi_csv,
)
from lofi.errors import NegativeGap, NonFiniteValue, SchemaError, TooShort


def make_seq(ts, amps=None, rate=100.0, subcarriers=1):
    ts = np.asarray(ts, dtype=np.float64)
    n = ts.shape[0]
    if amps is None:
        csi = np.ones((n, subcarriers), dtype=np.complex128)
    else:
        csi = np.asarray(amps, dtype=np.complex128).reshape(n, -1)
    return CsiSequence(
        ts=ts,
        rssi=np.full(n, -40.0),
        csi=csi,
        interpolated=np.zeros(n, dtype=bool),
        nominal_rate=rate,
    )


class TestIngest:
    def test_in_order_rows(self):
        seq, report = ingest([0.0, 0.01, 0.02], [-40, -41, -42], np.ones((3, 2)) + 0j, 100.0)
        assert len(seq) == 3
        assert report.duplicates_dropped == 0
        assert not report.reordered

    def test_reorders_by_timestamp(self):
        seq, report = ingest([0.0, 0.02, 0.01], [-1, -3, -2], np.ones((3, 1)) + 0j, 100.0)
        assert np.array_equal(seq.ts, [0.0, 0.01, 0.02])
        assert np.array_equal(seq.rssi, [-1.0, -2.0, -3.0])
        assert report.reordered

    def test_duplicate_timestamp_keeps_first(self):
        csi = np.array([[1.0], [2.0], [3.0]], dtype=np.complex128)
        seq, report = ingest([0.0, 0.01, 0.01], [-1, -2, -3], csi, 100.0)
        assert len(seq) == 2
        assert report.duplicates_dropped == 1
        assert seq.csi[1, 0] == 2.0

    def test_non_finite_rejected(self):
        with pytest.raises(NonFiniteValue):
            ingest([0.0, np.nan], [-1, -2], np.ones((2, 1)) + 0j, 100.0)
        with pytest.raises(NonFiniteValue):
            ingest([0.0, 0.01], [-1, np.inf], np.ones((2, 1)) + 0j, 100.0)
        bad = np.ones((2, 1), dtype=np.complex128)
        bad[1, 0] = complex(np.nan, 0.0)
        with pytest.raises(NonFiniteValue):
            ingest([0.0, 0.01], [-1, -2], bad, 100.0)

    def test_shape_mismatch_rejected(self):
        with pytest.raises(SchemaError):
            ingest([0.0, 0.01], [-1, -2], np.ones((3, 1)) + 0j, 100.0)


class TestCountLost:
    def test_nominal_gap_has_no_loss(self):
        assert count_lost(0.0, 0.010, 100.0) == 0

    def test_half_up_rounding(self):
        assert count_lost(0.0, 0.025, 100.0) == 2

    def test_short_gap_clamps_to_zero(self):
        assert count_lost(0.0, 0.005, 100.0) == 0

    def test_exact_tie_rounds_up(self):
        assert count_lost(0.0, 0.015, 100.0) == 1

    def test_negative_gap_raises(self):
        with pytest.raises(NegativeGap):
            count_lost(1.0, 0.5, 100.0)

    def test_bad_rate_raises(self):
        with pytest.raises(SchemaError):
            count_lost(0.0, 1.0, 0.0)

    def test_stream_totals_match_scalar(self):
        rng = np.random.default_rng(0)
        ts = np.cumsum(rng.uniform(0.005, 0.05, size=200))
        seq = make_seq(ts)
        batch = count_lost_stream(seq)
        scalar = [count_lost(ts[i], ts[i + 1], 100.0) for i in range(len(ts) - 1)]
        assert np.array_equal(batch, scalar)


class TestComplete:
    def test_linear_midpoint(self):
        seq = make_seq([0.0, 0.02], amps=[[1.0], [3.0]])
        out = complete(seq)
        assert len(out) == 3
        assert out.ts[1] == pytest.approx(0.01, abs=1e-12)
        assert abs(out.csi[1, 0]) == pytest.approx(2.0, abs=1e-12)
        assert out.interpolated.tolist() == [False, True, False]

    def test_gapless_stream_unchanged(self):
        seq = make_seq(np.arange(50) / 100.0)
        assert complete(seq) is seq

    def test_originals_bit_identical(self):
        rng = np.random.default_rng(1)
        ts = np.arange(20) / 100.0
        keep = np.ones(20, dtype=bool)
        keep[[4, 5, 11]] = False
        csi = rng.normal(size=(20, 3)) + 1j * rng.normal(size=(20, 3))
        seq = make_seq(ts[keep], amps=csi[keep])
        out = complete(seq)
        carried = ~out.interpolated
        assert np.array_equal(out.csi[carried], seq.csi)
        assert np.array_equal(out.ts[carried], seq.ts)
        assert np.array_equal(out.rssi[carried], seq.rssi)

    def test_rssi_linear(self):
        seq = CsiSequence(
            ts=np.array([0.0, 0.03]),
            rssi=np.array([-40.0, -46.0]),
            csi=np.ones((2, 1), dtype=np.complex128),
            interpolated=np.zeros(2, dtype=bool),
            nominal_rate=100.0,
        )
        out = complete(seq)
        assert np.allclose(out.rssi, [-40.0, -42.0, -44.0, -46.0])

    def test_phase_interpolated_through_wrap(self):
        # Phases 3.0 and -3.0 differ by 0.283 rad through the +/-pi seam;
        # amplitude must stay exactly 1 instead of shrinking through zero.
        seq = make_seq([0.0, 0.02], amps=[[np.exp(3.0j)], [np.exp(-3.0j)]])
        out = complete(seq)
        wrapped_diff = (-3.0 - 3.0) + 2.0 * np.pi
        expected = np.exp(1j * (3.0 + wrapped_diff / 2.0))
        assert abs(out.csi[1, 0]) == pytest.approx(1.0, abs=1e-12)
        assert out.csi[1, 0] == pytest.approx(expected, abs=1e-12)

    def test_amplitude_bounded_by_neighbors(self):
        rng = np.random.default_rng(2)
        ts = np.arange(40) / 100.0
        keep = rng.random(40) > 0.3
        keep[[0, -1]] = True
        csi = rng.uniform(0.5, 3.0, size=(40, 4)) * np.exp(1j * rng.uniform(-np.pi, np.pi, (40, 4)))
        seq = make_seq(ts[keep], amps=csi[keep])
        out = complete(seq)
        amp = np.abs(out.csi)
        carried = np.flatnonzero(~out.interpolated)
        for a, b in zip(carried[:-1], carried[1:]):
            block = amp[a + 1:b]
            if block.size:
                lo = np.minimum(amp[a], amp[b]) - 1e-12
                hi = np.maximum(amp[a], amp[b]) + 1e-12
                assert (block >= lo).all() and (block <= hi).all()

    def test_idempotent(self):
        sc = sim.Scenario(duration=20.0, loss_prob=0.15, seed=4)
        _, seq, _ = sim.generate(sc)
        once = complete(seq)
        twice = complete(once)
        assert twice is once

    def test_max_gap_below_threshold_after_completion(self):
        sc = sim.Scenario(duration=30.0, loss_prob=0.2, jitter=0.001, seed=5)
        _, seq, _ = sim.generate(sc)
        out = complete(seq)
        assert np.diff(out.ts).max() < 1.5 / out.nominal_rate

    def test_simulator_drops_reconstructed(self):
        sc = sim.Scenario(duration=10.0, loss_prob=0.1, seed=6)
        _, seq, truth = sim.generate(sc)
        out = complete(seq)
        inserted = int(out.interpolated.sum())
        assert inserted == truth.dropped_count
        ins_ts = np.sort(out.ts[out.interpolated])
        dropped_ts = np.sort(truth.packet_ts[truth.packet_dropped])
        assert np.abs(ins_ts - dropped_ts).max() < 1.0 / (2.0 * sc.f2)

    def test_too_short(self):
        with pytest.raises(TooShort):
            complete(make_seq([0.0]))


class TestCsvFormat:
    def test_roundtrip(self, tmp_path):
        sc = sim.Scenario(duration=1.0, subcarriers=4, seed=7)
        _, seq, _ = sim.generate(sc)
        path = tmp_path / "csi.csv"
        write_csi_csv(path, seq, include_interp=False)
        header = path.read_text().splitlines()[0]
        assert header == "ts,rssi," + ",".join(f"re_{i},im_{i}" for i in range(4))
        back, _ = read_csi_sequence(path, sc.f2)
        assert np.array_equal(back.ts, seq.ts)
        assert np.array_equal(back.csi, seq.csi)
        assert np.array_equal(back.rssi, seq.rssi)

    def test_interp_column_roundtrip(self, tmp_path):
        sc = sim.Scenario(duration=2.0, subcarriers=3, loss_prob=0.2, seed=8)
        _, seq, _ = sim.generate(sc)
        out = complete(seq)
        path = tmp_path / "completed.csv"
        write_csi_csv(path, out, include_interp=True)
        back, _ = read_csi_sequence(path, sc.f2)
        assert np.array_equal(back.interpolated, out.interpolated)

    def test_subcarrier_count_mismatch(self, tmp_path):
        sc = sim.Scenario(duration=1.0, subcarriers=4, seed=9)
        _, seq, _ = sim.generate(sc)
        path = tmp_path / "csi.csv"
        write_csi_csv(path, seq, include_interp=False)
        with pytest.raises(SchemaError):
            read_csi_csv(path, subcarriers=52)

    def test_wrong_header_rejected(self, tmp_path):
        path = tmp_path / "bad.csv"
        path.write_text("time,rssi,re_0,im_0\n0.0,-40,1.0,0.0\n")
        with pytest.raises(SchemaError):
            read_csi_csv(path)

    def test_short_row_rejected(self, tmp_path):
        path = tmp_path / "bad.csv"
        path.write_text("ts,rssi,re_0,im_0\n0.0,-40,1.0,0.0\n0.1,-40,1.0\n")
        with pytest.raises(SchemaError):
            read_csi_csv(path)
