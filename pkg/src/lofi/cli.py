"""Command-line interface: one subcommand per pipeline stage.

All processing stages are deterministic; randomness is confined to
`simulate` and controlled by the scenario seed. Module errors map to
distinct nonzero exit codes with a single-line machine-parsable message.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

import numpy as np

from . import align as align_mod
from . import csi as csi_mod
from . import detection as det_mod
from . import features as feat_mod
from . import geometry as geo_mod
from . import simulate as sim_mod
from .errors import ConfigError, EmptyInput, InputOutputError, LofiError

log = logging.getLogger("lofi")

GAP_HIST_BIN_S = 0.001


def _load_config(path) -> dict:
    try:
        with open(path) as fh:
            data = json.load(fh)
    except OSError as exc:
        raise InputOutputError(f"cannot read config file {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config file {path} is not valid JSON: {exc}") from exc
    if not isinstance(data, dict):
        raise ConfigError("config file must hold a JSON object")
    return data


def _merge_config(args: argparse.Namespace) -> None:
    """Fill unset flags (None) from the --config JSON object."""
    if not getattr(args, "config", None):
        return
    cfg = _load_config(args.config)
    for key, value in cfg.items():
        dest = key.replace("-", "_")
        if hasattr(args, dest) and getattr(args, dest) is None:
            setattr(args, dest, value)


def _require(args: argparse.Namespace, *names: str) -> None:
    for name in names:
        if getattr(args, name) is None:
            raise ConfigError(f"missing required option --{name.replace('_', '-')} (or config key '{name}')")


def _estimated_rate(ts: np.ndarray) -> float:
    if ts.shape[0] < 2:
        raise ConfigError("cannot estimate a rate from fewer than 2 timestamps")
    spacing = float(np.median(np.diff(ts)))
    if spacing <= 0:
        raise ConfigError("cannot estimate a rate from non-increasing timestamps")
    return 1.0 / spacing


def _gap_histogram(gaps: np.ndarray) -> dict:
    if gaps.size == 0:
        return {"bin_width_s": GAP_HIST_BIN_S, "counts": []}
    bins = np.floor(gaps / GAP_HIST_BIN_S).astype(np.int64)
    counts = np.bincount(bins).tolist()
    return {"bin_width_s": GAP_HIST_BIN_S, "counts": counts}


def _write_json(path, payload: dict) -> None:
    with open(path, "w") as fh:
        json.dump(payload, fh, indent=2)
        fh.write("\n")


# ---------------------------------------------------------------------------
# Subcommand handlers

def cmd_calibrate(args) -> int:
    _require(args, "anchors", "out")
    anchors = geo_mod.read_anchors(args.anchors)
    h = geo_mod.solve_homography(anchors)
    geo_mod.write_homography(args.out, h)
    log.info("calibrated homography from %s -> %s", args.anchors, args.out)
    return 0


def cmd_label(args) -> int:
    _require(args, "detections", "homography", "out")
    target = args.target_label if args.target_label is not None else det_mod.DEFAULT_TARGET_LABEL
    frames = det_mod.read_detections_jsonl(args.detections)
    h = geo_mod.read_homography(args.homography)
    series, stats = det_mod.label_stream(frames, h, target)
    det_mod.write_labels_jsonl(args.out, series)
    log.info("labeled %d frames (%d without '%s', %d at infinity)",
             stats.frames, stats.no_person, target, stats.at_infinity)
    return 0


def cmd_complete(args) -> int:
    _require(args, "csi", "out")
    rate = args.rate if args.rate is not None else csi_mod.DEFAULT_RATE
    seq, report = csi_mod.read_csi_sequence(args.csi, rate, args.subcarriers)
    lost = int(csi_mod.count_lost_stream(seq).sum())
    done = csi_mod.complete(seq)
    csi_mod.write_csi_csv(args.out, done, include_interp=True)
    log.info("ingested %d rows (%d duplicate timestamps dropped), detected %d lost, wrote %d packets",
             report.rows_in, report.duplicates_dropped, lost, len(done))
    return 0


def cmd_align(args) -> int:
    _require(args, "csi", "labels", "person_id", "out")
    labels = det_mod.read_labels_jsonl(args.labels)
    ts, rssi, csi_vals, interp = csi_mod.read_csi_csv(args.csi, args.subcarriers)
    rate = args.rate if args.rate is not None else _estimated_rate(ts)
    seq, _ = csi_mod.ingest(ts, rssi, csi_vals, rate, interpolated=interp)
    max_gap = args.max_gap if args.max_gap is not None else 2.0 / _estimated_rate(labels.ts)
    ds, drop = align_mod.align(seq, labels, str(args.person_id), max_gap)
    align_mod.write_dataset_jsonl(args.out, ds)
    if args.out_csv:
        align_mod.write_dataset_csv(args.out_csv, ds)
    log.info("labeled %d/%d packets (dropped: %s), max_gap=%.4fs",
             len(ds), len(seq), drop.to_dict(), max_gap)
    return 0


def cmd_features(args) -> int:
    _require(args, "dataset", "out")
    window = args.window if args.window is not None else feat_mod.DEFAULT_WINDOW
    stride = args.stride if args.stride is not None else feat_mod.DEFAULT_STRIDE
    mode = args.mode if args.mode is not None else "corr"
    ds = align_mod.read_dataset_jsonl(args.dataset)
    feats, targets, starts = feat_mod.extract_features(ds, window, stride, mode)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    np.save(out / "features.npy", feats)
    np.save(out / "targets.npy", targets)
    np.save(out / "window_start_ts.npy", starts)
    _write_json(out / "manifest.json", {
        "mode": mode,
        "window": window,
        "stride": stride,
        "count": int(feats.shape[0]),
        "feature_shape": list(feats.shape[1:]),
        "subcarriers": ds.subcarrier_count,
        "files": ["features.npy", "targets.npy", "window_start_ts.npy"],
    })
    log.info("wrote %d %s features to %s", feats.shape[0], mode, out)
    return 0


def cmd_eval(args) -> int:
    _require(args, "dataset")
    window = args.window if args.window is not None else feat_mod.DEFAULT_WINDOW
    stride = args.stride if args.stride is not None else feat_mod.DEFAULT_STRIDE
    mode = args.mode if args.mode is not None else "corr"
    split = args.split if args.split is not None else 0.8
    k = args.knn if args.knn is not None else feat_mod.DEFAULT_K
    classes = args.classes if args.classes is not None else 0
    region_x = args.region_x if args.region_x is not None else 1.8
    region_y = args.region_y if args.region_y is not None else 4.8
    if not 0.0 < split < 1.0:
        raise ConfigError(f"--split must be in (0, 1), got {split}")

    ds = align_mod.read_dataset_jsonl(args.dataset)
    feats, targets, _ = feat_mod.extract_features(ds, window, stride, mode)
    n = feats.shape[0]
    n_train = int(n * split)
    if n_train < 1 or n_train >= n:
        raise EmptyInput(f"split {split} leaves no train or no test windows out of {n}")
    pred = feat_mod.knn_localize_batch(feats[:n_train], targets[:n_train], feats[n_train:], k)
    true = targets[n_train:]
    errors = np.sqrt(((pred - true) ** 2).sum(axis=1))
    report = sim_mod._error_report(errors)

    center = np.array([region_x / 2.0, region_y / 2.0])
    center_errors = np.sqrt(((true - center) ** 2).sum(axis=1))

    payload = {
        "windows": {"total": n, "train": n_train, "test": n - n_train,
                    "window": window, "stride": stride, "mode": mode, "knn": k},
        "mean_error_m": report.mean,
        "error_std_m": report.std,
        "center_baseline_mean_error_m": float(center_errors.mean()),
        "cdf": report.to_dict()["cdf"],
    }
    accuracy = None
    if classes:
        grid = feat_mod.grid_for_classes(int(classes), region_x, region_y)
        # Predictions and targets are clamped onto the region for classification;
        # label noise can push coordinates slightly outside it.
        def _cls(points):
            clamped = np.clip(points, [0.0, 0.0], [grid.x_len, grid.y_len])
            return np.array([feat_mod.region_class(p, grid) for p in clamped])
        accuracy = float((_cls(pred) == _cls(true)).mean())
        payload["classes"] = int(classes)
        payload["classification_accuracy"] = accuracy

    print(f"windows: {n} total, {n_train} train, {n - n_train} test")
    print(f"mean error     {report.mean * 100:.2f} cm")
    print(f"error std      {report.std * 100:.2f} cm")
    print(f"center baseline mean error {float(center_errors.mean()) * 100:.2f} cm")
    if accuracy is not None:
        print(f"classification accuracy ({int(classes)} classes) {accuracy * 100:.2f}%")
    print("error CDF (cm, fraction):")
    for cm, frac in report.cdf:
        print(f"  {cm:4d}  {frac:.4f}")
    if args.report:
        _write_json(args.report, payload)
    return 0


def cmd_simulate(args) -> int:
    _require(args, "config", "out_dir")
    sc = sim_mod.read_scenario(args.config)
    if args.seed is not None:
        sc.seed = int(args.seed)
    frames, seq, truth = sim_mod.generate(sc)
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    det_mod.write_detections_jsonl(out / "detections.jsonl", frames)
    csi_mod.write_csi_csv(out / "csi.csv", seq, include_interp=False)
    sim_mod.write_truth_jsonl(out / "truth.jsonl", truth)
    h = sc.resolved_homography()
    geo_mod.write_homography(out / "homography.json", h)
    _write_json(out / "meta.json", {
        "seed": sc.seed,
        "camera_frames": int(truth.camera_ts.shape[0]),
        "missed_frames": truth.missed_count,
        "packets_nominal": int(truth.packet_ts.shape[0]),
        "packets_emitted": len(seq),
        "packets_dropped": truth.dropped_count,
    })
    if h.anchors is not None:
        _write_json(out / "anchors.json", {
            "pixel": [[p.u, p.v] for p in h.anchors.pixel],
            "world": [[w.x, w.y] for w in h.anchors.world],
        })
    log.info("simulated %d frames, %d packets (%d dropped) -> %s",
             truth.camera_ts.shape[0], truth.packet_ts.shape[0], truth.dropped_count, out)
    return 0


def cmd_eval_labels(args) -> int:
    _require(args, "produced", "truth")
    p_ts, p_xy = _read_points(args.produced)
    t_ts, t_xy = sim_mod.read_truth_jsonl(args.truth)
    report = sim_mod.eval_labels_against_samples(p_ts, p_xy, t_ts, t_xy)
    print(report.format_table())
    if args.report:
        _write_json(args.report, report.to_dict())
    return 0


def _read_points(path) -> tuple[np.ndarray, np.ndarray]:
    """Accept either labels or dataset JSONL; rows need ts plus non-null x, y."""
    return sim_mod.read_truth_jsonl(path)


def cmd_pipeline(args) -> int:
    _require(args, "anchors", "detections", "csi", "out_dir")
    f2 = args.f2 if args.f2 is not None else csi_mod.DEFAULT_RATE
    subcarriers = args.subcarriers
    target = args.target_label if args.target_label is not None else det_mod.DEFAULT_TARGET_LABEL
    person_id = args.person_id if args.person_id is not None else "P0"
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)

    anchors = geo_mod.read_anchors(args.anchors)
    h = geo_mod.solve_homography(anchors)
    geo_mod.write_homography(out / "homography.json", h)

    frames = det_mod.read_detections_jsonl(args.detections)
    series, stats = det_mod.label_stream(frames, h, target)
    det_mod.write_labels_jsonl(out / "labels.jsonl", series)

    seq, ingest_report = csi_mod.read_csi_sequence(args.csi, f2, subcarriers)
    lost = int(csi_mod.count_lost_stream(seq).sum())
    done = csi_mod.complete(seq)
    csi_mod.write_csi_csv(out / "completed.csv", done, include_interp=True)
    filled = len(done) - len(seq)

    if args.max_gap is not None:
        max_gap = args.max_gap
    elif args.f1 is not None:
        max_gap = 2.0 / args.f1
    else:
        max_gap = 2.0 / _estimated_rate(series.ts)
    ds, drop = align_mod.align(done, series, str(person_id), max_gap)
    align_mod.write_dataset_jsonl(out / "dataset.jsonl", ds)
    align_mod.write_dataset_csv(out / "dataset.csv", ds)

    conservation_ok = len(ds) + drop.total() == len(done)
    report = {
        "inputs": {"anchors": str(args.anchors), "detections": str(args.detections), "csi": str(args.csi)},
        "params": {"f1": args.f1, "f2": f2, "subcarriers": done.subcarrier_count,
                   "target_label": target, "max_gap": max_gap, "person_id": str(person_id)},
        "frames": stats.to_dict(),
        "packets": {
            "rows_in": ingest_report.rows_in,
            "duplicates_dropped": ingest_report.duplicates_dropped,
            "ingested": len(seq),
            "lost_detected": lost,
            "filled": filled,
            "after_completion": len(done),
        },
        "alignment": {
            "labeled": len(ds),
            "dropped": drop.to_dict(),
            "conservation_ok": conservation_ok,
            "max_label_gap": float(ds.label_gap.max()) if len(ds) else None,
            "label_gap_histogram": _gap_histogram(ds.label_gap),
        },
        "outputs": {
            "homography": str(out / "homography.json"),
            "labels": str(out / "labels.jsonl"),
            "completed_csi": str(out / "completed.csv"),
            "dataset": str(out / "dataset.jsonl"),
            "dataset_csv": str(out / "dataset.csv"),
        },
    }
    _write_json(out / "report.json", report)
    log.info("pipeline complete: %d labeled rows (%d filled packets) -> %s", len(ds), filled, out)
    if not conservation_ok:
        raise LofiError("conservation identity violated in run report")
    return 0


# ---------------------------------------------------------------------------
# Parser

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="lofi", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p: argparse.ArgumentParser, with_config: bool = True):
        p.add_argument("--quiet", action="store_true", help="suppress progress logging")
        p.add_argument("--seed", type=int, default=None, help="override the scenario seed")
        if with_config:
            p.add_argument("--config", default=None, help="JSON file providing defaults for unset flags")

    p = sub.add_parser("calibrate", help="solve the pixel-to-world homography from four anchors")
    common(p)
    p.add_argument("--anchors", default=None)
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_calibrate)

    p = sub.add_parser("label", help="reduce detection frames to world-coordinate labels")
    common(p)
    p.add_argument("--detections", default=None)
    p.add_argument("--homography", default=None)
    p.add_argument("--target-label", default=None)
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_label)

    p = sub.add_parser("complete", help="detect lost CSI packets and fill gaps by interpolation")
    common(p)
    p.add_argument("--csi", default=None)
    p.add_argument("--rate", type=float, default=None, help="nominal packet rate f2 in Hz (default 100)")
    p.add_argument("--subcarriers", type=int, default=None)
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_complete)

    p = sub.add_parser("align", help="join CSI packets with nearest-in-time labels")
    common(p)
    p.add_argument("--csi", default=None)
    p.add_argument("--labels", default=None)
    p.add_argument("--person-id", default=None)
    p.add_argument("--max-gap", type=float, default=None,
                   help="drop packets whose nearest label is farther than this (default 2/f1)")
    p.add_argument("--rate", type=float, default=None)
    p.add_argument("--subcarriers", type=int, default=None)
    p.add_argument("--out", default=None)
    p.add_argument("--out-csv", default=None, help="also write the CSV dataset variant")
    p.set_defaults(func=cmd_align)

    p = sub.add_parser("features", help="extract windowed correlation or standardized features")
    common(p)
    p.add_argument("--dataset", default=None)
    p.add_argument("--window", type=int, default=None)
    p.add_argument("--stride", type=int, default=None)
    p.add_argument("--mode", choices=["corr", "std"], default=None)
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_features)

    p = sub.add_parser("eval", help="k-NN localization baseline with region classification")
    common(p)
    p.add_argument("--dataset", default=None)
    p.add_argument("--split", type=float, default=None)
    p.add_argument("--classes", type=int, choices=[0, 2, 4, 6], default=None)
    p.add_argument("--knn", type=int, default=None)
    p.add_argument("--window", type=int, default=None)
    p.add_argument("--stride", type=int, default=None)
    p.add_argument("--mode", choices=["corr", "std"], default=None)
    p.add_argument("--region-x", type=float, default=None)
    p.add_argument("--region-y", type=float, default=None)
    p.add_argument("--report", default=None, help="write metrics JSON here")
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("simulate", help="generate a synthetic scenario with ground truth")
    common(p, with_config=False)
    p.add_argument("--config", default=None, help="scenario JSON file")
    p.add_argument("--out-dir", default=None)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("eval-labels", help="score produced labels against simulator truth")
    common(p)
    p.add_argument("--produced", default=None)
    p.add_argument("--truth", default=None)
    p.add_argument("--report", default=None)
    p.set_defaults(func=cmd_eval_labels)

    p = sub.add_parser("pipeline", help="calibrate, label, complete and align in one run")
    common(p)
    p.add_argument("--anchors", default=None)
    p.add_argument("--detections", default=None)
    p.add_argument("--csi", default=None)
    p.add_argument("--f1", type=float, default=None, help="camera rate in Hz, sets the default max gap")
    p.add_argument("--f2", type=float, default=None, help="nominal packet rate in Hz (default 100)")
    p.add_argument("--subcarriers", type=int, default=None)
    p.add_argument("--target-label", default=None)
    p.add_argument("--max-gap", type=float, default=None)
    p.add_argument("--person-id", default=None)
    p.add_argument("--out-dir", default=None)
    p.set_defaults(func=cmd_pipeline)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=logging.ERROR if args.quiet else logging.INFO,
        format="%(message)s",
        stream=sys.stderr,
    )
    try:
        if args.command != "simulate":
            _merge_config(args)
        return args.func(args)
    except LofiError as exc:
        print(f"lofi: error: {exc.code_name}: {exc}", file=sys.stderr)
        return exc.exit_code
    except OSError as exc:
        print(f"lofi: error: InputOutputError: {exc}", file=sys.stderr)
        return InputOutputError.exit_code


if __name__ == "__main__":
    sys.exit(main())
