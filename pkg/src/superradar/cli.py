"""Command-line front end: ``superradar <subcommand> [options]``.

Output defaults to ``$SUPERRADAR_OUT/<subcommand>`` (``./superradar_out``
when unset). Config precedence: ``--set`` overrides > ``--config`` file >
built-in reference radar.
"""

import argparse
import dataclasses
import json
import logging
import os
import sys
import time

import numpy as np

from superradar import dataset, io
from superradar.config import RadarConfig, load_config
from superradar.dsp import process_frame, to_cartesian
from superradar.groundtruth import LOSS_VARIANTS, PARTITION_MODES, LossWeights
from superradar.pairs import DEFAULT_KAPPA, upscale_config
from superradar.psf import dirichlet_reference, measure_psf
from superradar.scene import ReflectionPoint, Scene
from superradar.synthesis import synthesize_clean

OUT_ENV = "SUPERRADAR_OUT"
DEFAULT_OUT_ROOT = "superradar_out"

log = logging.getLogger("superradar")


def output_root():
    return os.environ.get(OUT_ENV, DEFAULT_OUT_ROOT)


def resolve_out(args, name):
    return args.out if args.out else os.path.join(output_root(), name)


def _field_types():
    return {f.name: f.type for f in dataclasses.fields(RadarConfig)}


def parse_overrides(items):
    """``key=value`` pairs (values as JSON) checked against the config fields."""
    types = _field_types()
    out = {}
    for item in items or []:
        key, sep, raw = item.partition("=")
        if not sep:
            raise ValueError(f"override {item!r} is not key=value")
        if key not in types:
            raise ValueError(f"unknown config field {key!r}")
        try:
            val = json.loads(raw)
        except json.JSONDecodeError:
            raise ValueError(f"override {key}: {raw!r} is not a JSON value") from None
        ftype = types[key]
        if ftype is tuple:
            ok = isinstance(val, list) and all(isinstance(v, (int, float)) for v in val)
        elif ftype is int:
            ok = isinstance(val, int) and not isinstance(val, bool) or (key == "angle_bins" and val is None)
        else:
            ok = isinstance(val, (int, float)) and not isinstance(val, bool)
        if not ok:
            raise ValueError(f"override {key}: {raw!r} has the wrong type")
        out[key] = val
    return out


def config_from_args(args):
    return load_config(args.config, parse_overrides(args.set))


def _write_json(path, obj):
    io.atomic_write(path, dataset.json_bytes(obj))


# ---------------------------------------------------------------------------
# subcommands


def cmd_psf(args):
    config = config_from_args(args)
    out = resolve_out(args, "psf")
    pos = tuple(args.position)
    scene = Scene.from_points([ReflectionPoint(pos, args.velocity, 1.0 + 0j)])
    sup = upscale_config(config, args.kappa)
    metrics = {"position_m": list(pos), "kappa": args.kappa}
    for name, cfg in (("input", config), ("super", sup)):
        image = process_frame(synthesize_clean(scene, cfg), cfg)
        io.write_image(os.path.join(out, f"{name}_psf.img"), image)
        m = measure_psf(cfg, pos, args.velocity)
        m.pop("angle_cut")
        m["dirichlet"] = dirichlet_reference(m["num_elements"])
        metrics[name] = m
    metrics["width_ratio"] = metrics["input"]["width_3db_sin"] / metrics["super"]["width_3db_sin"]
    _write_json(os.path.join(out, "psf_metrics.json"), metrics)
    print(f"side-lobe {metrics['input']['sidelobe_db']:.2f} dB, "
          f"width {metrics['input']['width_3db_sin']:.5f} (sin), "
          f"super/input width ratio 1/{metrics['width_ratio']:.3f}")
    return 0


def _load_spec(path):
    if path is None:
        return None
    with open(path) as fh:
        return json.load(fh)


def _run_dataset(args, kind):
    config = config_from_args(args)
    out = resolve_out(args, kind)
    t0 = time.perf_counter()
    man, failed = dataset.run_frames(kind, out, config, args.seed, args.frames, args.kappa,
                                     args.jobs, _load_spec(args.scene),
                                     getattr(args, "with_clean", False))
    print(f"{out}: {len(man['frames'])}/{args.frames} frames ok "
          f"({time.perf_counter() - t0:.1f} s)")
    if failed:
        print(f"failed frames: {', '.join(map(str, failed))}", file=sys.stderr)
        return 1
    return 0


def cmd_simulate(args):
    return _run_dataset(args, "simulate")


def cmd_pair(args):
    return _run_dataset(args, "pair")


def _dataset_dir(args):
    return args.dataset or os.path.join(output_root(), "pair")


def cmd_gt(args):
    summary = dataset.run_gt(_dataset_dir(args), args.binary_threshold)
    print(f"gt written for {len(summary['frames'])} frames; binary threshold "
          f"{summary['binary_threshold']:.3e}")
    return 0


def cmd_loss(args):
    weights = LossWeights(args.rho_r, args.rho_s, args.rho_n)
    ds = _dataset_dir(args)
    res = dataset.run_loss(ds, args.prediction, args.mapping, args.variant, args.partition,
                           weights, args.per_set_mean)
    _write_json(args.out or os.path.join(ds, "loss.json"), res)
    print(f"loss ({args.variant}, {args.mapping}, {args.partition}): {res['total']:.6g}")
    return 0


def cmd_eval(args):
    ds = _dataset_dir(args)
    out = args.out or ds
    thresholds = "unique" if args.thresholds == "unique" else None
    results = dataset.run_eval(ds, args.target or ("input.img", "super.img"), thresholds)
    summary = {}
    for target, (report, per_frame) in results.items():
        stem = os.path.splitext(os.path.basename(target))[0]
        os.makedirs(out, exist_ok=True)
        report.to_table(os.path.join(out, f"pr_{stem}.tsv"))
        summary[target] = dict(report.summary(), mean_frame_ap=float(np.mean(per_frame)))
        print(f"{target}: AP {report.average_precision:.4f} "
              f"(mean per frame {np.mean(per_frame):.4f})")
    _write_json(os.path.join(out, "ap_summary.json"), summary)
    return 0


def cmd_to_cartesian(args):
    image = io.read_image(args.image)
    channels = {"intensity": image.intensity, "amplitude": np.sqrt(image.intensity),
                "real": image.real_part, "imag": image.imag_part, "doppler": image.doppler_map}
    cart = to_cartesian(channels[args.channel], image.range_bin_spacing_m,
                        image.sin_azimuth_values, args.resolution)
    out = args.out or os.path.splitext(args.image)[0] + f"_{args.channel}.cart"
    io.write_cartesian(out, cart)
    print(f"{out}: {cart.data.shape[0]}x{cart.data.shape[1]} px at {args.resolution} m")
    return 0


# ---------------------------------------------------------------------------
# parser


def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="JSON radar config (fields of RadarConfig)")
    common.add_argument("--set", action="append", metavar="KEY=VALUE",
                        help="override one config field (JSON value); repeatable")
    common.add_argument("--seed", type=int, default=0, help="master seed")
    common.add_argument("--kappa", type=int, default=DEFAULT_KAPPA, help="angle enhancement factor")
    common.add_argument("--frames", type=int, default=1, help="number of frames")
    common.add_argument("--jobs", type=int, default=1, help="parallel worker processes")
    common.add_argument("--out", help=f"output path (default ${OUT_ENV}/<subcommand>)")
    common.add_argument("-v", "--verbose", action="store_true")

    p = argparse.ArgumentParser(prog="superradar", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("psf", parents=[common], help="render and measure single-point images")
    s.add_argument("--position", type=float, nargs=2, default=[0.0, 20.0], metavar=("X", "Y"))
    s.add_argument("--velocity", type=float, default=0.0)
    s.set_defaults(func=cmd_psf)

    for name, func, text in (("simulate", cmd_simulate, "raw cubes and images of random scenes"),
                             ("pair", cmd_pair, "input / super-radar image pairs")):
        s = sub.add_parser(name, parents=[common], help=text)
        s.add_argument("--scene", help="JSON scene spec used for every frame (default: random)")
        if name == "pair":
            s.add_argument("--with-clean", action="store_true",
                           help="also store the noiseless super image")
        s.set_defaults(func=func)

    s = sub.add_parser("gt", parents=[common], help="probability maps and pixel partitions")
    s.add_argument("dataset", nargs="?", help="pair dataset directory")
    s.add_argument("--binary-threshold", type=float, help="intensity threshold of the binary map")
    s.set_defaults(func=cmd_gt)

    s = sub.add_parser("loss", parents=[common], help="boosting loss against the reference map")
    s.add_argument("dataset", nargs="?")
    s.add_argument("--prediction", help="probability file name inside each frame directory")
    s.add_argument("--mapping", choices=("probability", "binary"), default="probability")
    s.add_argument("--variant", choices=LOSS_VARIANTS, default="ce")
    s.add_argument("--partition", choices=PARTITION_MODES, default="full")
    s.add_argument("--per-set-mean", action="store_true")
    s.add_argument("--rho-r", type=float, default=LossWeights.rho_r)
    s.add_argument("--rho-s", type=float, default=LossWeights.rho_s)
    s.add_argument("--rho-n", type=float, default=LossWeights.rho_n)
    s.set_defaults(func=cmd_loss)

    s = sub.add_parser("eval", parents=[common], help="precision/recall and AP")
    s.add_argument("dataset", nargs="?")
    s.add_argument("--target", action="append", help="image file name to score; repeatable")
    s.add_argument("--thresholds", choices=("log", "unique"), default="log")
    s.set_defaults(func=cmd_eval)

    s = sub.add_parser("to-cartesian", parents=[common], help="resample an image onto x/y")
    s.add_argument("image")
    s.add_argument("--channel", default="intensity",
                   choices=("intensity", "amplitude", "real", "imag", "doppler"))
    s.add_argument("--resolution", type=float, default=0.2, help="pixel size in meters")
    s.set_defaults(func=cmd_to_cartesian)
    return p


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    if args.frames < 0 or args.jobs < 1 or args.kappa < 1:
        parser.error("--frames must be >= 0, --jobs and --kappa >= 1")
    try:
        return args.func(args)
    except (OSError, ValueError) as exc:
        print(f"superradar {args.command}: error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
