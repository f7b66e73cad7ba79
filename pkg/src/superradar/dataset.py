"""Batch generation of frame datasets and the manifest that describes them.

Layout::

    <out>/manifest.json
    <out>/frame_00000/{scene.pts, input.img, super.img, meta.json, ...}

Frame ``k`` uses seed ``frame_seed(master_seed, k)`` so it can be rebuilt on
its own. All files are written atomically; a rerun with an identical job
and intact files touches nothing.
"""

import hashlib
import json
import logging
import os
from concurrent.futures import ProcessPoolExecutor

import numpy as np

from superradar import io
from superradar.config import config_digest, config_from_dict
from superradar.dsp import process_frame
from superradar.evaluation import (extract_gt_points, noise_threshold,
                                   pooled_precision_recall, precision_recall_ap)
from superradar.groundtruth import (LossWeights, SigmaModel, binary_mapping, boost_loss,
                                    estimate_noise_std, partition_pixels, probability_map)
from superradar.pairs import frame_seed, generate_pair, sub_seeds, upscale_config
from superradar.scene import Scene, generate_procedural_scene, random_scene_spec
from superradar.synthesis import NoiseSpec, synthesize_frame

log = logging.getLogger(__name__)

MANIFEST = "manifest.json"
FORMAT_NAME = "superradar-dataset"
# seed stream used for scene-free noise calibration frames
CALIBRATION_INDEX = 2**32 - 1


def file_digest(path):
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for block in iter(lambda: fh.read(1 << 20), b""):
            h.update(block)
    return h.hexdigest()


def json_bytes(obj):
    return (json.dumps(obj, indent=2, sort_keys=True) + "\n").encode()


def frame_dir_name(index):
    return f"frame_{index:05d}"


def build_scene(spec, seed):
    """Scene for a frame: ``spec`` if given, else a random street scene."""
    s_spec, s_phase = sub_seeds(seed, 2)
    if spec is None:
        spec = random_scene_spec(np.random.default_rng(s_spec))
    return generate_procedural_scene(spec, seed=s_phase)


# ---------------------------------------------------------------------------
# frame workers (top level so they pickle)


def _pair_frame(args):
    out, index, seed, cfg_dict, kappa, spec, keep_clean = args
    config = config_from_dict(cfg_dict)
    fdir = os.path.join(out, frame_dir_name(index))
    scene = build_scene(spec, seed)
    pair = generate_pair(scene, config, kappa, seed=sub_seeds(seed, 3)[2], keep_clean=keep_clean)
    io.write_scene(os.path.join(fdir, "scene.pts"), scene)
    io.write_image(os.path.join(fdir, "input.img"), pair.input_image)
    io.write_image(os.path.join(fdir, "super.img"), pair.super_image)
    files = ["scene.pts", "input.img", "super.img"]
    if keep_clean:
        io.write_image(os.path.join(fdir, "super_clean.img"), pair.super_clean)
        files.append("super_clean.img")
    meta = {
        "index": index, "seed": seed, "kappa": kappa,
        "config_digest": config_digest(config),
        "super_config_digest": config_digest(upscale_config(config, kappa)),
        "scene_digest": hashlib.sha256(io.scene_to_bytes(scene)).hexdigest(),
        "num_points": len(scene),
    }
    io.atomic_write(os.path.join(fdir, "meta.json"), json_bytes(meta))
    files.append("meta.json")
    return _record(out, index, seed, meta["scene_digest"], files)


def _simulate_frame(args):
    out, index, seed, cfg_dict, _kappa, spec, _keep = args
    config = config_from_dict(cfg_dict)
    fdir = os.path.join(out, frame_dir_name(index))
    scene = build_scene(spec, seed)
    raw = synthesize_frame(scene, config, NoiseSpec(config.noise_image_variance, sub_seeds(seed, 3)[2]))
    io.write_scene(os.path.join(fdir, "scene.pts"), scene)
    io.write_raw_cube(os.path.join(fdir, "raw.cube"), raw)
    io.write_image(os.path.join(fdir, "input.img"), process_frame(raw, config))
    meta = {"index": index, "seed": seed, "config_digest": config_digest(config),
            "scene_digest": hashlib.sha256(io.scene_to_bytes(scene)).hexdigest(),
            "num_points": len(scene), "skipped_points": raw.metadata["skipped_points"]}
    io.atomic_write(os.path.join(fdir, "meta.json"), json_bytes(meta))
    return _record(out, index, seed, meta["scene_digest"],
                   ["scene.pts", "raw.cube", "input.img", "meta.json"])


def _record(out, index, seed, scene_digest, files):
    d = frame_dir_name(index)
    return {"index": index, "dir": d, "seed": seed, "scene_digest": scene_digest,
            "files": {f: file_digest(os.path.join(out, d, f)) for f in files}}


WORKERS = {"pair": _pair_frame, "simulate": _simulate_frame}


# ---------------------------------------------------------------------------
# manifest


def manifest_header(kind, config, master_seed, frames, kappa, scene_spec, keep_clean):
    header = {
        "format": FORMAT_NAME, "version": 1, "kind": kind,
        "config": config.to_dict(), "config_digest": config_digest(config),
        "master_seed": int(master_seed), "frame_count": int(frames),
        "scene_spec": scene_spec, "keep_clean": bool(keep_clean),
    }
    if kind == "pair":
        header["kappa"] = int(kappa)
        header["super_config_digest"] = config_digest(upscale_config(config, kappa))
    return header


def load_manifest(out, verify=True):
    path = os.path.join(out, MANIFEST)
    with open(path) as fh:
        man = json.load(fh)
    if man.get("format") != FORMAT_NAME:
        raise ValueError(f"{path}: not a {FORMAT_NAME} manifest")
    if config_digest(config_from_dict(man["config"])) != man["config_digest"]:
        raise ValueError(f"{path}: config digest mismatch")
    indices = [f["index"] for f in man["frames"]]
    if len(set(indices)) != len(indices):
        raise ValueError(f"{path}: duplicate frame records")
    if verify:
        bad = [f["index"] for f in man["frames"] if not _frame_intact(out, f)]
        if bad:
            raise ValueError(f"{path}: frames failing digest check: {bad}")
    return man


def _frame_intact(out, rec):
    for name, digest in rec["files"].items():
        p = os.path.join(out, rec["dir"], name)
        if not os.path.exists(p) or file_digest(p) != digest:
            return False
    return True


def _existing(out, header):
    try:
        man = load_manifest(out, verify=False)
    except (OSError, ValueError):
        return {}
    if {k: man.get(k) for k in header} != header:
        return {}
    return {f["index"]: f for f in man["frames"] if _frame_intact(out, f)}


def run_frames(kind, out, config, master_seed=0, frames=1, kappa=12, jobs=1,
               scene_spec=None, keep_clean=False):
    """Generate (or complete) a dataset. Returns (manifest, failed frame indices)."""
    if kind not in WORKERS:
        raise ValueError(f"unknown dataset kind {kind!r}")
    os.makedirs(out, exist_ok=True)
    header = manifest_header(kind, config, master_seed, frames, kappa, scene_spec, keep_clean)
    done = _existing(out, header)
    todo = [k for k in range(frames) if k not in done]
    args = [(out, k, frame_seed(master_seed, k), config.to_dict(), kappa, scene_spec, keep_clean)
            for k in todo]
    records, failed = dict(done), []
    worker = WORKERS[kind]
    if jobs > 1 and len(args) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            futures = {pool.submit(worker, a): a[1] for a in args}
            for fut, k in futures.items():
                try:
                    records[k] = fut.result()
                except Exception as exc:  # report and keep going
                    log.error("frame %d failed: %s", k, exc)
                    failed.append(k)
    else:
        for a in args:
            try:
                records[a[1]] = worker(a)
            except Exception as exc:
                log.error("frame %d failed: %s", a[1], exc)
                failed.append(a[1])
    manifest = dict(header, frames=[records[k] for k in sorted(records)])
    if failed:
        manifest["failed_frames"] = sorted(failed)
    if todo or not os.path.exists(os.path.join(out, MANIFEST)):
        io.atomic_write(os.path.join(out, MANIFEST), json_bytes(manifest))
    return manifest, sorted(failed)


# ---------------------------------------------------------------------------
# calibration


def calibrate_noise_std(config, seed=0):
    """Empirical noise std of the processed image of a scene-free frame."""
    noise = NoiseSpec(config.noise_image_variance, frame_seed(seed, CALIBRATION_INDEX))
    image = process_frame(synthesize_frame(Scene.empty(), config, noise), config)
    return estimate_noise_std(image)


def noise_stds(manifest):
    """Calibrated image noise std of the input radar and (for pairs) its super twin."""
    config = config_from_dict(manifest["config"])
    out = {"input": calibrate_noise_std(config, manifest["master_seed"])}
    if manifest["kind"] == "pair":
        sup = upscale_config(config, manifest["kappa"])
        out["super"] = calibrate_noise_std(sup, manifest["master_seed"])
    return out


# ---------------------------------------------------------------------------
# ground truth, loss and evaluation over a pair dataset

GT_SUMMARY = "gt.json"


def _pair_manifest(out):
    man = load_manifest(out)
    if man["kind"] != "pair":
        raise ValueError(f"{out}: expected a pair dataset, found {man['kind']!r}")
    return man


def run_gt(out, binary_threshold=None, model=None):
    """Write prob.prob, binary.prob and partition.part into every frame of a pair dataset.

    ``binary_threshold`` is an intensity; by default 8 dB above the
    calibrated super-image noise std.
    """
    man = _pair_manifest(out)
    config = config_from_dict(man["config"])
    stds = noise_stds(man)
    if model is None:
        model = SigmaModel(config.noise_image_variance, config.max_range_m)
    if binary_threshold is None:
        binary_threshold = noise_threshold(stds["super"])
    frames = {}
    for rec in man["frames"]:
        fdir = os.path.join(out, rec["dir"])
        inp = io.read_image(os.path.join(fdir, "input.img"))
        sup = io.read_image(os.path.join(fdir, "super.img"))
        scene = io.read_scene(os.path.join(fdir, "scene.pts"))
        io.write_probability(os.path.join(fdir, "prob.prob"), probability_map(sup, model).p)
        io.write_probability(os.path.join(fdir, "binary.prob"),
                             binary_mapping(sup.complex, binary_threshold))
        part = partition_pixels(inp, scene, stds["input"], man["kappa"])
        io.write_partition(os.path.join(fdir, "partition.part"), part)
        frames[rec["dir"]] = {f: file_digest(os.path.join(fdir, f))
                              for f in ("prob.prob", "binary.prob", "partition.part")}
    summary = {
        "noise_std_input": stds["input"], "noise_std_super": stds["super"],
        "binary_threshold": float(binary_threshold),
        "sigma_model": {"noise_variance": model.noise_variance,
                        "max_range_m": model.max_range_m, "min_range_m": model.min_range_m},
        "frames": frames,
    }
    io.atomic_write(os.path.join(out, GT_SUMMARY), json_bytes(summary))
    return summary


def load_gt_summary(out):
    with open(os.path.join(out, GT_SUMMARY)) as fh:
        return json.load(fh)


def run_loss(out, prediction=None, mapping="probability", variant="ce", partition_mode="full",
             weights=LossWeights(), per_set_mean=False):
    """Boosting loss of a per-frame prediction file against the reference map.

    ``prediction`` names a probability file inside each frame directory;
    by default the reference itself is used.
    """
    man = _pair_manifest(out)
    ref_name = {"probability": "prob.prob", "binary": "binary.prob"}.get(mapping)
    if ref_name is None:
        raise ValueError(f"unknown mapping {mapping!r}")
    per_frame = {}
    for rec in man["frames"]:
        fdir = os.path.join(out, rec["dir"])
        ref_path = os.path.join(fdir, ref_name)
        if not os.path.exists(ref_path):
            raise FileNotFoundError(f"{ref_path}: missing, run the gt step first")
        ref = io.read_probability(ref_path)
        pred = io.read_probability(os.path.join(fdir, prediction or ref_name))
        part = io.read_partition(os.path.join(fdir, "partition.part"))
        per_frame[rec["dir"]] = boost_loss(pred, ref, part, weights, variant, partition_mode,
                                           per_set_mean)
    return {"mapping": mapping, "variant": variant, "partition": partition_mode,
            "weights": {"rho_r": weights.rho_r, "rho_s": weights.rho_s, "rho_n": weights.rho_n},
            "per_set_mean": bool(per_set_mean), "prediction": prediction or ref_name,
            "total": float(sum(per_frame.values())), "frames": per_frame}


def run_eval(out, targets=("input.img", "super.img"), thresholds=None):
    """Pooled precision/recall of each target image against super-image ground truth.

    Ground-truth points are the above-threshold pixels of ``super_clean.img``
    when present, else of ``super.img``. Returns {target: (pooled report, per-frame APs)}.
    """
    man = _pair_manifest(out)
    try:
        std_super = load_gt_summary(out)["noise_std_super"]
    except (OSError, KeyError, ValueError):
        std_super = noise_stds(man)["super"]
    thr = noise_threshold(std_super)
    gts = []
    for rec in man["frames"]:
        fdir = os.path.join(out, rec["dir"])
        name = "super_clean.img" if "super_clean.img" in rec["files"] else "super.img"
        gts.append(extract_gt_points(io.read_image(os.path.join(fdir, name)), thr))
    results = {}
    for target in targets:
        images = [io.read_image(os.path.join(out, rec["dir"], target)) for rec in man["frames"]]
        pooled = pooled_precision_recall(zip(images, gts), thresholds)
        per = [precision_recall_ap(img, g, thresholds).average_precision
               for img, g in zip(images, gts)]
        results[target] = (pooled, per)
    return results
