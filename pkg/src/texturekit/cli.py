"""Command line front end.

Subcommands: ``contourlet``, ``tiem``, ``ctiem``, ``sample``,
``distill-loss``, ``reconstruct``, ``selftest``. Artifacts are TXK1
tensors plus a ``manifest.json`` listing every file with its shape and
sha256; identical invocations write byte-identical outputs. A JSON
config file (``--config``) may pre-set any flag, with explicit flags
winning. Exit codes: 0 success, 1 usage or invalid input, 2 I/O
failure, 3 invariant/selftest failure. ``TEXTUREKIT_THREADS`` caps the
numeric library thread pools.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import os
import re
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .cdm import CdmConfig, cdm_forward, structural_loss
from .ctiem import ctiem_forward
from .dfb import DfbConfig, dfb_decompose, dfb_reconstruct
from .errors import FormatError, NumericError, ShapeError, TextureKitError
from .losses import qcl_loss, response_kl_loss, total_loss
from .pyramid import LpConfig, lp_analyze, lp_synthesize, reflect_pad
from .sampler import SamplerConfig, crop_region, sample_regions
from .selftest import run_selftest
from .tensor_io import (
    FeatureMap,
    feature_map,
    load_image,
    load_weights,
    read_tensor,
    snap_unit_sum,
    write_tensor,
)
from .tiem import StatFeature, tiem_forward
from .weights import default_weight_set

EXIT_USAGE = 1
EXIT_IO = 2
EXIT_INVARIANT = 3


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # argparse defaults to exit code 2
        self.print_usage(sys.stderr)
        raise SystemExit(self.exit_with(message))

    def exit_with(self, message):
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        return EXIT_USAGE


def _build_parser() -> _Parser:
    parser = _Parser(prog="texturekit", description=__doc__)
    parser.add_argument("--version", action="version", version=f"texturekit {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def common(p):
        p.add_argument("--out", help="output directory (default: current directory)")
        p.add_argument("--config", help="JSON file with default flag values")

    p = sub.add_parser("contourlet", help="dump directional subbands per pyramid level")
    p.add_argument("image")
    p.add_argument("--levels", type=int, help="pyramid depth (default 2)")
    p.add_argument("--dfb-levels", help="comma list of wedge exponents per level (default 4,3)")
    p.add_argument("--factor", type=int, help="decimation factor (default 2)")
    p.add_argument("--transition", type=float, help="mask transition width (default 0.1)")
    common(p)

    p = sub.add_parser("tiem", help="region texture statistics end to end")
    p.add_argument("image")
    p.add_argument("--n", type=int, help="quantization levels (default 128)")
    p.add_argument("--theta", type=float, help="rebalance threshold (default 0.9)")
    p.add_argument("--weights", help="TXKW weight bundle (default: built-in)")
    p.add_argument("--rect", help="top,left,height,width region (default: whole image)")
    common(p)

    p = sub.add_parser("ctiem", help="full-map co-occurrence statistics")
    p.add_argument("image")
    p.add_argument("--n", type=int, help="quantization levels (default 8)")
    p.add_argument("--theta", type=float, help="rebalance threshold (default 0.9)")
    p.add_argument("--steps", help="comma list of dilation steps (default 1,3,5)")
    p.add_argument("--weights", help="TXKW weight bundle (default: built-in)")
    common(p)

    p = sub.add_parser("sample", help="draw importance-weighted regions")
    p.add_argument("image")
    p.add_argument("--m", type=int, help="number of samples (required)")
    p.add_argument("--k", type=float, help="over-generation factor (default 2)")
    p.add_argument("--beta", type=float, help="importance fraction (default 0.7)")
    p.add_argument("--seed", type=int, help="PRNG seed (default 0)")
    common(p)

    p = sub.add_parser("distill-loss", help="combine losses from dumped feature dirs")
    p.add_argument("--teacher-dir")
    p.add_argument("--student-dir")
    p.add_argument("--l-seg", type=float, help="externally computed task loss (default 0)")
    p.add_argument("--l-adv", type=float, help="externally computed adversarial score (default 0)")
    p.add_argument("--lambda1", type=float, help="structural+statistical weight (default 0.9)")
    p.add_argument("--lambda2", type=float, help="response weight (default 3)")
    p.add_argument("--lambda3", type=float, help="adversarial weight (default 0.01)")
    p.add_argument("--region-dims", help="HxW used by the stat prefactor (default: from teacher R.txk)")
    common(p)

    p = sub.add_parser("reconstruct", help="round-trip pyramid + subbands, report max error")
    p.add_argument("image")
    p.add_argument("--dfb", type=int, help="wedge exponent (default 3)")
    p.add_argument("--factor", type=int, help="decimation factor (default 2)")
    p.add_argument("--transition", type=float, help="mask transition width (default 0.1)")
    common(p)

    p = sub.add_parser("selftest", help="run the built-in invariant checks")
    common(p)

    return parser


class _Options:
    """Flag values with config-file fallback: flag > config[cmd] > default."""

    def __init__(self, args):
        self.args = args
        self.table = {}
        if getattr(args, "config", None):
            try:
                with open(args.config, "r", encoding="utf-8") as fh:
                    loaded = json.load(fh)
            except OSError as exc:
                raise _IoFail(f"cannot read config {args.config}: {exc}") from exc
            except json.JSONDecodeError as exc:
                raise _UsageFail(f"config {args.config} is not valid JSON: {exc}") from exc
            if not isinstance(loaded, dict):
                raise _UsageFail(f"config {args.config} must hold a JSON object")
            section = loaded.get(args.command, {})
            if not isinstance(section, dict):
                raise _UsageFail(f"config section {args.command!r} must be an object")
            self.table = {**{k: v for k, v in loaded.items() if not isinstance(v, dict)}, **section}

    def get(self, name, default=None):
        flag = getattr(self.args, name.replace("-", "_"), None)
        if flag is not None:
            return flag
        return self.table.get(name, default)


class _UsageFail(Exception):
    pass


class _IoFail(Exception):
    pass


def _out_dir(opts) -> Path:
    out = Path(opts.get("out", "."))
    try:
        out.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise _IoFail(f"cannot create output directory {out}: {exc}") from exc
    return out


def _load(path) -> FeatureMap:
    return load_image(path)


def _weights_for(opts, channels: int):
    path = opts.get("weights")
    if path:
        return load_weights(path)
    return default_weight_set(channels)


def _write_artifacts(out: Path, command: str, params: dict, tensors: dict, extras: dict | None = None) -> None:
    """Write tensors + any extra text files, then the manifest."""
    records = []
    for name, fm in sorted(tensors.items()):
        path = out / name
        try:
            write_tensor(path, fm)
        except OSError as exc:
            raise _IoFail(f"cannot write {path}: {exc}") from exc
        records.append(
            {
                "name": name,
                "shape": list(fm.shape),
                "sha256": hashlib.sha256(path.read_bytes()).hexdigest(),
            }
        )
    for name, text in sorted((extras or {}).items()):
        path = out / name
        try:
            path.write_text(text, encoding="utf-8")
        except OSError as exc:
            raise _IoFail(f"cannot write {path}: {exc}") from exc
        records.append(
            {
                "name": name,
                "shape": None,
                "sha256": hashlib.sha256(path.read_bytes()).hexdigest(),
            }
        )
    manifest = {"command": command, "parameters": params, "artifacts": records}
    text = json.dumps(manifest, sort_keys=True, indent=2) + "\n"
    try:
        (out / "manifest.json").write_text(text, encoding="utf-8")
    except OSError as exc:
        raise _IoFail(f"cannot write manifest: {exc}") from exc


def _vector_map(values: np.ndarray, snap: bool = False) -> FeatureMap:
    v = np.asarray(values, dtype=np.float64).ravel()[None, None, :]
    fm = feature_map(v)
    if snap:
        fm = feature_map(snap_unit_sum(fm.data))
    return fm


def _matrix_map(values: np.ndarray, snap: bool = False) -> FeatureMap:
    m = np.asarray(values, dtype=np.float64)[None]
    fm = feature_map(m)
    if snap:
        fm = feature_map(snap_unit_sum(fm.data))
    return fm


def _cmd_contourlet(opts) -> int:
    out = _out_dir(opts)
    x = _load(opts.args.image)
    num_levels = int(opts.get("levels", 2))
    raw = opts.get("dfb-levels", "4,3")
    dfb_levels = tuple(int(t) for t in str(raw).split(",") if t != "")
    factor = int(opts.get("factor", 2))
    transition = float(opts.get("transition", 0.1))
    cfg = CdmConfig(
        num_levels=num_levels,
        dfb_levels=dfb_levels,
        lp=LpConfig(factor=factor),
        transition_width=transition,
    )
    x = reflect_pad(x, factor**num_levels)
    feats = cdm_forward(x, cfg)
    tensors = {}
    for n, stack in enumerate(feats.levels, start=1):
        for k in range(stack.shape[0]):
            tensors[f"L{n}_b{k}.txk"] = feature_map(stack[k])
    params = {
        "image": Path(opts.args.image).name,
        "levels": num_levels,
        "dfb_levels": list(dfb_levels),
        "factor": factor,
        "transition": transition,
    }
    _write_artifacts(out, "contourlet", params, tensors)
    print(f"wrote {len(tensors)} subbands to {out}")
    return 0


def _parse_rect(text):
    parts = [int(t) for t in str(text).split(",")]
    if len(parts) != 4:
        raise _UsageFail(f"--rect wants top,left,height,width, got {text!r}")
    return tuple(parts)


def _cmd_tiem(opts) -> int:
    out = _out_dir(opts)
    x = _load(opts.args.image)
    if opts.get("rect"):
        x = crop_region(x, _parse_rect(opts.get("rect")))
    n = int(opts.get("n", 128))
    theta = float(opts.get("theta", 0.9))
    weights = _weights_for(opts, x.channels)
    _, counting, stat = tiem_forward(x, weights, num_levels=n, threshold=theta)
    tensors = {
        "C.txk": _vector_map(counting.counts, snap=True),
        "Ct.txk": _vector_map(counting.denoised, snap=True),
        "D.txk": _matrix_map(stat.stat),
        "Lp.txk": _matrix_map(stat.levels2),
        "R.txk": stat.reprojection,
    }
    params = {
        "image": Path(opts.args.image).name,
        "n": n,
        "theta": theta,
        "rect": list(_parse_rect(opts.get("rect"))) if opts.get("rect") else None,
        "weights": Path(opts.get("weights")).name if opts.get("weights") else "builtin",
    }
    _write_artifacts(out, "tiem", params, tensors)
    print(f"wrote texture statistics to {out}")
    return 0


def _cmd_ctiem(opts) -> int:
    out = _out_dir(opts)
    x = _load(opts.args.image)
    n = int(opts.get("n", 8))
    theta = float(opts.get("theta", 0.9))
    steps = tuple(int(t) for t in str(opts.get("steps", "1,3,5")).split(",") if t != "")
    weights = _weights_for(opts, x.channels)
    state = ctiem_forward(x, weights, num_levels=n, threshold=theta, steps=steps)
    tensors = {"T.txk": state.texture}
    for step in state.steps:
        tensors[f"C_s{step}.txk"] = _matrix_map(state.counts[step], snap=True)
        tensors[f"Ct_s{step}.txk"] = _matrix_map(state.denoised[step], snap=True)
    params = {
        "image": Path(opts.args.image).name,
        "n": n,
        "theta": theta,
        "steps": list(state.steps),
        "weights": Path(opts.get("weights")).name if opts.get("weights") else "builtin",
    }
    _write_artifacts(out, "ctiem", params, tensors)
    print(f"wrote co-occurrence statistics to {out}")
    return 0


def _cmd_sample(opts) -> int:
    out = _out_dir(opts)
    x = _load(opts.args.image)
    m = opts.get("m")
    if m is None:
        raise _UsageFail("sample requires --m")
    cfg = SamplerConfig(
        num_samples=int(m),
        overgen_factor=float(opts.get("k", 2.0)),
        importance_fraction=float(opts.get("beta", 0.7)),
        seed=int(opts.get("seed", 0)),
    )
    samples = sample_regions(x, cfg)
    payload = {
        "samples": [
            {
                "center": list(s.center),
                "rect": list(s.rect),
                "score": s.score,
                "origin": s.origin,
            }
            for s in samples
        ]
    }
    text = json.dumps(payload, sort_keys=True, indent=2) + "\n"
    params = {
        "image": Path(opts.args.image).name,
        "m": cfg.num_samples,
        "k": cfg.overgen_factor,
        "beta": cfg.importance_fraction,
        "seed": cfg.seed,
    }
    _write_artifacts(out, "sample", params, {}, extras={"samples.json": text})
    print(text, end="")
    return 0


_SUBBAND_RE = re.compile(r"^L(\d+)_b(\d+)\.txk$")


def _structural_from_dir(path: Path):
    from .cdm import StructuralFeature

    found = {}
    for entry in path.iterdir():
        match = _SUBBAND_RE.match(entry.name)
        if match:
            found.setdefault(int(match.group(1)), {})[int(match.group(2))] = entry
    if not found:
        return None
    stacks = []
    for n in sorted(found):
        bands = found[n]
        ordered = [bands[k] for k in sorted(bands)]
        stacks.append(np.stack([read_tensor(p).data for p in ordered]))
    return StructuralFeature(levels=tuple(stacks))


def _stat_from_dir(path: Path) -> StatFeature | None:
    d_path = path / "D.txk"
    l_path = path / "Lp.txk"
    if not (d_path.exists() and l_path.exists()):
        return None
    d = read_tensor(d_path)
    lp = read_tensor(l_path)
    r_path = path / "R.txk"
    reproj = read_tensor(r_path) if r_path.exists() else feature_map(np.zeros((1, 1, 1)))
    n = d.height
    return StatFeature(
        stat=d.data[0].astype(np.float64),
        graph=np.full((n, n), 1.0 / n),
        levels2=lp.data[0].astype(np.float64),
        reprojection=reproj,
    )


def _cmd_distill_loss(opts) -> int:
    out = _out_dir(opts)
    t_dir = opts.get("teacher-dir")
    s_dir = opts.get("student-dir")
    if not t_dir or not s_dir:
        raise _UsageFail("distill-loss requires --teacher-dir and --student-dir")
    t_path, s_path = Path(t_dir), Path(s_dir)
    for p in (t_path, s_path):
        if not p.is_dir():
            raise _IoFail(f"{p} is not a directory")

    record = {"components": []}
    l_str = 0.0
    t_struct = _structural_from_dir(t_path)
    s_struct = _structural_from_dir(s_path)
    if t_struct is not None and s_struct is not None:
        l_str = structural_loss(t_struct, s_struct)
        record["components"].append("structural")

    l_sta = 0.0
    t_stat = _stat_from_dir(t_path)
    s_stat = _stat_from_dir(s_path)
    if t_stat is not None and s_stat is not None:
        dims_flag = opts.get("region-dims")
        if dims_flag:
            h, w = (int(v) for v in str(dims_flag).lower().split("x"))
        elif (t_path / "R.txk").exists():
            r = t_stat.reprojection
            h, w = r.height, r.width
        else:
            raise _UsageFail("stat features found but no --region-dims and no teacher R.txk")
        terms = qcl_loss(t_stat, s_stat, (h, w))
        l_sta = terms.total
        record["stat_detail"] = {
            "stat_loss": terms.stat_loss,
            "corr_teacher": terms.corr_teacher,
            "corr_student": terms.corr_student,
        }
        record["components"].append("statistical")

    l_re = 0.0
    if (t_path / "resp.txk").exists() and (s_path / "resp.txk").exists():
        l_re = response_kl_loss(
            read_tensor(t_path / "resp.txk").data.astype(np.float64),
            read_tensor(s_path / "resp.txk").data.astype(np.float64),
        )
        record["components"].append("response")

    l_seg = float(opts.get("l-seg", 0.0))
    l_adv = float(opts.get("l-adv", 0.0))
    lambda1 = float(opts.get("lambda1", 0.9))
    lambda2 = float(opts.get("lambda2", 3.0))
    lambda3 = float(opts.get("lambda3", 0.01))
    record.update(
        {
            "l_seg": l_seg,
            "l_str": l_str,
            "l_sta": l_sta,
            "l_re": l_re,
            "l_adv": l_adv,
            "lambda1": lambda1,
            "lambda2": lambda2,
            "lambda3": lambda3,
            "total": total_loss(l_seg, l_str, l_sta, l_re, l_adv, lambda1, lambda2, lambda3),
        }
    )
    text = json.dumps(record, sort_keys=True, indent=2) + "\n"
    params = {"teacher": str(t_path), "student": str(s_path)}
    _write_artifacts(out, "distill-loss", params, {}, extras={"loss.json": text})
    print(text, end="")
    return 0


def _cmd_reconstruct(opts) -> int:
    x = _load(opts.args.image)
    factor = int(opts.get("factor", 2))
    m = int(opts.get("dfb", 3))
    transition = float(opts.get("transition", 0.1))
    x = reflect_pad(x, factor)
    low, high = lp_analyze(x, LpConfig(factor=factor))
    bands = dfb_decompose(high, DfbConfig(m, transition))
    back = lp_synthesize(low, dfb_reconstruct(bands), LpConfig(factor=factor))
    err = float(np.abs(back.data.astype(np.float64) - x.data.astype(np.float64)).max())
    print(f"max reconstruction error {err:.3e}")
    if err >= 1e-5:
        print("error exceeds the 1e-5 bound", file=sys.stderr)
        return EXIT_INVARIANT
    return 0


def _cmd_selftest(opts) -> int:
    return 0 if run_selftest() else EXIT_INVARIANT


_COMMANDS = {
    "contourlet": _cmd_contourlet,
    "tiem": _cmd_tiem,
    "ctiem": _cmd_ctiem,
    "sample": _cmd_sample,
    "distill-loss": _cmd_distill_loss,
    "reconstruct": _cmd_reconstruct,
    "selftest": _cmd_selftest,
}


def _cap_threads() -> None:
    cap = os.environ.get("TEXTUREKIT_THREADS")
    if not cap:
        return
    for var in ("OMP_NUM_THREADS", "OPENBLAS_NUM_THREADS", "MKL_NUM_THREADS"):
        os.environ.setdefault(var, cap)


def main(argv=None) -> int:
    _cap_threads()
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else 0
    try:
        opts = _Options(args)
        return _COMMANDS[args.command](opts)
    except _UsageFail as exc:
        print(f"texturekit: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except _IoFail as exc:
        print(f"texturekit: i/o error: {exc}", file=sys.stderr)
        return EXIT_IO
    except FormatError as exc:
        print(f"texturekit: i/o error: {exc}", file=sys.stderr)
        return EXIT_IO
    except (ShapeError, NumericError, ValueError) as exc:
        print(f"texturekit: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except TextureKitError as exc:  # pragma: no cover - safety net
        print(f"texturekit: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    raise SystemExit(main())
