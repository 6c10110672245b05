"""Command-line interface.

Subcommands: synthesize, encode, decode, predict, sr, counters, metrics,
serve, schema, make-fixture-weights.  Every command exits 0 on success and
prints a single machine-parsable ``error: <kind>: <message>`` line on
failure (exit 2 for missing files/usage problems, 1 otherwise).
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

import numpy as np
import yaml

from . import engine, image_io, metrics, space, synthesize, weights_io
from .errors import DegradeForgeError

ENV_WEIGHTS = "DASR_WEIGHTS"


class _CliError(Exception):
    """Printed as a single machine-parsable line; carries the exit code."""

    def __init__(self, kind: str, msg: str, code: int = 2):
        super().__init__(f"error: {kind}: {msg}")
        self.code = code


def _weights_path(args) -> Path:
    path = args.weights or os.environ.get(ENV_WEIGHTS)
    if not path:
        raise _CliError("usage", f"no weights file; pass --weights or set {ENV_WEIGHTS}")
    p = Path(path)
    if not p.is_file():
        raise _CliError("missing-file", f"weights file not found: {p}")
    return p


def _usage_error(msg: str) -> int:
    print(f"error: usage: {msg}", file=sys.stderr)
    return 2


def _parse_overrides(pairs: list[str]) -> dict[int, float]:
    overrides = {}
    for pair in pairs:
        try:
            key, _, value = pair.partition("=")
            if not key.startswith("v"):
                raise ValueError
            slot = int(key[1:])
            overrides[slot] = float(value)
        except ValueError:
            raise _CliError("usage", f"override must look like vK=X, got {pair!r}")
        if not 1 <= slot <= space.VECTOR_LEN:
            raise _CliError("usage", f"override index {slot} outside 1..{space.VECTOR_LEN}")
        if not 0.0 <= overrides[slot] <= 1.0:
            raise _CliError("usage", f"override value for v{slot} outside [0, 1]")
    return overrides


def _print_vector(v: np.ndarray) -> None:
    # repr floats round-trip exactly through text
    print(" ".join(repr(float(x)) for x in v))


# ---------------------------------------------------------------------------
# Subcommands
# ---------------------------------------------------------------------------

def cmd_synthesize(args) -> int:
    result = synthesize.synthesize_dataset(
        args.hr_dir, args.out_dir, per_level_count=args.per_level, base_seed=args.seed)
    counts = result.per_level_counts
    print(f"records: {len(result.records)} ({json.dumps(counts)})")
    print(f"manifest: {result.manifest_path}")
    if result.skipped:
        print(f"error: skipped: {len(result.skipped)} inputs could not be processed",
              file=sys.stderr)
        return 1
    return 0


def cmd_encode(args) -> int:
    if args.params_json:
        doc = json.loads(Path(args.params_json).read_text())
        params = space.params_from_dict(doc)
    else:
        level = space.Level(args.level)
        params = space.sample_params(level, np.random.default_rng(args.seed))
    v = space.encode(params)
    _print_vector(v)
    print(json.dumps(space.params_to_dict(params), indent=2))
    return 0


def cmd_decode(args) -> int:
    if args.vector_file:
        text = Path(args.vector_file).read_text().split()
    else:
        text = args.values
    if len(text) != space.VECTOR_LEN:
        return _usage_error(f"expected {space.VECTOR_LEN} values, got {len(text)}")
    v = np.array([float(x) for x in text])
    params = space.decode(v)
    print(json.dumps(space.params_to_dict(params), indent=2))
    return 0


def cmd_predict(args) -> int:
    image_path = Path(args.image)
    if not image_path.is_file():
        raise _CliError("missing-file", f"image not found: {image_path}")
    bundle = weights_io.load_bundle(_weights_path(args))
    img = image_io.read_png(image_path)
    v_hat = engine.predict_degradation(img, bundle.predictor)
    _print_vector(v_hat)
    interpreted = space.decode(np.clip(v_hat, 0.0, 1.0))
    print(json.dumps(space.params_to_dict(interpreted), indent=2))
    return 0


def cmd_sr(args) -> int:
    image_path = Path(args.image)
    if not image_path.is_file():
        raise _CliError("missing-file", f"image not found: {image_path}")
    overrides = _parse_overrides(args.override)
    bundle = weights_io.load_bundle(_weights_path(args))
    img = image_io.read_png(image_path)

    override_v = None
    if overrides:
        override_v = engine.predict_degradation(img, bundle.predictor)
        for slot, value in overrides.items():
            override_v[slot - 1] = value
    sr, v_hat, a = engine.super_resolve(img, bundle.bank, bundle.predictor,
                                        bundle.weighting, override_v=override_v)
    out_path = Path(args.out) if args.out else image_path.with_name(image_path.stem + "_x4.png")
    image_io.write_png(out_path, sr)
    print(f"wrote {out_path} ({sr.shape[1]}x{sr.shape[0]})")
    print("v_hat:", " ".join(f"{x:.6f}" for x in v_hat))
    print("a:", " ".join(f"{x:.6f}" for x in a))
    return 0


def cmd_counters(args) -> int:
    expert = engine.expert_topology()
    predictor = engine.predictor_topology()
    weighting_params = 64 * space.VECTOR_LEN + 64 + 5 * 64 + 5
    if args.which == "params":
        e = engine.count_params(expert)
        p = engine.count_params(predictor)
        print(f"expert.params\t{e}")
        print(f"experts5.params\t{5 * e}")
        print(f"predictor.params\t{p}")
        print(f"weighting.params\t{weighting_params}")
        print(f"total.params\t{5 * e + p + weighting_params}")
    else:
        h, w = args.height, args.width
        e = engine.count_flops(expert, h, w)
        p = engine.count_flops(predictor, h, w)
        a = (64 * space.VECTOR_LEN + 5 * 64) / 1e9
        print(f"expert.gmac\t{e:.3f}")
        print(f"predictor+weighting.gmac\t{p + a:.3f}")
        print(f"total.gmac\t{e + p + a:.3f}")
    return 0


def _image_list(path: Path) -> list[Path]:
    if path.is_dir():
        return sorted(p for p in path.iterdir()
                      if p.suffix.lower() in synthesize.IMAGE_SUFFIXES)
    return [path]


def cmd_metrics(args) -> int:
    ref_path, test_path = Path(args.reference), Path(args.test)
    for p in (ref_path, test_path):
        if not p.exists():
            raise _CliError("missing-file", str(p))
    refs, tests = _image_list(ref_path), _image_list(test_path)
    if len(refs) != len(tests):
        return _usage_error(f"{len(refs)} reference vs {len(tests)} test images")
    psnrs, l1s = [], []
    for ref_file, test_file in zip(refs, tests):
        a, b = image_io.read_png(ref_file), image_io.read_png(test_file)
        p = metrics.psnr_y(a, b)
        l = metrics.pixel_loss(b, a)
        psnrs.append(p)
        l1s.append(l)
        print(f"{ref_file.name}\t{test_file.name}\t{p:.4f}\t{l:.6f}")
    finite = [p for p in psnrs if p != float("inf")] or [float("inf")]
    print(f"aggregate\tmean\t{sum(finite) / len(finite):.4f}\t{sum(l1s) / len(l1s):.6f}")
    return 0


def cmd_serve(args) -> int:
    import uvicorn

    from .service import create_app

    weights = args.weights or os.environ.get(ENV_WEIGHTS)
    app = create_app(weights_path=weights)
    uvicorn.run(app, host=args.host, port=args.port, log_level="warning")
    return 0


def cmd_schema(args) -> int:
    print(yaml.safe_dump(space.schema_to_dict(), sort_keys=False), end="")
    return 0


def cmd_make_fixture_weights(args) -> int:
    bundle = weights_io.make_fixture_bundle(seed=args.seed, n_experts=args.experts)
    weights_io.save_bundle(args.out, bundle)
    print(f"wrote {args.out} ({bundle.bank.n} experts, seed {args.seed})")
    return 0


# ---------------------------------------------------------------------------
# Parser
# ---------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="degrade-forge",
        description="Degradation synthesis, codec, counters, and adaptive super-resolution.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("synthesize", help="degrade a directory of HR images into LR pairs")
    p.add_argument("--hr-dir", required=True)
    p.add_argument("--out-dir", required=True)
    p.add_argument("--per-level", type=int, default=1)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_synthesize)

    p = sub.add_parser("encode", help="sample or read parameters and print their 33-vector")
    p.add_argument("--level", choices=[lv.value for lv in space.Level], default="S1")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--params-json", help="encode this params JSON instead of sampling")
    p.set_defaults(func=cmd_encode)

    p = sub.add_parser("decode", help="print the parameters a 33-vector describes")
    p.add_argument("values", nargs="*", help="33 values in [0, 1]")
    p.add_argument("--vector-file", help="whitespace-separated vector file")
    p.set_defaults(func=cmd_decode)

    p = sub.add_parser("predict", help="estimate the degradation vector of an image")
    p.add_argument("image")
    p.add_argument("--weights")
    p.set_defaults(func=cmd_predict)

    p = sub.add_parser("sr", help="4x super-resolve an image")
    p.add_argument("image")
    p.add_argument("--weights")
    p.add_argument("--out")
    p.add_argument("--override", action="append", default=[], metavar="vK=X",
                   help="pin degradation slot K to X in [0, 1] (repeatable)")
    p.set_defaults(func=cmd_sr)

    p = sub.add_parser("counters", help="analytic parameter and FLOPs counts")
    p.add_argument("which", choices=["params", "flops"])
    p.add_argument("height", type=int, nargs="?", default=256)
    p.add_argument("width", type=int, nargs="?", default=256)
    p.set_defaults(func=cmd_counters)

    p = sub.add_parser("metrics", help="PSNR-Y and L1 between image pairs (TSV)")
    p.add_argument("reference")
    p.add_argument("test")
    p.set_defaults(func=cmd_metrics)

    p = sub.add_parser("serve", help="run the HTTP service")
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8000)
    p.add_argument("--weights")
    p.set_defaults(func=cmd_serve)

    p = sub.add_parser("schema", help="dump the degradation-space configuration")
    p.set_defaults(func=cmd_schema)

    p = sub.add_parser("make-fixture-weights", help="write seeded random weights")
    p.add_argument("out")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--experts", type=int, default=5)
    p.set_defaults(func=cmd_make_fixture_weights)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except _CliError as exc:
        print(exc, file=sys.stderr)
        return exc.code
    except FileNotFoundError as exc:
        print(f"error: missing-file: {exc}", file=sys.stderr)
        return 2
    except DegradeForgeError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1
    except Exception as exc:  # noqa: BLE001 - CLI boundary
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
