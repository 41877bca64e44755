"""Command-line surface for the library.

Subcommands:
  transform  rewrite a strided network spec into an equivalent stride-1 spec
  verify     numerically compare a transformed spec against its source
  report     per-layer parameter sharing table for an original/transformed pair
  selftest   run the bundled seeded property suite

Exit codes: 0 success, 1 verification or selftest failure, 2 usage or
document-format error, 3 divisibility/shape error, 4 I/O error.
"""

from __future__ import annotations

import argparse
import json
import sys

from .network import (
    ActivationLayer,
    ConvLayer,
    NetworkSpec,
    infer_shapes,
    parameter_report,
    verify_equivalence,
)
from .sampling import RaggedSamplingError
from .selftest import PROPERTY_NAMES, format_report, run_selftest
from .specio import (
    SpecDocument,
    SpecFormatError,
    TransformMetadata,
    load_document,
    save_document,
)
from .transform import sharing_trace, transform_network


def _positive_int(text: str) -> int:
    value = int(text)
    if value < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {text}")
    return value


def _shape_text(shape) -> str:
    if isinstance(shape, tuple):
        return "x".join(str(v) for v in shape)
    return str(shape)


def _describe_layer(layer) -> str:
    if isinstance(layer, ConvLayer):
        kh, kw = layer.kernel
        text = f"conv {layer.channels_out} @ {kh}x{kw}"
        if layer.stride != 1:
            text += f" stride {layer.stride}"
        return text
    if isinstance(layer, ActivationLayer):
        return f"activation {layer.function}"
    return f"fully-connected {layer.units}"


def format_architecture(spec: NetworkSpec) -> str:
    """Layer-by-layer table of a network and its per-layer output shapes."""
    lines = [f"{spec.name}: input {_shape_text(spec.input_shape)}"]
    for i, (layer, shape) in enumerate(zip(spec.layers, infer_shapes(spec))):
        lines.append(f"  {i:>2}  {_describe_layer(layer):<30} -> {_shape_text(shape)}")
    return "\n".join(lines)


def cmd_transform(args) -> int:
    doc = load_document(args.input)
    spec = doc.network
    if all(l.stride == 1 for l in spec.layers if isinstance(l, ConvLayer)):
        print("warning: all strides are 1; nothing to eliminate", file=sys.stderr)
    result = transform_network(spec)
    print(format_architecture(spec))
    print()
    print(format_architecture(result.network))
    out = SpecDocument(
        network=result.network,
        transform=TransformMetadata(
            source=spec.name,
            input_map=result.input_map,
            flatten_permutation=result.flatten_permutation,
        ),
    )
    save_document(args.output, out, weights_mode=doc.weights_mode)
    print(f"\nwrote {args.output}")
    return 0


def _load_linked_pair(original_path, transformed_path):
    odoc = load_document(original_path)
    tdoc = load_document(transformed_path)
    meta = tdoc.transform
    if meta is None:
        raise SpecFormatError(
            f"{transformed_path}: no transform metadata; produce the file with "
            "`destride transform`"
        )
    if meta.source != odoc.network.name:
        raise SpecFormatError(
            f"transform source '{meta.source}' does not match original "
            f"network '{odoc.network.name}'"
        )
    return odoc, tdoc, meta


def cmd_verify(args) -> int:
    odoc, tdoc, meta = _load_linked_pair(args.original, args.transformed)
    for path, doc in ((args.original, odoc), (args.transformed, tdoc)):
        if any(
            getattr(l, "weights", None) is None
            for l in doc.network.layers
            if not isinstance(l, ActivationLayer)
        ):
            raise ValueError(
                f"{path}: document carries no weights; verification needs "
                "parameterized networks (save with inline or sidecar weights)"
            )
    report = verify_equivalence(
        odoc.network,
        tdoc.network,
        meta.input_map,
        trials=args.trials,
        tol=args.tol,
        seed=args.seed,
    )
    if args.json:
        print(json.dumps(report.as_dict(), indent=1))
    else:
        print(
            f"{odoc.network.name} vs {tdoc.network.name}: "
            f"{report.trials} trials, tolerance {report.tolerance:g}"
        )
        print(f"max |original - transformed| = {report.max_abs_dev:.3e}")
        print("PASS" if report.passed else "FAIL")
    return 0 if report.passed else 1


def cmd_report(args) -> int:
    odoc, tdoc, _ = _load_linked_pair(args.original, args.transformed)
    trace = sharing_trace(odoc.network)
    rows = parameter_report(odoc.network, tdoc.network, trace)
    if args.json:
        print(json.dumps([r.as_dict() for r in rows], indent=1))
        return 0
    print(f"parameter sharing: {odoc.network.name} -> {tdoc.network.name}")
    header = f"{'layer':>5}  {'kind':<16} {'original':>9} {'stored':>9} {'padding':>9} {'distinct':>9} {'replication':>11}"
    print(header)
    for r in rows:
        print(
            f"{r.layer_index:>5}  {r.kind:<16} {r.original_count:>9} "
            f"{r.stored_volume:>9} {r.padding_zeros:>9} {r.distinct_sources:>9} "
            f"{r.replication:>11}"
        )
    total_orig = sum(r.original_count for r in rows)
    total_stored = sum(r.stored_volume for r in rows)
    print(f"totals: {total_orig} original parameters, {total_stored} stored values")
    return 0


def cmd_selftest(args) -> int:
    results = run_selftest(seed=args.seed, names=args.property)
    print(format_report(results, args.seed))
    return 0 if all(r.passed for r in results) else 1


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="destride",
        description="Rewrite strided all-convolutional networks into "
        "equivalent stride-1 networks and verify the equivalence.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("transform", help="rewrite a spec file to unity strides")
    p.add_argument("input", help="path of the network spec document")
    p.add_argument("output", help="path to write the transformed document")
    p.set_defaults(func=cmd_transform)

    p = sub.add_parser("verify", help="compare a transformed spec to its source")
    p.add_argument("original", help="path of the source spec document")
    p.add_argument("transformed", help="path of the transformed spec document")
    p.add_argument("--trials", type=_positive_int, default=100,
                   help="number of random inputs (default 100)")
    p.add_argument("--tol", type=float, default=1e-9,
                   help="max absolute deviation allowed (default 1e-9)")
    p.add_argument("--seed", type=int, default=0, help="input generator seed")
    p.add_argument("--json", action="store_true",
                   help="print the report as JSON")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("report", help="per-layer parameter sharing table")
    p.add_argument("original", help="path of the source spec document")
    p.add_argument("transformed", help="path of the transformed spec document")
    p.add_argument("--json", action="store_true",
                   help="print the rows as JSON")
    p.set_defaults(func=cmd_report)

    p = sub.add_parser("selftest", help="run the seeded property suite")
    p.add_argument("--seed", type=int, default=0, help="suite seed")
    p.add_argument("--property", action="append", choices=PROPERTY_NAMES,
                   metavar="NAME",
                   help="run only the named property (repeatable); one of: "
                   + ", ".join(PROPERTY_NAMES))
    p.set_defaults(func=cmd_selftest)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return e.code if isinstance(e.code, int) else 0
    try:
        return args.func(args)
    except SpecFormatError as e:
        print(f"error: {e}", file=sys.stderr)
        return 2
    except (RaggedSamplingError, ValueError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 3
    except OSError as e:
        print(f"error: {e}", file=sys.stderr)
        return 4


if __name__ == "__main__":
    sys.exit(main())
