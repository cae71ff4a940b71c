"""Command-line front end: grade, equations, verify, solve, selftest.

File formats are JSON with sorted keys and 17-significant-digit floats, so
identical inputs serialize to identical bytes.  Complex scalars are stored
as [re, im] pairs.  Exit codes: 0 ok, 1 verification failed, 2 invalid
input, 3 numeric degeneracy, 4 blow-up, 5 non-convergence.
"""

from __future__ import annotations

import argparse
import json
import math
import sys

import numpy as np

from .cartan import cartan_matrix
from .exact import ShapeError, SingularMatrixError
from .grading import (
    DynkinLabels,
    GradationError,
    graded_decomposition,
    labels_to_block_structure,
    levi_type,
    operator_from_labels,
)
from .liealg import SeriesTag
from .solver import (
    BlowUpError,
    CharacteristicData,
    ConvergenceError,
    liouville_boundary,
    liouville_field,
    liouville_system,
    march,
)
from .toda import (
    CBlocks,
    ConstraintError,
    DomainError,
    GridField,
    GridSpec,
    TodaSystem,
    block_residuals,
    build_system,
    connection,
    curvature_residual,
    make_c_blocks,
    residual_full,
)

EXIT_OK = 0
EXIT_VERIFY_FAILED = 1
EXIT_INVALID_INPUT = 2
EXIT_DEGENERATE = 3
EXIT_BLOWUP = 4
EXIT_NO_CONVERGENCE = 5


# ---------------------------------------------------------------------------
# deterministic JSON


def _format_scalar(value) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if value is None:
        return "null"
    if isinstance(value, int):
        return str(value)
    if isinstance(value, float):
        if not math.isfinite(value):
            raise ValueError("non-finite float in output document")
        return f"{value:.17g}"
    if isinstance(value, str):
        return json.dumps(value)
    raise TypeError(f"cannot serialize {type(value)!r}")


def dumps_deterministic(obj, indent: int = 0) -> str:
    """JSON text with sorted keys and fixed float formatting."""
    pad = "  " * indent
    inner = "  " * (indent + 1)
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        parts = [
            f"{inner}{json.dumps(str(key))}: {dumps_deterministic(obj[key], indent + 1)}"
            for key in sorted(obj)
        ]
        return "{\n" + ",\n".join(parts) + f"\n{pad}}}"
    if isinstance(obj, (list, tuple)):
        if not obj:
            return "[]"
        parts = [f"{inner}{dumps_deterministic(item, indent + 1)}" for item in obj]
        return "[\n" + ",\n".join(parts) + f"\n{pad}]"
    return _format_scalar(obj)


def matrix_to_json(arr: np.ndarray):
    """Nested lists with [re, im] leaves."""
    arr = np.asarray(arr, dtype=complex)
    stacked = np.stack([arr.real, arr.imag], axis=-1)
    return stacked.tolist()


def json_to_matrix(data, shape: tuple[int, ...], what: str) -> np.ndarray:
    arr = np.asarray(data, dtype=float)
    if arr.shape != shape + (2,):
        raise ValueError(f"{what}: expected shape {shape} of [re, im] pairs, got {arr.shape[:-1]}")
    return arr[..., 0] + 1j * arr[..., 1]


# ---------------------------------------------------------------------------
# file formats


def system_to_document(system: TodaSystem, c: CBlocks, metadata: dict | None = None) -> dict:
    doc = {
        "kind": "toda-system",
        "series": system.tag.series,
        "rank": system.tag.rank,
        "blocks": list(system.blocks.sizes),
        "c_minus": [matrix_to_json(entry) for entry in c.minus],
        "c_plus": [matrix_to_json(entry) for entry in c.plus],
    }
    if metadata:
        doc["metadata"] = metadata
    return doc


def system_from_document(doc: dict) -> tuple[TodaSystem, CBlocks]:
    if doc.get("kind") != "toda-system":
        raise ValueError("not a toda-system document")
    tag = SeriesTag(doc["series"], int(doc["rank"]))
    system = build_system(tag, [int(k) for k in doc["blocks"]])
    sizes = system.blocks.sizes
    p = system.blocks.count

    def family(key: str, sign: str):
        raw = doc[key]
        if len(raw) not in (p - 1, system.independent_c_count):
            raise ValueError(
                f"{key}: expected {system.independent_c_count} or {p - 1} blocks, got {len(raw)}"
            )
        out = []
        for a, entry in enumerate(raw, start=1):
            shape = (sizes[a], sizes[a - 1]) if sign == "-" else (sizes[a - 1], sizes[a])
            out.append(json_to_matrix(entry, shape, f"{key}[{a - 1}]"))
        return out

    c = make_c_blocks(system, family("c_minus", "-"), family("c_plus", "+"))
    return system, c


def _grid_spec_to_json(spec: GridSpec) -> dict:
    return {
        "z_minus_start": float(spec.z_minus_start),
        "z_plus_start": float(spec.z_plus_start),
        "h_minus": float(spec.h_minus),
        "h_plus": float(spec.h_plus),
        "n_minus": int(spec.n_minus),
        "n_plus": int(spec.n_plus),
    }


def _grid_spec_from_json(doc: dict) -> GridSpec:
    return GridSpec(
        float(doc["z_minus_start"]), float(doc["z_plus_start"]),
        float(doc["h_minus"]), float(doc["h_plus"]),
        int(doc["n_minus"]), int(doc["n_plus"]),
    )


def grid_to_document(system: TodaSystem, field: GridField) -> dict:
    return {
        "kind": "toda-grid",
        "series": system.tag.series,
        "rank": system.tag.rank,
        "blocks": list(system.blocks.sizes),
        "grid": _grid_spec_to_json(field.spec),
        "block_index": list(range(1, system.independent_beta_count + 1)),
        "betas": [matrix_to_json(b) for b in field.betas],
    }


def grid_from_document(doc: dict, system: TodaSystem) -> GridField:
    if doc.get("kind") != "toda-grid":
        raise ValueError("not a toda-grid document")
    if doc["series"] != system.tag.series or int(doc["rank"]) != system.tag.rank:
        raise ValueError("grid file does not match the system file's series/rank")
    if [int(k) for k in doc["blocks"]] != list(system.blocks.sizes):
        raise ValueError("grid file block sizes do not match the system file")
    spec = _grid_spec_from_json(doc["grid"])
    sizes = system.blocks.sizes
    betas = []
    for a, entry in enumerate(doc["betas"]):
        k = sizes[a]
        betas.append(
            json_to_matrix(entry, (spec.n_minus, spec.n_plus, k, k), f"betas[{a}]")
        )
    if len(betas) != system.independent_beta_count:
        raise ValueError(
            f"expected {system.independent_beta_count} independent blocks, got {len(betas)}"
        )
    return GridField(spec, tuple(betas))


def boundary_to_document(system: TodaSystem, data: CharacteristicData) -> dict:
    return {
        "kind": "toda-boundary",
        "series": system.tag.series,
        "rank": system.tag.rank,
        "blocks": list(system.blocks.sizes),
        "grid": _grid_spec_to_json(data.spec),
        "left": [matrix_to_json(line) for line in data.left],
        "bottom": [matrix_to_json(line) for line in data.bottom],
    }


def boundary_from_document(doc: dict, system: TodaSystem) -> CharacteristicData:
    if doc.get("kind") != "toda-boundary":
        raise ValueError("not a toda-boundary document")
    if [int(k) for k in doc["blocks"]] != list(system.blocks.sizes):
        raise ValueError("boundary file block sizes do not match the system file")
    spec = _grid_spec_from_json(doc["grid"])
    sizes = system.blocks.sizes
    left, bottom = [], []
    for a in range(system.independent_beta_count):
        k = sizes[a]
        left.append(json_to_matrix(doc["left"][a], (spec.n_minus, k, k), f"left[{a}]"))
        bottom.append(json_to_matrix(doc["bottom"][a], (spec.n_plus, k, k), f"bottom[{a}]"))
    return CharacteristicData(spec, tuple(left), tuple(bottom))


def _load_json(path: str) -> dict:
    with open(path, "r", encoding="utf-8") as handle:
        return json.load(handle)


def _write_text(path: str, text: str):
    with open(path, "w", encoding="utf-8") as handle:
        handle.write(text + "\n")


# ---------------------------------------------------------------------------
# subcommands


def _parse_csv_ints(text: str, what: str) -> tuple[int, ...]:
    try:
        return tuple(int(part) for part in text.split(","))
    except ValueError as exc:
        raise ValueError(f"{what} must be a comma-separated integer list") from exc


def cmd_grade(args) -> int:
    tag = SeriesTag(args.series, args.rank)
    labels = DynkinLabels(tag, _parse_csv_ints(args.labels, "--labels"))
    op = operator_from_labels(labels)
    blocks = labels_to_block_structure(labels)
    decomp = graded_decomposition(op)
    levi = levi_type(blocks)
    dims = {str(m): decomp.dimension(m) for m in decomp.degrees}
    if args.format == "structured":
        doc = {
            "series": tag.series,
            "rank": tag.rank,
            "labels": list(labels.labels),
            "diagonal": [str(op.matrix[i, i]) for i in range(tag.ambient_dim)],
            "levels": [str(level) for level in op.levels],
            "block_sizes": list(op.blocks.sizes),
            "steps": list(op.blocks.steps),
            "degree_dimensions": dims,
            "levi_type": str(levi),
        }
        print(dumps_deterministic(doc))
        return EXIT_OK
    diag = ", ".join(str(op.matrix[i, i]) for i in range(tag.ambient_dim))
    if args.format == "latex":
        print(rf"q = \mathrm{{diag}}({diag})")
        print(rf"% blocks {op.blocks.sizes}, steps {op.blocks.steps}, G_0 \cong {levi}")
        return EXIT_OK
    print(f"series {tag.series} rank {tag.rank}, labels {labels.labels}")
    print(f"q = diag({diag})")
    print(f"block sizes {op.blocks.sizes}, steps {op.blocks.steps}")
    print("degree dimensions: " + ", ".join(f"{m}: {dims[str(m)]}" for m in decomp.degrees))
    print(f"G0 = {levi}")
    return EXIT_OK


def _system_from_args(args) -> tuple[TodaSystem, CBlocks | None]:
    if getattr(args, "system", None):
        return system_from_document(_load_json(args.system))
    if not (args.series and args.rank and args.blocks):
        raise ValueError("provide --system FILE or all of --series/--rank/--blocks")
    tag = SeriesTag(args.series, args.rank)
    system = build_system(tag, _parse_csv_ints(args.blocks, "--blocks"))
    return system, None


def cmd_equations(args) -> int:
    system, _ = _system_from_args(args)
    rendered = system_equations_text(system, args.format)
    print(rendered)
    return EXIT_OK


def system_equations_text(system: TodaSystem, fmt: str) -> str:
    from .toda import emit_equations

    result = emit_equations(system, fmt)
    if fmt == "structured":
        return dumps_deterministic(result)
    return result


def cmd_verify(args) -> int:
    system, c = system_from_document(_load_json(args.system))
    field = grid_from_document(_load_json(args.grid), system)
    blocks = block_residuals(system, field, c)
    full = residual_full(system, field, c)
    om, op_ = connection(system, field, c)
    curv = curvature_residual(om, op_, field.spec)
    verdict = full.max_norm <= args.tol
    if args.format == "structured":
        doc = {
            "block_residuals": {
                label: {"max": m, "l2": l}
                for label, m, l in zip(blocks.labels, blocks.max_norms, blocks.l2_norms)
            },
            "full_residual": {"max": full.max_norm, "l2": full.l2_norm},
            "curvature": {"max": curv.max_norm, "l2": curv.l2_norm},
            "tolerance": args.tol,
            "verdict": "pass" if verdict else "fail",
        }
        print(dumps_deterministic(doc))
    else:
        print("block residuals (max | l2):")
        for label, m, l in zip(blocks.labels, blocks.max_norms, blocks.l2_norms):
            print(f"  {label}: {m:.6e} | {l:.6e}")
        print(f"full residual max: {full.max_norm:.6e}")
        print(f"curvature max:     {curv.max_norm:.6e}")
        print(f"verdict: {'PASS' if verdict else 'FAIL'} (tol {args.tol:g})")
    return EXIT_OK if verdict else EXIT_VERIFY_FAILED


def cmd_solve(args) -> int:
    system, c = system_from_document(_load_json(args.system))
    data = boundary_from_document(_load_json(args.boundary), system)
    if args.grid is not None and (data.spec.n_minus != args.grid or data.spec.n_plus != args.grid):
        raise ValueError(
            f"--grid {args.grid} does not match the boundary file "
            f"({data.spec.n_minus} x {data.spec.n_plus})"
        )
    result = march(system, c, data)
    _write_text(args.out, dumps_deterministic(grid_to_document(system, result.field)))
    res = result.residual
    print(f"wrote {args.out}")
    print(f"achieved residual max {res.max_norm:.6e} (l2 {res.l2_norm:.6e})")
    print(
        "hint: the scheme is second order; halving the step should shrink "
        "the residual by about a factor of 4"
    )
    return EXIT_OK


def cmd_selftest(args) -> int:
    del args
    checks: list[tuple[str, bool]] = []

    from .exact import rational_matrix, ridentity, rmat_inverse, rmat_mul

    a = rational_matrix([[2, -1], [-1, 2]])
    checks.append(("exact inverse roundtrip", bool(np.all(rmat_mul(a, rmat_inverse(a)) == ridentity(2)))))

    km = cartan_matrix(SeriesTag("B", 2))
    checks.append(("cartan B2 inverse", str(km.inverse[1, 0]) == "1/2"))

    tag = SeriesTag("A", 2)
    op = operator_from_labels(DynkinLabels(tag, (1, 0)))
    checks.append(("grading A2 (1,0)", str(op.matrix[0, 0]) == "2/3"))

    spec_c = GridSpec(0.0, 5.0, 1.0 / 16, 1.0 / 16, 17, 17)
    spec_f = GridSpec(0.0, 5.0, 1.0 / 32, 1.0 / 32, 33, 33)
    coarse = liouville_field(spec_c)
    fine = liouville_field(spec_f)
    rc = residual_full(coarse.system, coarse.field, coarse.c).max_norm
    rf = residual_full(fine.system, fine.field, fine.c).max_norm
    order = math.log2(rc / rf)
    checks.append(("residual order ~ 2", 1.6 < order < 2.4))

    system = liouville_system()
    data = liouville_boundary(spec_c)
    result = march(system, coarse.c, data)
    err = max(
        float(np.max(np.abs(result.field.betas[a] - coarse.field.betas[a]))) for a in range(2)
    )
    checks.append(("march reproduces closed form", err < 1e-3))

    ok = True
    for name, passed in checks:
        print(f"{'PASS' if passed else 'FAIL'}  {name}")
        ok = ok and passed
    return EXIT_OK if ok else EXIT_VERIFY_FAILED


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="todakit",
        description="Block gradations of classical Lie algebras and nonabelian Toda systems",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    grade = sub.add_parser("grade", help="grading operator and block data from labels")
    grade.add_argument("--series", required=True, choices=list("ABCD"))
    grade.add_argument("--rank", required=True, type=int)
    grade.add_argument("--labels", required=True, help="comma-separated nonnegative integers")
    grade.add_argument("--format", default="text", choices=["text", "latex", "structured"])
    grade.set_defaults(handler=cmd_grade)

    eqs = sub.add_parser("equations", help="emit the independent block equations")
    eqs.add_argument("--system", help="toda-system JSON file")
    eqs.add_argument("--series", choices=list("ABCD"))
    eqs.add_argument("--rank", type=int)
    eqs.add_argument("--blocks", help="comma-separated block sizes")
    eqs.add_argument("--format", default="text", choices=["text", "latex", "structured"])
    eqs.set_defaults(handler=cmd_equations)

    verify = sub.add_parser("verify", help="residual and curvature report for a sampled field")
    verify.add_argument("--system", required=True)
    verify.add_argument("--grid", required=True)
    verify.add_argument("--tol", type=float, default=1e-6)
    verify.add_argument("--format", default="text", choices=["text", "structured"])
    verify.set_defaults(handler=cmd_verify)

    solve = sub.add_parser("solve", help="march characteristic boundary data across the grid")
    solve.add_argument("--system", required=True)
    solve.add_argument("--boundary", required=True)
    solve.add_argument("--grid", type=int, help="expected grid size (consistency check)")
    solve.add_argument("--out", required=True)
    solve.set_defaults(handler=cmd_solve)

    selftest = sub.add_parser("selftest", help="run a quick built-in verification battery")
    selftest.set_defaults(handler=cmd_selftest)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.handler(args)
    except (FileNotFoundError, json.JSONDecodeError) as exc:
        print(f"todakit: error[input]: {exc}", file=sys.stderr)
        return EXIT_INVALID_INPUT
    except (ShapeError, ConstraintError, GradationError, DomainError, ValueError) as exc:
        print(f"todakit: error[input]: {exc}", file=sys.stderr)
        return EXIT_INVALID_INPUT
    except SingularMatrixError as exc:
        print(f"todakit: error[degenerate]: {exc}", file=sys.stderr)
        return EXIT_DEGENERATE
    except BlowUpError as exc:
        print(f"todakit: error[blow-up]: {exc} at {exc.location}", file=sys.stderr)
        return EXIT_BLOWUP
    except ConvergenceError as exc:
        print(f"todakit: error[no-convergence]: {exc}", file=sys.stderr)
        return EXIT_NO_CONVERGENCE


if __name__ == "__main__":
    sys.exit(main())
