"""Command line front end.

Subcommands:
    gen      materialize a synthetic layer file from a seeded recipe
    run      simulate one layer on the selected architectures and write
             JSON/CSV reports
    compare  merge run reports into one CSV and append geometric-mean
             speedup rows

Exit codes: 0 success, 2 invalid input (bad parameters, malformed files,
impossible geometry), 3 functional equivalence failure during a run.

A config file is a flat ``key = value`` text file mirroring the long flag
names (dashes or underscores); explicit flags win over config values. The
``SPARSE_ACCEL_SIM_THREADS`` environment variable caps how many
architecture runs execute in parallel.
"""

from __future__ import annotations

import argparse
import concurrent.futures
import csv
import io
import json
import math
import os
import sys
import tempfile

import numpy as np

from .encodings import Format
from .errors import SparseAccelError, ValidationError
from .dispatch import EmptyBrickCost, SyncPolicy
from .sim import (CycleReport, GroupScope, TileConfig, run_arch,
                  weight_product_table)
from .sparsity import IneffCriterion, can_skip
from .tensor import LayerConfig, window_bricks
from .workloads import LayerData, SyntheticSpec, gen_synthetic, load_layer, save_layer

EXIT_OK = 0
EXIT_INVALID = 2
EXIT_MISMATCH = 3

ARCH_CHOICES = ("baseline", "cnv", "cnv2")
REPORT_COLUMNS = CycleReport.CSV_COLUMNS + ("speedup", "verdict")
SCHEMA_VERSION = 1


def _parse_dims(text: str, n: int, what: str) -> tuple[int, ...]:
    parts = text.lower().split("x")
    if len(parts) != n:
        raise ValidationError(f"{what} must be {n} integers joined by 'x', got {text!r}")
    try:
        dims = tuple(int(p) for p in parts)
    except ValueError:
        raise ValidationError(f"{what} must be integers, got {text!r}") from None
    return dims


def _load_config(path: str) -> dict[str, str]:
    values: dict[str, str] = {}
    try:
        with open(path) as fh:
            for ln, line in enumerate(fh, 1):
                line = line.split("#", 1)[0].strip()
                if not line:
                    continue
                if "=" not in line:
                    raise ValidationError(f"{path}:{ln}: expected key = value")
                key, val = line.split("=", 1)
                values[key.strip().replace("-", "_")] = val.strip()
    except OSError as exc:
        raise ValidationError(f"cannot read config {path}: {exc}") from None
    return values


def _apply_config(parser: argparse.ArgumentParser, args: argparse.Namespace,
                  argv: list[str]) -> argparse.Namespace:
    """Re-parse with config values as the namespace seed; flags still win."""
    if not getattr(args, "config", None):
        return args
    config = _load_config(args.config)
    known = {a.dest for a in parser._actions}
    unknown = set(config) - known
    if unknown:
        raise ValidationError(f"unknown config keys: {', '.join(sorted(unknown))}")
    ns = argparse.Namespace(**config)
    reparsed = parser.parse_args(argv, namespace=ns)
    # config values arrive as strings; run them through the flag converters
    for action in parser._actions:
        if action.dest not in config:
            continue
        if getattr(reparsed, action.dest) is not config[action.dest]:
            continue  # a flag overrode the seeded value
        raw = config[action.dest]
        if action.type is not None:
            try:
                setattr(reparsed, action.dest, action.type(raw))
            except (TypeError, ValueError):
                raise ValidationError(
                    f"config {action.dest} = {raw!r} is not a valid value") from None
        elif action.choices and raw not in action.choices:
            raise ValidationError(
                f"config {action.dest} = {raw!r} not one of {sorted(action.choices)}")
    return reparsed


def _atomic_write(path: str, text: str) -> None:
    """Write via a temp file in the same directory, then rename into place."""
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".tmp-report-")
    try:
        with os.fdopen(fd, "w") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _add_synth_flags(p: argparse.ArgumentParser, require: bool) -> None:
    p.add_argument("--dims", type=str, required=require,
                   help="input extent as XxYxI, e.g. 8x8x32")
    p.add_argument("--filters", type=str, required=require,
                   help="filter bank as FxFXxFY, e.g. 4x3x3")
    p.add_argument("--stride", type=int, default=1)
    p.add_argument("--brick", type=int, default=16, help="brick size B")
    p.add_argument("--pa", type=float, default=0.0, help="activation zero probability")
    p.add_argument("--pw", type=float, default=0.0, help="weight zero probability")
    p.add_argument("--vmin", type=int, default=-128)
    p.add_argument("--vmax", type=int, default=127)
    p.add_argument("--seed", type=int, default=0)


def _spec_from_args(args) -> SyntheticSpec:
    if not args.dims or not args.filters:
        raise ValidationError("a synthetic layer needs both --dims and --filters")
    x, y, i = _parse_dims(args.dims, 3, "--dims")
    f, fx, fy = _parse_dims(args.filters, 3, "--filters")
    return SyntheticSpec(x=x, y=y, i=i, f=f, fx=fx, fy=fy, stride=args.stride,
                         p_act_zero=args.pa, p_wt_zero=args.pw,
                         vmin=args.vmin, vmax=args.vmax,
                         seed=args.seed, brick=args.brick)


def cmd_gen(args) -> int:
    spec = _spec_from_args(args)
    acts, filters = gen_synthetic(spec)
    data = LayerData(acts, filters, spec.stride, spec.brick)
    data.layer_config()  # fail early on untileable geometry
    save_layer(args.out, data)
    a = acts.values[:, :, :acts.logical_i]
    w = filters.values[:, :, :, :filters.logical_i]
    print(f"wrote {args.out}")
    print(f"activations: {a.size} values, {int((a == 0).sum())} zero "
          f"({100.0 * (a == 0).mean():.1f}%)")
    print(f"weights: {w.size} values, {int((w == 0).sum())} zero "
          f"({100.0 * (w == 0).mean():.1f}%)")
    return EXIT_OK


def reference_output(arch: str, data: LayerData, layer: LayerConfig,
                     tile: TileConfig, act_crit: IneffCriterion,
                     weight_crit: IneffCriterion) -> np.ndarray:
    """Window-by-window recomputation used as the equivalence check.

    Walks bricks with the mask algebra directly instead of the vectorized
    model, so a run's output is compared against an independent path.
    """
    a = data.acts.values.astype(np.int64)
    w = data.filters.values.astype(np.int64)
    b = tile.brick
    out = np.zeros((layer.ox, layer.oy, layer.f), dtype=np.int64)
    if arch == "baseline":
        groups = [(0, layer.f)]
    elif arch == "cnv":
        groups = [(0, layer.f)]
    else:
        groups = []
        for lo in range(0, layer.f, tile.resident):
            hi = min(lo + tile.resident, layer.f)
            if tile.group_scope is GroupScope.PER_TILE:
                groups.extend((g, min(g + tile.filters_per_tile, hi))
                              for g in range(lo, hi, tile.filters_per_tile))
            else:
                groups.append((lo, hi))
    prods = {}
    if arch == "cnv2":
        for glo, ghi in groups:
            prods[(glo, ghi)] = weight_product_table(data.filters, weight_crit, b, glo, ghi)
    for wx in range(layer.ox):
        for wy in range(layer.oy):
            for (x, y, ib) in window_bricks(layer, wx, wy, b):
                sl = slice(ib * b, (ib + 1) * b)
                vals = a[x, y, sl]
                fx = x - wx * layer.stride
                fy = y - wy * layer.stride
                if arch == "baseline":
                    out[wx, wy, :] += w[:, fx, fy, sl] @ vals
                    continue
                mask = act_crit.effectual(vals)
                if arch == "cnv":
                    out[wx, wy, :] += w[:, fx, fy, sl] @ np.where(mask, vals, 0)
                    continue
                for (glo, ghi) in groups:
                    skip = can_skip(mask, prods[(glo, ghi)][fx, fy, ib])
                    kept = np.where(skip, 0, vals)
                    out[wx, wy, glo:ghi] += w[glo:ghi, fx, fy, sl] @ kept
    return out


def _run_one(arch: str, data: LayerData, layer: LayerConfig, tile: TileConfig,
             act_crit: IneffCriterion, weight_crit: IneffCriterion,
             out_format: Format) -> tuple[str, CycleReport, bool]:
    out, report = run_arch(arch, data.acts, data.filters, layer, tile,
                           act_crit, weight_crit, out_format=out_format)
    expected = reference_output(arch, data, layer, tile, act_crit, weight_crit)
    return arch, report, bool(np.array_equal(out, expected))


def _worker_count(n_jobs: int) -> int:
    env = os.environ.get("SPARSE_ACCEL_SIM_THREADS")
    if env is not None:
        try:
            cap = int(env)
        except ValueError:
            raise ValidationError(
                f"SPARSE_ACCEL_SIM_THREADS must be an int, got {env!r}") from None
        if cap < 1:
            raise ValidationError("SPARSE_ACCEL_SIM_THREADS must be at least 1")
        return min(cap, n_jobs)
    return min(n_jobs, os.cpu_count() or 1)


def cmd_run(args) -> int:
    if args.layer:
        data = load_layer(args.layer)
        source = args.layer
    else:
        spec = _spec_from_args(args)
        acts, filters = gen_synthetic(spec)
        data = LayerData(acts, filters, spec.stride, spec.brick)
        source = f"synthetic(seed={spec.seed})"
    layer = data.layer_config()

    archs = [a.strip() for a in args.arch.split(",") if a.strip()]
    if not archs or any(a not in ARCH_CHOICES for a in archs):
        raise ValidationError(f"--arch must name architectures from {ARCH_CHOICES}")
    tile = TileConfig(tiles=args.tiles, filters_per_tile=args.filters_per_tile,
                      lanes=args.lanes, brick=data.brick,
                      sync=SyncPolicy(args.sync),
                      empty_brick=EmptyBrickCost(args.empty_brick),
                      group_scope=GroupScope(args.group_scope))
    act_crit = IneffCriterion.parse(args.act_crit)
    weight_crit = IneffCriterion.parse(args.wt_crit)
    out_format = Format(args.encoding)

    results: dict[str, tuple[CycleReport, bool]] = {}
    with concurrent.futures.ThreadPoolExecutor(_worker_count(len(archs))) as pool:
        futs = [pool.submit(_run_one, a, data, layer, tile, act_crit,
                            weight_crit, out_format) for a in archs]
        for fut in futs:
            arch, report, ok = fut.result()
            results[arch] = (report, ok)

    base_cycles = results["baseline"][0].cycles if "baseline" in results else None
    rows = []
    for arch in archs:
        report, ok = results[arch]
        row = report.to_record()
        if base_cycles is None:
            row["speedup"] = None
        elif report.cycles == 0:
            row["speedup"] = math.inf
        else:
            row["speedup"] = base_cycles / report.cycles
        row["verdict"] = "PASS" if ok else "FAIL"
        rows.append(row)

    doc = {
        "schema_version": SCHEMA_VERSION,
        "source": source,
        "layer": {"x": layer.x, "y": layer.y, "i": layer.i,
                  "logical_i": data.acts.logical_i, "f": layer.f,
                  "fx": layer.fx, "fy": layer.fy, "stride": layer.stride,
                  "brick": data.brick},
        "tile": {"tiles": tile.tiles, "filters_per_tile": tile.filters_per_tile,
                 "lanes": tile.lanes, "brick": tile.brick,
                 "nbin_depth": tile.nbin_depth, "sync": tile.sync.value,
                 "empty_brick": tile.empty_brick.value,
                 "group_scope": tile.group_scope.value},
        "criteria": {"activation": act_crit.spec(), "weight": weight_crit.spec()},
        "encoding": out_format.value,
        "rows": rows,
    }
    if args.json_out:
        _atomic_write(args.json_out, _report_json(doc))
    if args.csv_out:
        _atomic_write(args.csv_out, _report_csv(rows))

    _print_table(rows)
    if any(r["verdict"] != "PASS" for r in rows):
        print("functional equivalence FAILED", file=sys.stderr)
        return EXIT_MISMATCH
    return EXIT_OK


def _json_safe(row: dict) -> dict:
    out = dict(row)
    if isinstance(out.get("speedup"), float) and math.isinf(out["speedup"]):
        out["speedup"] = None
    return out


def _report_json(doc: dict) -> str:
    doc = dict(doc, rows=[_json_safe(r) for r in doc["rows"]])
    return json.dumps(doc, indent=1) + "\n"


def _format_cell(key: str, value) -> str:
    if value is None:
        return ""
    if key == "utilization":
        return f"{value:.6f}"
    if key == "speedup":
        return "inf" if isinstance(value, float) and math.isinf(value) else f"{value:.6f}"
    return str(value)


def _report_csv(rows: list[dict], columns=REPORT_COLUMNS, extra: list[dict] | None = None) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf)
    writer.writerow(columns)
    for row in rows + (extra or []):
        writer.writerow([_format_cell(c, row.get(c)) for c in columns])
    return buf.getvalue()


def _print_table(rows: list[dict], columns=REPORT_COLUMNS) -> None:
    cells = [[_format_cell(c, r.get(c)) or "-" for c in columns] for r in rows]
    widths = [max(len(c), *(len(row[j]) for row in cells)) if cells else len(c)
              for j, c in enumerate(columns)]
    print("  ".join(c.ljust(widths[j]) for j, c in enumerate(columns)))
    for row in cells:
        print("  ".join(row[j].ljust(widths[j]) for j in range(len(columns))))


def cmd_compare(args) -> int:
    merged: list[dict] = []
    speedups: dict[str, list[float]] = {}
    for path in args.reports:
        try:
            with open(path) as fh:
                doc = json.load(fh)
            rows = doc["rows"]
        except (OSError, json.JSONDecodeError, KeyError, TypeError) as exc:
            raise ValidationError(f"cannot read report {path}: {exc}") from None
        for row in rows:
            entry = {"source": path}
            entry.update(row)
            merged.append(entry)
            sp = row.get("speedup")
            if row.get("arch") != "baseline" and isinstance(sp, (int, float)) and sp > 0:
                speedups.setdefault(row["arch"], []).append(float(sp))

    geo_rows = []
    for arch in sorted(speedups):
        vals = speedups[arch]
        geo = math.exp(sum(math.log(v) for v in vals) / len(vals))
        geo_rows.append({"source": "geomean", "arch": arch, "speedup": geo})

    columns = ("source",) + REPORT_COLUMNS
    text = _report_csv(merged, columns=columns, extra=geo_rows)
    if args.out:
        _atomic_write(args.out, text)
        print(f"wrote {args.out}")
    else:
        print(text, end="")
    for row in geo_rows:
        print(f"geomean speedup {row['arch']}: {row['speedup']:.6f}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="sparse-accel-sim",
        description="Simulate sparse-skipping DNN accelerator layers.")
    sub = parser.add_subparsers(dest="command", required=True)

    p_gen = sub.add_parser("gen", help="generate a synthetic layer file")
    _add_synth_flags(p_gen, require=False)
    p_gen.add_argument("-o", "--out", required=True, help="output .layer or .json path")
    p_gen.add_argument("--config", help="flat key=value defaults file")
    p_gen.set_defaults(func=cmd_gen)

    p_run = sub.add_parser("run", help="simulate one layer")
    p_run.add_argument("--layer", help="layer file to load (.layer or .json)")
    _add_synth_flags(p_run, require=False)
    p_run.add_argument("--arch", default="baseline,cnv,cnv2",
                       help="comma list from baseline,cnv,cnv2")
    p_run.add_argument("--tiles", type=int, default=16)
    p_run.add_argument("--filters-per-tile", type=int, default=16)
    p_run.add_argument("--lanes", type=int, default=16)
    p_run.add_argument("--sync", choices=[p.value for p in SyncPolicy],
                       default=SyncPolicy.BRICKSET_LOCKSTEP.value)
    p_run.add_argument("--empty-brick", choices=[c.value for c in EmptyBrickCost],
                       default=EmptyBrickCost.ZERO_CYCLES.value)
    p_run.add_argument("--group-scope", choices=[g.value for g in GroupScope],
                       default=GroupScope.PASS_WIDE.value)
    p_run.add_argument("--act-crit", default="zero", help="zero | abs:T | pow2:K")
    p_run.add_argument("--wt-crit", default="zero", help="zero | abs:T | pow2:K")
    p_run.add_argument("--encoding", choices=[f.value for f in Format],
                       default=Format.ZFNAF.value,
                       help="output footprint encoding")
    p_run.add_argument("--json-out", help="write the JSON report here")
    p_run.add_argument("--csv-out", help="write the CSV report here")
    p_run.add_argument("--config", help="flat key=value defaults file")
    p_run.set_defaults(func=cmd_run)

    p_cmp = sub.add_parser("compare", help="merge run reports")
    p_cmp.add_argument("reports", nargs="+", help="JSON reports from `run`")
    p_cmp.add_argument("-o", "--out", help="merged CSV path (default: stdout)")
    p_cmp.set_defaults(func=cmd_compare)
    return parser


def main(argv=None) -> int:
    argv = sys.argv[1:] if argv is None else list(argv)
    parser = build_parser()
    args = parser.parse_args(argv)
    command = args.command
    try:
        if getattr(args, "config", None):
            subs = next(a for a in parser._actions
                        if isinstance(a, argparse._SubParsersAction))
            args = _apply_config(subs.choices[command], args, argv[1:])
            args.command = command
        return args.func(args)
    except SparseAccelError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID


if __name__ == "__main__":
    raise SystemExit(main())
