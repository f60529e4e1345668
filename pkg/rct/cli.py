from __future__ import annotations

import argparse
import logging
import re
import sys
import time
from collections.abc import Sequence
from datetime import datetime, timezone
from fractions import Fraction
from pathlib import Path
from typing import Any

from .analyse import (
    METHODS,
    OBJECTIVES,
    analyse_region,
    feasibility_region,
    load_workspace,
    optimize_region,
    resolve_assignment,
    sweep_library,
    validate_workspace,
)
from .delay import arrival_times
from .errors import EXIT_CLEAN, EXIT_VIOLATION, RctError
from .optimize import STRATEGIES
from .region import WindowSpec, read_block_library
from .render import build_chart, render_svg, save_svg, to_dot
from .report import bullet_lines, document, dump_json, node_table, write_sidecar, write_text
from .settings import Settings, load_settings
from .units import render_ps

logger = logging.getLogger(__name__)

_WINDOW = re.compile(r"^(\d+)x(\d+)(?:@(\d+)x(\d+))?$")


def _window_type(value: str) -> WindowSpec:
    match = _WINDOW.match(value.strip())
    if match is None:
        raise argparse.ArgumentTypeError("window must look like COLSxROWS or COLSxROWS@SCOLSxSROWS")
    cols, rows, stride_cols, stride_rows = (int(g) if g else 1 for g in match.groups())
    if min(cols, rows, stride_cols, stride_rows) < 1:
        raise argparse.ArgumentTypeError("window sizes and strides must be positive")
    return WindowSpec(cols, rows, stride_cols, stride_rows)


def _positive_int(value: str) -> int:
    number = int(value)
    if number < 1:
        raise argparse.ArgumentTypeError("must be a positive integer")
    return number


def _tap_counts(value: str) -> list[int]:
    try:
        counts = [int(part) for part in value.split(",")]
    except ValueError as exc:
        raise argparse.ArgumentTypeError("tap counts must be a comma list of integers") from exc
    if any(count < 1 for count in counts):
        raise argparse.ArgumentTypeError("tap counts must be positive")
    return counts


def _ps(fs: int) -> str:
    return render_ps(fs)


def _rational_ps(doc: dict[str, Any] | None) -> str:
    if doc is None:
        return "n/a"
    return render_ps(Fraction(doc["num_fs"], doc["den"]))


def _analysis_text(doc: dict[str, Any]) -> str:
    region = doc["region"]
    lines = bullet_lines(
        f"Analysis of {region['cols']}x{region['rows']} region ({region['n']} nodes), "
        f"assignment {doc['assignment']['source']}:",
        [
            f"entry {region['entry_corner']}, orientation {region['orientation']}, "
            f"corner of record {region['corner_of_record']}",
            "branch lengths " + ", ".join(map(str, region["branch_lengths"])),
        ]
        + (
            [f"window pairs {doc['window']['pairs']}, N' {doc['window']['n_prime']}"]
            if doc["window"]
            else []
        ),
    )
    for corner, section in doc["corners"].items():
        rows = [
            {
                "node": n["node"],
                "col": n["col"],
                "row": n["row"],
                "class": n["row_class"],
                "T_nat": _ps(n["t_nat_fs"]),
                "tap": n["tap"],
                "T_LCT": _ps(n["t_lct_fs"]),
                "ideal ok": "yes" if n["ideal_in_range"] else "no",
            }
            for n in section["nodes"]
        ]
        lines.append("")
        lines.append(f"[{corner}]")
        lines.append(node_table(rows, ["node", "col", "row", "class", "T_nat", "tap", "T_LCT", "ideal ok"]))
        cost = section["cost"]
        feasibility = section["feasibility"]
        electrical = section["electrical"]
        items = [
            f"L_abs_mean {_rational_ps(cost['l_abs_mean'])}",
            f"G_abs_mean {_rational_ps(cost['g_abs_mean'])}",
        ]
        if cost["windowed_mean"] is not None:
            items.append(f"windowed mean {_rational_ps(cost['windowed_mean'])}")
        items.append(f"skew {_ps(cost['skew_fs'])}")
        verdict = "feasible" if feasibility["feasible"] else "INFEASIBLE"
        items.append(
            f"{verdict}: max T_nat {_ps(feasibility['max_t_nat_fs'])} against tap range "
            f"{_ps(feasibility['tap_range_fs'])} (margin {_ps(feasibility['margin_fs'])})"
        )
        if feasibility["offending_nodes"]:
            items.append("ideal tap out of range at node(s) " + ", ".join(map(str, feasibility["offending_nodes"])))
        items.append(
            f"capacitance RCT {electrical['total_rct_capacitance_ff']} fF, LCT "
            f"{electrical['total_lct_capacitance_ff']} fF, RCT share {electrical['rct_fraction']:.2%}"
        )
        items.append(
            f"worst slew {_ps(electrical['worst_slew_fs'])} against rule {_ps(electrical['max_slew_rule_fs'])}: "
            + ("ok" if electrical["slew_rule_ok"] else "VIOLATED")
        )
        lines.extend(f"- {item}" for item in items)
    cross = doc["cross_corner"]
    lines.append("")
    lines.extend(
        bullet_lines(
            "Cross-corner:",
            [f"skew {corner} {_ps(skew)}" for corner, skew in cross["skew_fs"].items()]
            + [f"largest node spread {_ps(cross['worst_spread_fs'])} at node {cross['worst_node']}"],
        )
    )
    return "\n".join(lines) + "\n"


def _optimize_text(assignment: dict[str, Any], cost: dict[str, Any], oracle: dict[str, Any] | None) -> str:
    items = [
        f"assignment {','.join(map(str, assignment['assignment']))}",
        f"objective {cost['objective']} = {_rational_ps(cost['objective_cost'])} at {cost['corner']}",
    ]
    search = cost["search"]
    if search is not None:
        items.append(
            f"strategy {search['strategy']}, examined {search['examined']}, "
            f"pruned space {search['pruned_space']} of {search['full_space']}"
        )
    for label in ("local", "result"):
        entry = cost["local_vs_result"][label]
        costs = ", ".join(
            f"{name} {_rational_ps(entry[name])}" for name in ("L", "G", "windowed") if name in entry
        )
        items.append(f"{label}: {costs}")
    for corner, report in cost["corners"].items():
        items.append(f"{corner} skew {_ps(report['skew_fs'])}")
    if oracle is not None:
        items.append(
            f"oracle: full {_rational_ps(oracle['full']['cost'])}, pruned {_rational_ps(oracle['pruned']['cost'])}, "
            f"local {_rational_ps(oracle['local']['cost'])}"
        )
    return "\n".join(bullet_lines(f"Optimised with method {cost['method']}:", items)) + "\n"


def cmd_validate(args: argparse.Namespace) -> int:
    workspace = load_workspace(args.library, args.floorplan, args.settings)
    errors = validate_workspace(workspace)
    if args.format == "json":
        write_text(dump_json(document("validation", {"ok": not errors, "violations": errors})), args.out)
    elif errors:
        write_text("\n".join(bullet_lines(f"Validate failed for {args.floorplan}:", errors)) + "\n", args.out)
    else:
        write_text(f"Validate passed for {args.floorplan} ({workspace.region.n} nodes).\n", args.out)
    return EXIT_VIOLATION if errors else EXIT_CLEAN


def cmd_analyze(args: argparse.Namespace) -> int:
    workspace = load_workspace(args.library, args.floorplan, args.settings)
    doc = analyse_region(workspace, args.assignment, args.corner, args.window)
    write_text(dump_json(doc) if args.format == "json" else _analysis_text(doc), args.out)
    return EXIT_CLEAN


def cmd_optimize(args: argparse.Namespace) -> int:
    workspace = load_workspace(args.library, args.floorplan, args.settings)
    outcome = optimize_region(
        workspace,
        method=args.method,
        objective=args.objective,
        window_override=args.window,
        oracle_limit=args.oracle_limit,
        strategy=args.strategy,
        corner=args.corner,
    )
    if args.out is None:
        if args.format == "json":
            combined = {"assignment": outcome.assignment, "cost": outcome.cost, "oracle": outcome.oracle}
            write_text(dump_json(combined), None)
        else:
            write_text(_optimize_text(outcome.assignment, outcome.cost, outcome.oracle), None)
        return EXIT_CLEAN
    write_text(dump_json(outcome.assignment), args.out / "assignment.json")
    write_text(dump_json(outcome.cost), args.out / "cost.json")
    if outcome.oracle is not None:
        write_text(dump_json(outcome.oracle), args.out / "oracle.json")
    return EXIT_CLEAN


def cmd_render(args: argparse.Namespace) -> int:
    workspace = load_workspace(args.library, args.floorplan, args.settings)
    if args.format == "dot":
        write_text(to_dot(workspace.region, workspace.topology, args.corner), args.out)
        return EXIT_CLEAN
    _, assignment = resolve_assignment(workspace, args.assignment)
    corner = workspace.check_corner(args.corner)
    arrivals = arrival_times(workspace.profile(corner), workspace.region.tap_line, assignment, corner)
    chart = build_chart(workspace.region, workspace.topology, assignment, arrivals)
    if args.out is None:
        write_text(render_svg(chart), None)
    else:
        save_svg(chart, args.out)
    return EXIT_CLEAN


def cmd_sweep_size(args: argparse.Namespace) -> int:
    library = read_block_library(args.library)
    corner = args.corner or library.corners[0]
    doc = sweep_library(library, args.type, args.rows, corner, args.taps)
    if args.format == "json":
        write_text(dump_json(doc), args.out)
        return EXIT_CLEAN
    rows = [
        {"taps": e["taps"], "tap range": _rational_ps(e["tap_range"]), "max columns": e["max_columns"]}
        for e in doc["by_tap_count"]
    ]
    lines = bullet_lines(
        f"Size sweep for {doc['type']} ({doc['rows']} rows, {corner}):",
        [f"tap range {_ps(doc['tap_range_fs'])}", f"max columns {doc['max_columns']}"],
    )
    lines.append(node_table(rows, ["taps", "tap range", "max columns"]))
    write_text("\n".join(lines) + "\n", args.out)
    return EXIT_CLEAN


def cmd_feasibility(args: argparse.Namespace) -> int:
    workspace = load_workspace(args.library, args.floorplan, args.settings)
    feasible, doc = feasibility_region(workspace, args.corner)
    if args.format == "json":
        write_text(dump_json(doc), args.out)
    else:
        items = [
            f"max T_nat {_ps(doc['max_t_nat_fs'])}",
            f"tap range {_ps(doc['tap_range_fs'])}",
            f"margin {_ps(doc['margin_fs'])}",
        ]
        if doc["offending_nodes"]:
            items.append("offending node(s) " + ", ".join(map(str, doc["offending_nodes"])))
        verdict = "feasible" if feasible else "infeasible"
        write_text("\n".join(bullet_lines(f"Region is {verdict} at {doc['corner']}:", items)) + "\n", args.out)
    return EXIT_CLEAN if feasible else EXIT_VIOLATION


def _add_inputs(parser: argparse.ArgumentParser, floorplan: bool = True) -> None:
    parser.add_argument("--library", required=True, type=Path, help="Block library JSON document.")
    if floorplan:
        parser.add_argument("--floorplan", required=True, type=Path, help="Floorplan JSON document.")
    parser.add_argument("--corner", help="Characterisation corner (default: the floorplan's corner of record).")
    parser.add_argument("--out", type=Path, help="Write the primary output here instead of stdout.")
    parser.add_argument("-v", "--verbose", action="store_true", help="Log progress at INFO level.")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="silago-rct",
        description="Regional clock tree modelling and delay-line tap optimisation for SiLago regions.",
    )
    subparsers = parser.add_subparsers(dest="command", required=True)

    validate_parser = subparsers.add_parser(
        "validate",
        help="Check the library, floorplan and routed clock tree against every model rule.",
    )
    _add_inputs(validate_parser)
    validate_parser.add_argument("--format", choices=["text", "json"], default="text")
    validate_parser.set_defaults(handler=cmd_validate)

    analyze_parser = subparsers.add_parser(
        "analyze",
        help="Report natural delays, arrivals, costs, feasibility and electrical totals per corner.",
    )
    _add_inputs(analyze_parser)
    analyze_parser.add_argument(
        "--assignment",
        default="local",
        help="local (default), ones, a comma list of tap indices, or an assignment JSON file.",
    )
    analyze_parser.add_argument("--window", type=_window_type, help="COLSxROWS[@SCOLSxSROWS] window.")
    analyze_parser.add_argument("--format", choices=["text", "json"], default="text")
    analyze_parser.set_defaults(handler=cmd_analyze)

    optimize_parser = subparsers.add_parser(
        "optimize",
        help="Select delay-line taps; --out names a directory for assignment/cost/oracle documents.",
    )
    _add_inputs(optimize_parser)
    optimize_parser.add_argument("--method", choices=METHODS, default="global")
    optimize_parser.add_argument(
        "--objective",
        choices=OBJECTIVES,
        help="Cost to minimise (default: windowed when a window is configured, otherwise G).",
    )
    optimize_parser.add_argument("--window", type=_window_type, help="COLSxROWS[@SCOLSxSROWS] window.")
    optimize_parser.add_argument(
        "--oracle-limit",
        type=_positive_int,
        help="Largest configuration count the oracle may enumerate (required for --method oracle).",
    )
    optimize_parser.add_argument("--strategy", choices=STRATEGIES, default="auto")
    optimize_parser.add_argument("--format", choices=["text", "json"], default="text")
    optimize_parser.set_defaults(handler=cmd_optimize)

    render_parser = subparsers.add_parser("render", help="Emit the clock tree as DOT or as an SVG diagram.")
    _add_inputs(render_parser)
    render_parser.add_argument("--format", choices=["dot", "svg"], default="dot")
    render_parser.add_argument("--assignment", default="local", help="Tap assignment annotated on the SVG.")
    render_parser.set_defaults(handler=cmd_render)

    sweep_parser = subparsers.add_parser(
        "sweep-size",
        help="Largest feasible column count for a homogeneous region of one block type.",
    )
    _add_inputs(sweep_parser, floorplan=False)
    sweep_parser.add_argument("--type", help="Block type id (default: the library's first type).")
    sweep_parser.add_argument("--rows", required=True, type=_positive_int)
    sweep_parser.add_argument("--taps", type=_tap_counts, help="Comma list of delay-line lengths to compare.")
    sweep_parser.add_argument("--format", choices=["text", "json"], default="text")
    sweep_parser.set_defaults(handler=cmd_sweep_size)

    feasibility_parser = subparsers.add_parser(
        "feasibility",
        help="Check that the delay line can compensate the region's natural delay spread.",
    )
    _add_inputs(feasibility_parser)
    feasibility_parser.add_argument("--format", choices=["text", "json"], default="text")
    feasibility_parser.set_defaults(handler=cmd_feasibility)

    return parser


def _configure_logging(settings: Settings, verbose: bool) -> None:
    logging.basicConfig(
        level=logging.INFO if verbose else getattr(logging, settings.log_level),
        stream=sys.stderr,
        format="%(levelname)s %(name)s: %(message)s",
        force=True,
    )


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    started = datetime.now(timezone.utc)
    clock = time.perf_counter()
    try:
        args.settings = load_settings()
        _configure_logging(args.settings, args.verbose)
        code = args.handler(args)
    except RctError as exc:
        for line in exc.lines():
            print(line, file=sys.stderr)
        return exc.exit_code
    if args.out is not None:
        write_sidecar(args.out, list(sys.argv[1:] if argv is None else argv), started, time.perf_counter() - clock)
    return code


if __name__ == "__main__":
    raise SystemExit(main())
