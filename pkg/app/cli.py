# app/cli.py
# Command-line front end: one subcommand per operation, report emission and exit codes.

import argparse
import logging
import sys
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence

from app.core.config import settings
from app.core.errors import BudgetExhausted, ConfigError, HypothesisError, OnesidedError, PrecisionError
from app.models.data_models import CosineConfig, SpectrumConfig
from app.models.report_models import RunManifest, TheoremId, Verdict, VerificationRecord
from app.services import bounds_service, extremum_service, spectrum_service, structure_service
from app.services.config_service import config_to_dict, load_config
from app.utils.logging_config import setup_logging
from app.utils.serialization import csv_text, dumps, format_float, record_rows, to_jsonable

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_FAIL = 1
EXIT_INVALID = 2
EXIT_INCONCLUSIVE = 3
EXIT_HYPOTHESIS = 4

VERDICT_EXIT = {
    Verdict.PASS: EXIT_OK,
    Verdict.FAIL: EXIT_FAIL,
    Verdict.INCONCLUSIVE: EXIT_INCONCLUSIVE,
    Verdict.HYPOTHESIS_FAIL: EXIT_HYPOTHESIS,
}

MANIFEST_PREFIX = "# manifest: "

RECORD_COLUMNS = ["theorem_id", "bound", "min_found", "k_best", "budget", "verdict", "margin", "exhaustive"]


class Output:
    """
    Single writer for command results in the requested format. Every format carries
    the run manifest: a JSON field, a leading '#' comment line in CSV, a leading
    block in text.
    """

    def __init__(self, manifest: RunManifest, stream=None):
        self.manifest = manifest
        self.stream = stream or sys.stdout

    def emit(self, result: Any, header: Optional[List[str]] = None, rows: Optional[List[List[Any]]] = None) -> None:
        fmt = self.manifest.output_format
        if fmt == "json":
            text = dumps({"manifest": self.manifest, "result": result})
        elif fmt == "csv" and header is not None:
            text = f"{MANIFEST_PREFIX}{dumps(self.manifest)}\n" + csv_text(header, rows or [])
        else:
            text = (_render_text({"manifest": to_jsonable(self.manifest)}) + "\n"
                    + _render_text(to_jsonable(result)))
        self.stream.write(text if text.endswith("\n") else text + "\n")


def _render_text(value: Any, indent: int = 0) -> str:
    pad = "  " * indent
    if isinstance(value, dict):
        lines = []
        for key in sorted(value):
            item = value[key]
            if isinstance(item, (dict, list)) and item:
                lines.append(f"{pad}{key}:")
                lines.append(_render_text(item, indent + 1))
            else:
                lines.append(f"{pad}{key}: {_scalar(item)}")
        return "\n".join(lines)
    if isinstance(value, list):
        return "\n".join(
            _render_text(item, indent) if isinstance(item, dict) else f"{pad}- {_scalar(item)}" for item in value
        )
    return f"{pad}{_scalar(value)}"


def _scalar(value: Any) -> str:
    if isinstance(value, float):
        return format_float(value)
    if isinstance(value, list):
        return "[" + ", ".join(_scalar(v) for v in value) + "]"
    return "" if value is None else str(value)


def _require_config(args: argparse.Namespace):
    if not args.config:
        raise ConfigError("This command needs --config.", field="--config")
    return load_config(args.config)


def _require_cosine(cfg) -> CosineConfig:
    if not isinstance(cfg, CosineConfig):
        raise ConfigError("This command needs a cosine config.", field="cosine")
    return cfg


def _as_spectrum(cfg) -> SpectrumConfig:
    return spectrum_service.to_spectrum(cfg) if isinstance(cfg, CosineConfig) else cfg


# --- Commands ---

def cmd_eval(args: argparse.Namespace, out: Output) -> int:
    cfg = _require_config(args)
    rows = []
    for k in range(args.k_start, args.k_end + 1):
        if isinstance(cfg, CosineConfig):
            rows.append([k, spectrum_service.eval_cosine_sum(cfg, k)])
        else:
            rows.append([k, spectrum_service.eval_power_sum(cfg, k)])
    out.emit([{"k": k, "value": v} for k, v in rows], header=["k", "value"], rows=rows)
    return EXIT_OK


def cmd_bounds(args: argparse.Namespace, out: Output) -> int:
    cfg = _require_config(args)
    reports = bounds_service.applicable_bounds(cfg)
    rows = [[r.theorem_id, r.value, r.strict, r.applicable, r.covered] for r in reports]
    out.emit(reports, header=["theorem_id", "value", "strict", "applicable", "covered"], rows=rows)
    return EXIT_OK


def cmd_verify(args: argparse.Namespace, out: Output) -> int:
    cfg = _require_config(args)
    record = extremum_service.verify_theorem(cfg, args.theorem, budget=args.budget, restrict=args.restrict)
    out.emit(record, header=RECORD_COLUMNS, rows=record_rows([record], RECORD_COLUMNS))
    return VERDICT_EXIT[record.verdict]


def cmd_degeneracy(args: argparse.Namespace, out: Output) -> int:
    cfg = _as_spectrum(_require_config(args))
    verdict = structure_service.detect_degeneracy(cfg, allow_minus_one=args.allow_minus_one)
    witness = verdict.witness
    out.emit(verdict, header=["verdict", "i", "j", "order"],
             rows=[[verdict.verdict, witness and witness.i, witness and witness.j, witness and witness.order]])
    return EXIT_OK


def cmd_decompose(args: argparse.Namespace, out: Output) -> int:
    cfg = _as_spectrum(_require_config(args))
    g = structure_service.group_decompose(cfg)
    result: Dict[str, Any] = {"decomposition": g, "projection": None}
    try:
        result["projection"] = structure_service.choose_projection(g)
    except HypothesisError as e:
        logger.info(f"No projection: {e}")
    rows = [[j + 1, g.torsion_exponents[j], " ".join(str(a) for a in g.exponent_matrix[j])] for j in range(g.n)]
    out.emit(result, header=["j", "r_j", "a_j"], rows=rows)
    return EXIT_OK


def cmd_continuous(args: argparse.Namespace, out: Output) -> int:
    cfg = _require_config(args)
    if isinstance(cfg, CosineConfig):
        minimum = extremum_service.continuous_minimum_time(cfg, resolution=args.resolution, horizon=args.horizon)
    elif spectrum_service.period(cfg.angles) is not None:
        minimum = extremum_service.continuous_minimum_periodic(cfg)
    else:
        g = structure_service.group_decompose(cfg)
        minimum = extremum_service.continuous_minimum_torus(g, cfg.coefficients, seed=args.seed)
    out.emit(minimum, header=["value", "t_star", "method"],
             rows=[[minimum.value, minimum.t_star, minimum.method]])
    return EXIT_OK


def cmd_witness(args: argparse.Namespace, out: Output) -> int:
    cfg = _require_config(args)
    try:
        report = extremum_service.kronecker_witness(cfg.basis, args.t0, args.delta, effort=args.budget,
                                                    torsion=args.torsion)
        code = EXIT_OK
    except BudgetExhausted as e:
        report, code = e.best, EXIT_INCONCLUSIVE
    out.emit(report, header=["k", "delta_achieved", "method", "effort_used"],
             rows=[[report.k, report.delta_achieved, report.method, report.effort_used]])
    return code


def cmd_certify(args: argparse.Namespace, out: Output) -> int:
    cfg = _require_cosine(_require_config(args))
    report = extremum_service.certify_cs_equals_ct(cfg, epsilon=args.epsilon, effort=args.budget)
    out.emit(report, header=["status", "c_T", "k", "f_k", "delta_used"],
             rows=[[report.status, report.c_T, report.k, report.f_k, report.delta_used]])
    return EXIT_OK if report.certified else EXIT_INCONCLUSIVE


def cmd_extremal(args: argparse.Namespace, out: Output) -> int:
    cfg = spectrum_service.extremal_example(args.n)
    document = config_to_dict(cfg)
    rows = [[node["b"], node["angle"]["rational"]] for node in document["nodes"]]
    out.emit(document, header=["b", "alpha"], rows=rows)
    return EXIT_OK


def cmd_corpus(args: argparse.Namespace, out: Output) -> int:
    directory = Path(args.directory)
    if not directory.is_dir():
        raise ConfigError(f"Not a directory: {directory}", field="directory")
    records: List[VerificationRecord] = []
    names: List[str] = []
    code = EXIT_OK
    for path in sorted(directory.glob("*.json")):
        try:
            record = extremum_service.verify_theorem(load_config(path), args.theorem,
                                                     budget=args.budget, restrict=args.restrict)
        except ConfigError as e:
            logger.warning(f"Skipping {path.name}: {e}")
            code = max(code, EXIT_INVALID)
            continue
        names.append(path.name)
        records.append(record)
        code = max(code, VERDICT_EXIT[record.verdict])
    rows = [[name] + row for name, row in zip(names, record_rows(records, RECORD_COLUMNS))]
    out.emit([{"file": name, "record": record} for name, record in zip(names, records)],
             header=["file"] + RECORD_COLUMNS, rows=rows)
    return code


# --- Parser ---

def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="Path to a config JSON document.")
    common.add_argument("--budget", type=int, default=None, help="Scan budget K / witness effort.")
    common.add_argument("--epsilon", type=float, default=1e-3, help="Certification tolerance (default: 1e-3).")
    common.add_argument("--delta", type=float, default=0.01, help="Witness approximation target (default: 0.01).")
    common.add_argument("--format", choices=["json", "csv", "text"], default="json", dest="output_format")
    common.add_argument("--seed", type=int, default=settings.seed, help="Seed for randomized searches.")
    common.add_argument("--restrict", choices=list(extremum_service.RESTRICT_POLICIES), default="all",
                        help="Scanned k: all, odd, or multiples of the torsion order.")

    parser = argparse.ArgumentParser(
        prog="onesided",
        description="One-sided bounds for conjugate-closed power sums and cosine sums.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("eval", parents=[common], help="Tabulate s_k over a k-range.")
    p.add_argument("--k-start", type=int, default=1, dest="k_start")
    p.add_argument("--k-end", type=int, default=10, dest="k_end")
    p.set_defaults(handler=cmd_eval)

    sub.add_parser("bounds", parents=[common], help="Every bound with hypothesis flags.").set_defaults(
        handler=cmd_bounds)

    p = sub.add_parser("verify", parents=[common], help="Compare a bound with a scanned minimum.")
    p.add_argument("--theorem", required=True, choices=[t.value for t in TheoremId])
    p.set_defaults(handler=cmd_verify)

    p = sub.add_parser("degeneracy", parents=[common], help="Root-of-unity ratio detection.")
    p.add_argument("--allow-minus-one", action="store_true", dest="allow_minus_one")
    p.set_defaults(handler=cmd_degeneracy)

    sub.add_parser("decompose", parents=[common], help="Torsion/free decomposition and projection.").set_defaults(
        handler=cmd_decompose)

    p = sub.add_parser("continuous", parents=[common], help="Minimum over real t or over the torus.")
    p.add_argument("--resolution", type=float, default=None)
    p.add_argument("--horizon", type=float, default=None)
    p.set_defaults(handler=cmd_continuous)

    p = sub.add_parser("witness", parents=[common], help="Kronecker witness over the config basis.")
    p.add_argument("--t0", type=float, required=True)
    p.add_argument("--torsion", type=int, default=1)
    p.set_defaults(handler=cmd_witness)

    sub.add_parser("certify", parents=[common], help="Certify c_S = c_T for a cosine config.").set_defaults(
        handler=cmd_certify)

    p = sub.add_parser("extremal", parents=[common], help="Emit the tightness example config.")
    p.add_argument("n", type=int)
    p.set_defaults(handler=cmd_extremal)

    p = sub.add_parser("corpus", parents=[common], help="Verify a theorem on every *.json in a directory.")
    p.add_argument("directory")
    p.add_argument("--theorem", required=True, choices=[t.value for t in TheoremId])
    p.set_defaults(handler=cmd_corpus)
    return parser


def _manifest(args: argparse.Namespace) -> RunManifest:
    budgets = {"budget": args.budget, "epsilon": args.epsilon, "delta": args.delta, "restrict": args.restrict,
               "precision_bits": settings.precision_bits}
    return RunManifest(command=args.command, config_path=args.config, budgets=budgets, seed=args.seed,
                       output_format=args.output_format)


def main(argv: Optional[Sequence[str]] = None, stream=None) -> int:
    setup_logging()
    args = build_parser().parse_args(argv)
    out = Output(_manifest(args), stream)
    try:
        return args.handler(args, out)
    except (ConfigError, PrecisionError) as e:
        logger.error(f"Invalid input: {e}")
        sys.stderr.write(f"error: {e}\n")
        return EXIT_INVALID
    except HypothesisError as e:
        logger.error(f"Hypothesis not met: {e}")
        sys.stderr.write(f"hypothesis: {e}\n")
        return EXIT_HYPOTHESIS
    except OnesidedError as e:
        logger.error(f"{args.command} failed: {e}")
        sys.stderr.write(f"error: {e}\n")
        return EXIT_FAIL


if __name__ == "__main__":
    sys.exit(main())
