"""
Command-line surface: `feigenjulia <command> [flags]`.

Exit codes: 0 success, 1 crash, 2 certificate or check failed, 64 usage or
validation error. Every run writes its artifacts and a `manifest.json` into
`<output_dir>/<command>/`.
"""

import argparse
import logging
import sys
import time
from pathlib import Path
from typing import Callable, Dict, List, NoReturn, Optional, Sequence, Tuple

import feigenjulia

from . import types
from .certificates import Certifier, render_summary
from .dynamics import UnimodalQuadratic, chebyshev_semiconjugacy_check
from .engine import Engine
from .oracles import box_counting_dimension, cascade_lambda_oracle, escape_fraction_mc
from .render import render_escape_image
from .renormalization import (
    build_domain_system,
    cvitanovic_solve,
    find_superattracting_parameter,
    lemma_class_report,
    parameter_report,
    scaling_estimators,
)
from .reports import export_schemas, merge_config, read_config_values, write_manifest, write_report
from .series import (
    expansion_lemma_sweep,
    family_sup,
    level_sum_rows,
    parse_family,
    pressure_critical_exponent,
)

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_CRASH = 1
EXIT_FAILED = 2
EXIT_USAGE = 64

PRESSURE_BASE_POINT = complex(1.0, 1.0)

_SETTINGS_FLAGS = ("threads", "log_level")


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message: str) -> NoReturn:
        raise UsageError(f"{message}\n\n{self.format_usage()}")


class _Run:
    """
    State handed to a command: effective config, settings, engine and the
    directory collecting its artifacts.
    """

    def __init__(self, config: types.RunConfig, settings: types.Settings, directory: Path) -> None:
        self.config = config
        self.settings = settings
        self.directory = directory
        self.engine = Engine.get_default()
        self.artifacts: List[Path] = []
        self._parameter: Optional[float] = None

    @property
    def precision(self) -> types.Precision:
        return self.config.precision or self.settings.precision

    @property
    def parameter(self) -> float:
        "`config.c`, or the closest-to-Chebyshev parameter of `config.period`"
        if self.config.c is not None:
            return self.config.c
        if self._parameter is None:
            spec = types.CombinatoricsSpec.closest_to_chebyshev(self.config.period)
            self._parameter = find_superattracting_parameter(spec)
        return self._parameter

    def certifier(self) -> Certifier:
        return Certifier(engine=self.engine, config=self.config, max_workers=1)

    def write(self, record, name: str) -> Path:
        path = write_report(record, self.directory / name)
        self.artifacts.append(path)
        return path

    def write_text(self, text: str, name: str) -> Path:
        path = self.directory / name
        try:
            path.write_text(text, encoding="utf-8")
        except OSError as exc:
            raise types.ConfigError(f"cannot write {path}: {exc}", types.ErrorCode.io) from exc
        self.artifacts.append(path)
        return path


def _find_param(run: _Run) -> int:
    spec = types.CombinatoricsSpec.closest_to_chebyshev(run.config.period)
    c = find_superattracting_parameter(spec)
    run.write(parameter_report(spec, c), "parameter.json")
    return EXIT_OK


def _fixed_point(run: _Run) -> int:
    approx = cvitanovic_solve(run.config.period, degree=run.config.degree, precision=run.precision)
    run.write(approx, "fixed_point.json")
    estimates = scaling_estimators(UnimodalQuadratic(run.parameter), run.config.period, solver=approx.lambda_)
    run.write(estimates, "scaling.json")
    return EXIT_OK


def _domains(run: _Run) -> int:
    config = run.config
    ds = build_domain_system(
        UnimodalQuadratic(run.parameter),
        config.period,
        config.rho,
        strict=False,
        tracking=config.tracking,
        return_budget=config.return_budget,
    )
    summary = ds.summary()
    run.write(summary, "domains.json")
    ok = summary.nesting_ok and summary.first_return and summary.postcritical_clearance
    return EXIT_OK if ok else EXIT_FAILED


def _series(run: _Run) -> int:
    config = run.config
    f = UnimodalQuadratic(run.parameter)
    certifier = run.certifier()
    ds = certifier.domain_system(config.period, config.rho, f)
    profile = certifier.expansion_profile(config.period, config.rho, f)
    budget = certifier.budget
    bound = family_sup(
        f,
        ds,
        parse_family(config.family, ds),
        config.delta,
        grid=budget.grid,
        j=budget.depth,
        prune_threshold=budget.prune_threshold,
        profile=profile,
        node_budget=budget.node_budget,
        engine=run.engine,
    )
    run.write(bound, "series.json")
    run.write(profile, "profile.json")
    rows = level_sum_rows(bound)
    if rows:
        run.write(rows, "levels.csv")
    return EXIT_OK


def _certify_delta(run: _Run) -> int:
    config = run.config
    certifier = run.certifier()
    if config.bisect:
        try:
            result = certifier.bisect_delta(
                config.period,
                config.rho,
                (config.delta_min, config.delta_max),
                config.tolerance,
                mode=config.recursion_mode,
            )
        except types.CertificateError as exc:
            if exc.code not in (types.ErrorCode.uncertifiable_range, types.ErrorCode.nonmonotone):
                raise
            run.write_text(f"{exc}\n", "summary.txt")
            return EXIT_FAILED
        run.write(result, "bisection.json")
        run.write_text(render_summary(result.certificate), "summary.txt")
        return EXIT_OK

    certificate = certifier.certify_delta(config.period, config.rho, config.delta, mode=config.recursion_mode)
    run.write(certificate, "certificate.json")
    run.write_text(render_summary(certificate), "summary.txt")
    return EXIT_OK if certificate.status == types.CertificateStatus.certified else EXIT_FAILED


def _certify_area(run: _Run) -> int:
    config = run.config
    certifier = run.certifier()
    certificate = certifier.certify_area(config.period, config.rho, config.k_max, mode=config.area_mode)
    run.write(certificate, "area_certificate.json")
    run.write_text(render_summary(certificate), "summary.txt")
    if certificate.status != types.CertificateStatus.certified:
        return EXIT_FAILED

    ds = certifier.domain_system(config.period, config.rho)
    fraction = escape_fraction_mc(ds.f, ds, 1, config.samples, config.mc_budget, config.seed, engine=run.engine)
    run.write(fraction, "escape_fraction.json")
    return EXIT_OK


def _dimension(run: _Run) -> int:
    config = run.config
    c = run.parameter
    box = box_counting_dimension(c, config.resolutions, config.max_iter, engine=run.engine)
    run.write(box.ladder, "ladder.csv")
    try:
        pressure = pressure_critical_exponent(UnimodalQuadratic(c), PRESSURE_BASE_POINT)
    except types.SeriesError as exc:
        logger.warning("pressure estimate unavailable: %s", exc)
        pressure = None
    run.write(types.DimensionReport(box=box, pressure=pressure), "dimension.json")
    return EXIT_OK


def _cascade(run: _Run) -> int:
    oracle = cascade_lambda_oracle(run.config.cascade_levels)
    try:
        solver = cvitanovic_solve(2, degree=run.config.degree, precision=run.precision)
    except types.RenormalizationError as exc:
        logger.warning("period-2 solver failed: %s", exc)
        solver = None
    difference = abs(solver.lambda_ - oracle.lambda_) if solver is not None else None
    run.write(types.CascadeReport(oracle=oracle, solver=solver, difference=difference), "cascade.json")
    return EXIT_OK


def _lemma_checks(run: _Run) -> int:
    config = run.config
    if config.p_min > config.p_max:
        raise types.ConfigError(f"p_min {config.p_min} exceeds p_max {config.p_max}", types.ErrorCode.range)
    rows = lemma_class_report((config.p_min, config.p_max), config.rho, run.engine, config.tracking)
    run.write(rows, "lemma_rows.csv")
    sweep = expansion_lemma_sweep(
        config.period,
        config.kappa,
        config.epsilon,
        config.rho,
        precision=run.precision,
        tracking=config.tracking,
    )
    run.write(sweep, "expansion_sweep.json")
    run.write(chebyshev_semiconjugacy_check(10_000, (1.01, 3.0), seed=config.seed), "semiconjugacy.json")
    return EXIT_OK if sweep.cusp_pass and sweep.return_pass else EXIT_FAILED


def _render(run: _Run) -> int:
    config = run.config
    path = render_escape_image(
        run.parameter,
        run.directory / f"julia.{config.image_format}",
        resolution=config.resolutions[0],
        max_iter=config.max_iter,
        image_format=config.image_format,
        engine=run.engine,
    )
    run.artifacts.append(path)
    return EXIT_OK


def _schemas(run: _Run) -> int:
    run.artifacts.extend(export_schemas(run.directory))
    return EXIT_OK


COMMANDS: Dict[str, Tuple[Callable[[_Run], int], str]] = {
    "find-param": (_find_param, "superattracting parameter closest to Chebyshev"),
    "fixed-point": (_fixed_point, "renormalization fixed point by collocation"),
    "domains": (_domains, "nested domain system and its checks"),
    "series": (_series, "truncated series sup of one orbit family"),
    "certify-delta": (_certify_delta, "certify an upper bound on the critical exponent"),
    "certify-area": (_certify_area, "area-zero induction and escape-fraction cross-check"),
    "dimension": (_dimension, "box-counting and pressure dimension estimates"),
    "cascade": (_cascade, "period-doubling scaling factor oracle"),
    "lemma-checks": (_lemma_checks, "geometry table and expansion sweeps"),
    "render": (_render, "escape-time image"),
    "schemas": (_schemas, "JSON schemas of the report records"),
}


def _add_config_flags(parser: argparse.ArgumentParser) -> None:
    group = parser.add_argument_group("run configuration")
    for name in types.model_field_names(types.RunConfig):
        if name == "output_dir":
            continue
        flag = "--" + name.replace("_", "-")
        if name == "resolutions":
            group.add_argument(flag, dest=name, type=lambda v: [s for s in v.split(",") if s], default=None)
        else:
            group.add_argument(flag, dest=name, default=None, metavar=name.upper())


def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    common.add_argument("--config", default=None, help="`key = value` configuration file")
    common.add_argument("--threads", type=int, default=None, help="worker cap")
    common.add_argument("--output-dir", dest="output_dir", default=None)
    common.add_argument("--log-level", dest="log_level", default=None)
    _add_config_flags(common)

    parser = _Parser(prog="feigenjulia", description="Poincaré series near the Chebyshev map")
    subparsers = parser.add_subparsers(dest="command", required=True)
    for name, (_, help_text) in COMMANDS.items():
        subparsers.add_parser(name, parents=[common], help=help_text)
    return parser


def _settings(args: argparse.Namespace) -> types.Settings:
    overrides = {name: getattr(args, name) for name in _SETTINGS_FLAGS if getattr(args, name) is not None}
    try:
        return types.Settings(**overrides)
    except types.ValidationError as exc:
        raise types.ConfigError(f"invalid settings: {exc.errors()[0]['msg']}", types.ErrorCode.range) from exc


def _output_dir(args: argparse.Namespace, settings: types.Settings, config: types.RunConfig) -> Path:
    "flag > environment > config file > default"
    if args.output_dir:
        return Path(args.output_dir)
    if "output_dir" in types.model_fields_set(settings):
        return Path(settings.output_dir)
    return Path(config.output_dir or settings.output_dir)


def run_command(argv: Optional[Sequence[str]] = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    try:
        args = build_parser().parse_args(argv)
    except UsageError as exc:
        print(f"feigenjulia: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except SystemExit as exc:
        return int(exc.code or 0)

    try:
        settings = _settings(args)
        file_values = read_config_values(args.config) if args.config else {}
        flags = {k: v for k, v in vars(args).items() if k in types.model_field_names(types.RunConfig)}
        config = merge_config(file_values, flags, origin=args.config or "flags")
    except types.ConfigError as exc:
        print(f"feigenjulia: {exc}", file=sys.stderr)
        return EXIT_USAGE

    try:
        logging.basicConfig(level=settings.log_level.upper(), format="%(asctime)s %(name)s %(levelname)s %(message)s")
    except ValueError as exc:
        print(f"feigenjulia: {exc}", file=sys.stderr)
        return EXIT_USAGE
    directory = _output_dir(args, settings, config) / args.command
    handler, _ = COMMANDS[args.command]

    previous = feigenjulia.settings
    feigenjulia.settings = settings
    start = time.perf_counter()
    error: Optional[str] = None
    run: Optional[_Run] = None
    try:
        directory.mkdir(parents=True, exist_ok=True)
        run = _Run(config, settings, directory)
        exit_code = handler(run)
    except types.ConfigError as exc:
        error = str(exc)
        exit_code = EXIT_USAGE
    except types.FeigenjuliaError as exc:
        error = str(exc)
        exit_code = EXIT_CRASH
    except OSError as exc:
        error = str(exc)
        exit_code = EXIT_CRASH
    except Exception as exc:
        logger.exception("%s crashed", args.command)
        error = f"{type(exc).__name__}: {exc}"
        exit_code = EXIT_CRASH
    finally:
        feigenjulia.settings = previous

    if error:
        print(f"feigenjulia {args.command}: {error}", file=sys.stderr)
    try:
        write_manifest(
            directory,
            args.command,
            argv,
            config,
            time.perf_counter() - start,
            run.artifacts if run is not None else [],
            exit_code,
            error,
        )
    except types.ConfigError as exc:
        print(f"feigenjulia: {exc}", file=sys.stderr)
        return exit_code or EXIT_CRASH

    for artifact in run.artifacts if run is not None else []:
        print(artifact)
    return exit_code


def main() -> None:
    sys.exit(run_command())
