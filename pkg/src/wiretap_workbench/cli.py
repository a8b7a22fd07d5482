"""
Command-line entry point.

Subcommands ``exponents``, ``softcover``, ``capacity`` and ``wiretap`` run an
experiment and write JSON/CSV results plus a manifest; ``validate`` reports
every problem with a configuration file; ``replay`` re-runs a manifest and
compares digests.
"""

import argparse
import json
import logging
import math
import secrets
import sys
import tempfile
from pathlib import Path
from typing import Any, Callable, Dict, List, Literal, Optional, Union

from pydantic import BaseModel, ConfigDict, Field
from pydantic import ValidationError as PydanticValidationError

from .config import WorkbenchSettings, get_settings
from .exceptions import ConfigurationError, RunRecordError, ValidationError, WorkbenchError
from .exponents import ExponentParams, beta_curve, exponent_report
from .probability_core import Pmf, load_channel, load_joint, load_pmf
from .run_records import RunRecord, RunRecorder, compare_digests
from .secrecy_capacity import SecrecyCapacitySolver, WiretapSpec
from .soft_covering_sim import EnsembleRunner, codebook_size
from .validators import Validators
from .wiretap_sim import (
    build_wiretap_code,
    error_probabilities,
    rate_constraints,
    ss_metric_wtc1,
    ss_metric_wtc2,
)

logger = logging.getLogger(__name__)
run_logger = logging.getLogger("wiretap_workbench.runs")

DATA_DIR = Path(__file__).parent / "data"
SUBCOMMANDS = ("exponents", "softcover", "capacity", "wiretap")
INPUT_FIELDS = ("joint", "main", "eave", "source")


def _random_seed() -> int:
    return secrets.randbits(32)


class ExperimentConfig(BaseModel):
    """Everything one run depends on; caps and solver limits are resolved from
    the settings before the run starts so the snapshot is complete."""

    model_config = ConfigDict(extra="forbid")

    subcommand: Literal["exponents", "softcover", "capacity", "wiretap"]

    # Inputs: a path or the name of a bundled example
    joint: Optional[str] = None
    main: Optional[str] = None
    eave: Optional[str] = None
    source: Optional[str] = None

    rate: Optional[float] = None
    rate_tilde: Optional[float] = None
    alpha: Optional[float] = None
    delta: Optional[float] = None
    eps: Optional[float] = None
    n: Optional[Union[int, str]] = None
    trials: int = 1
    seed: int = Field(default_factory=_random_seed)

    u_card: Optional[int] = None
    grid: Optional[str] = None
    strict: bool = False
    mode: Literal["exact", "monte_carlo"] = "exact"
    subsets: str = "exhaustive"

    out_dir: Optional[str] = None
    threads: Optional[int] = None
    cap_dense: Optional[int] = None
    cap_subsets: Optional[int] = None
    cap_codebook: Optional[int] = None
    alpha_grid_points: Optional[int] = None
    optimizer_restarts: Optional[int] = None
    optimizer_max_iter: Optional[int] = None
    ba_tolerance: Optional[float] = None
    ba_max_iter: Optional[int] = None

    def resolved(self, settings: WorkbenchSettings) -> "ExperimentConfig":
        """Copy with every unset cap, limit and the output directory filled from settings."""
        updates = {
            name: getattr(settings, name)
            for name in (
                "out_dir",
                "threads",
                "cap_dense",
                "cap_subsets",
                "cap_codebook",
                "alpha_grid_points",
                "optimizer_restarts",
                "optimizer_max_iter",
                "ba_tolerance",
                "ba_max_iter",
            )
            if getattr(self, name) is None
        }
        return self.model_copy(update=updates)

    def snapshot(self) -> Dict[str, Any]:
        """Parameters written into result files (the output directory is not a parameter)."""
        return self.model_dump(exclude={"out_dir"})

    @property
    def stem(self) -> str:
        return f"{self.subcommand}_s{self.seed}"

    def n_values(self) -> List[int]:
        if self.n is None:
            return []
        if isinstance(self.n, str) and ".." in self.n:
            return Validators.parse_range(self.n)
        try:
            return [int(self.n)]
        except ValueError:
            raise ValidationError(f"n must be an integer or a range a..b, got {self.n!r}")

    def subset_mode(self) -> tuple:
        """('exhaustive', 0) or ('sampled', K)."""
        if self.subsets == "exhaustive":
            return "exhaustive", 0
        kind, _, count = self.subsets.partition(":")
        if kind != "sampled" or not count.isdigit() or int(count) < 1:
            raise ValidationError(f"subsets must be exhaustive or sampled:K, got {self.subsets!r}")
        return "sampled", int(count)


def resolve_input(value: str) -> Path:
    """A file path, or the name of a bundled example under data/."""
    path = Path(value)
    if path.is_file():
        return path
    bundled = DATA_DIR / f"{value}.json"
    if bundled.is_file():
        return bundled
    return Validators.validate_file_path(value)


def _collect(findings: List[str], name: str, check: Callable[[], Any]) -> Any:
    try:
        return check()
    except WorkbenchError as e:
        findings.append(f"{name}: {e.message}")
    except (OSError, ValueError, TypeError) as e:
        findings.append(f"{name}: {e}")
    return None


def _require(findings: List[str], config: ExperimentConfig, *names: str) -> None:
    for name in names:
        if getattr(config, name) is None:
            findings.append(f"{name}: required for {config.subcommand}")


def _cap_finding(findings: List[str], name: str, what: str, requested: int, cap: int) -> None:
    if requested > cap:
        findings.append(f"{name}: {what} needs {requested} entries, above the cap of {cap}")


def validate(config: ExperimentConfig, settings: Optional[WorkbenchSettings] = None) -> List[str]:
    """Every problem with `config`, including predicted cap overruns; empty when valid."""
    config = config.resolved(settings or get_settings())
    findings: List[str] = []

    loaded = {}
    loaders = {"joint": load_joint, "main": load_channel, "eave": load_channel, "source": load_pmf}
    for name in INPUT_FIELDS:
        value = getattr(config, name)
        if value is not None:
            loaded[name] = _collect(findings, name, lambda: loaders[name](resolve_input(value)))

    for name in ("rate", "rate_tilde", "delta", "eps"):
        value = getattr(config, name)
        if value is not None:
            _collect(findings, name, lambda: Validators.validate_non_negative(value, name))
    if config.alpha is not None:
        _collect(findings, "alpha", lambda: Validators.validate_unit_interval(config.alpha, "alpha"))
    _collect(findings, "trials", lambda: Validators.validate_count(config.trials, "trials"))
    _collect(findings, "seed", lambda: Validators.validate_seed(config.seed))
    if config.u_card is not None:
        _collect(findings, "u_card", lambda: Validators.validate_count(config.u_card, "u_card"))
    if config.grid is not None:
        grid = _collect(findings, "grid", lambda: Validators.parse_grid(config.grid)) or []
        if any(not 0.0 <= a <= 1.0 for a in grid):
            findings.append("grid: alpha values must lie in [0, 1]")
    n_values = _collect(findings, "n", config.n_values) or []
    for n in n_values:
        _collect(findings, "n", lambda: Validators.validate_blocklength(n))
    subset_mode = _collect(findings, "subsets", config.subset_mode)

    if config.subcommand == "exponents":
        _require(findings, config, "joint", "rate", "delta")
        if len(n_values) > 1:
            findings.append("n: exponents takes a single blocklength")

    elif config.subcommand == "softcover":
        _require(findings, config, "joint", "rate", "delta", "n")
        joint = loaded.get("joint")
        if joint is not None and config.rate is not None:
            for n in n_values:
                _cap_finding(
                    findings, "n", f"dense Q_V^n at n={n}", joint.col_alphabet.size**n, config.cap_dense
                )
                _cap_finding(
                    findings, "n", f"codebook at n={n}", codebook_size(n, config.rate), config.cap_codebook
                )

    elif config.subcommand == "capacity":
        _require(findings, config, "main")
        targets = (config.eave is not None) + (config.alpha is not None or config.grid is not None)
        if targets != 1:
            findings.append("eave: give exactly one of eave or alpha/grid")

    elif config.subcommand == "wiretap":
        _require(findings, config, "main", "n", "rate", "rate_tilde")
        if (config.eave is None) == (config.alpha is None):
            findings.append("eave: give exactly one of eave or alpha")
        if len(n_values) > 1:
            findings.append("n: wiretap takes a single blocklength")
        main = loaded.get("main")
        if main is not None and len(n_values) == 1 and config.rate is not None and config.rate_tilde is not None:
            n = n_values[0]
            m_exp, w_exp = round(n * config.rate), round(n * config.rate_tilde)
            _cap_finding(findings, "rate", "wiretap codebook", 2 ** (m_exp + w_exp), config.cap_codebook)
            if config.mode == "exact":
                _cap_finding(
                    findings, "mode", f"exact error enumeration at n={n}", main.output_alphabet.size**n, config.cap_dense
                )
            eave = loaded.get("eave")
            if eave is not None:
                _cap_finding(findings, "eave", f"Z^n at n={n}", eave.output_alphabet.size**n, config.cap_dense)
            if config.alpha is not None and 0.0 <= config.alpha <= 1.0 and subset_mode:
                mu = math.floor(config.alpha * n)
                if subset_mode[0] == "exhaustive":
                    _cap_finding(
                        findings, "subsets", f"{math.comb(n, mu)} subsets x {2 ** m_exp} messages",
                        math.comb(n, mu) * 2**m_exp, config.cap_subsets,
                    )

    return findings


def _solver(config: ExperimentConfig) -> SecrecyCapacitySolver:
    return SecrecyCapacitySolver(
        restarts=config.optimizer_restarts,
        max_iter=config.optimizer_max_iter,
        ba_tolerance=config.ba_tolerance,
        ba_max_iter=config.ba_max_iter,
        threads=config.threads,
        seed=config.seed,
    )


def _run_exponents(config: ExperimentConfig, recorder: RunRecorder) -> None:
    n_values = config.n_values()
    params = ExponentParams(
        joint=load_joint(resolve_input(config.joint)),
        rate=config.rate,
        delta=config.delta,
        n=n_values[0] if n_values else None,
    )
    report = exponent_report(params, grid_points=config.alpha_grid_points)
    recorder.write_json(f"{config.stem}.json", {"config": config.snapshot(), "report": report.to_dict()})
    recorder.write_csv(f"{config.stem}_beta_curve.csv", beta_curve(params, config.alpha_grid_points))


def _run_softcover(config: ExperimentConfig, recorder: RunRecorder) -> None:
    joint = load_joint(resolve_input(config.joint))
    runner = EnsembleRunner(
        threads=config.threads,
        cap_dense=config.cap_dense,
        cap_codebook=config.cap_codebook,
        grid_points=config.alpha_grid_points,
    )
    result = runner.run(
        joint.row_marginal(),
        joint.to_channel(),
        config.rate,
        config.delta,
        config.n_values(),
        config.trials,
        config.seed,
    )
    recorder.write_csv(f"{config.stem}_trials.csv", [t.to_row() for t in result.trials])
    recorder.write_json(f"{config.stem}.json", {"config": config.snapshot(), "summary": result.to_dict()})


def _run_capacity(config: ExperimentConfig, recorder: RunRecorder) -> None:
    main = load_channel(resolve_input(config.main))
    eave = load_channel(resolve_input(config.eave)) if config.eave else None
    solver = _solver(config)
    document: Dict[str, Any] = {"config": config.snapshot()}

    if eave is not None:
        spec = WiretapSpec(main_channel=main, eavesdropper=eave)
        result = solver.wtc1_ss_capacity(spec.main_channel, spec.eavesdropper, config.u_card, config.strict)
        document["wtc1"] = result.to_dict()
    else:
        if config.alpha is not None:
            spec = WiretapSpec(main_channel=main, alpha=config.alpha)
            result = solver.wtc2_ss_capacity(main, spec.alpha, config.u_card, config.strict)
            document["wtc2"] = result.to_dict()
            document["direct_rate"] = solver.wtc2_direct_rate(main, spec.alpha).to_dict()
        if config.grid is not None:
            curve = solver.capacity_curve(main, Validators.parse_grid(config.grid), config.u_card)
            document["curve"] = curve.to_dict()
            recorder.write_csv(f"{config.stem}_curve.csv", curve.to_rows())

    recorder.write_json(f"{config.stem}.json", document)


def _run_wiretap(config: ExperimentConfig, recorder: RunRecorder) -> None:
    main = load_channel(resolve_input(config.main))
    eave = load_channel(resolve_input(config.eave)) if config.eave else None
    source = load_pmf(resolve_input(config.source)) if config.source else Pmf.uniform(main.input_alphabet)
    n = config.n_values()[0]

    code = build_wiretap_code(
        source, n, config.rate, config.rate_tilde, config.eps, config.seed, cap=config.cap_codebook
    )
    errors = error_probabilities(
        code, main, mode=config.mode, trials=config.trials, seed=config.seed, cap=config.cap_dense
    )
    constraints = rate_constraints(
        code.input_pmf, main, code.rate, code.rate_tilde, eave=eave, alpha=None if eave else config.alpha
    )
    document: Dict[str, Any] = {
        "config": config.snapshot(),
        "code": {
            "n": code.n,
            "messages": code.message_count,
            "randomness": code.randomness_count,
            "rate": code.rate,
            "rate_tilde": code.rate_tilde,
            "seed": code.seed,
        },
        "errors": errors.to_dict(),
        "rate_constraints": {
            "reliability_margin": constraints.reliability_margin,
            "secrecy_margin": constraints.secrecy_margin,
            "reliable": constraints.reliable,
            "secure": constraints.secure,
        },
    }

    if eave is not None:
        leakage = ss_metric_wtc1(code, eave, cap=config.cap_dense, ba_tolerance=config.ba_tolerance)
        document["leakage"] = leakage.to_dict()
        rows = [
            {"subset": "", "message": m, "divergence": d, "exact_sem": leakage.exact_sem}
            for m, d in enumerate(leakage.per_message_divergence)
        ]
    else:
        mode, samples = config.subset_mode()
        subset_leakage = ss_metric_wtc2(
            code,
            config.alpha,
            mode=mode,
            samples=samples or 1,
            seed=config.seed,
            cap_subsets=config.cap_subsets,
            cap_dense=config.cap_dense,
            threads=config.threads,
            ba_tolerance=config.ba_tolerance,
        )
        document["leakage"] = subset_leakage.to_dict()
        rows = subset_leakage.to_rows()

    recorder.write_csv(
        f"{config.stem}_divergences.csv", rows, ["subset", "message", "divergence", "exact_sem"]
    )
    recorder.write_json(f"{config.stem}.json", document)


DISPATCH: Dict[str, Callable[[ExperimentConfig, RunRecorder], None]] = {
    "exponents": _run_exponents,
    "softcover": _run_softcover,
    "capacity": _run_capacity,
    "wiretap": _run_wiretap,
}


def run(config: ExperimentConfig, settings: Optional[WorkbenchSettings] = None) -> RunRecord:
    """Validate, dispatch and persist one experiment."""
    settings = settings or get_settings()
    config = config.resolved(settings)
    findings = validate(config, settings)
    if findings:
        raise ConfigurationError(f"{len(findings)} configuration problem(s)", findings)

    recorder = RunRecorder(Path(config.out_dir), config.subcommand, config.model_dump())
    logger.info(f"Running {config.subcommand} with seed {config.seed}")
    logger.debug(f"Configuration: {Validators.summarize_for_logging(config.snapshot())}")
    try:
        DISPATCH[config.subcommand](config, recorder)
    except WorkbenchError:
        raise
    except Exception as e:
        logger.error(f"{config.subcommand} failed: {e}")
        raise WorkbenchError(f"{config.subcommand} failed: {e}")

    record = recorder.finish(config.stem)
    run_logger.info(
        f"{config.subcommand} seed={config.seed} outputs="
        + ",".join(f"{o.filename}:{o.sha256[:12]}" for o in record.outputs)
    )
    return record


def replay(
    manifest: Union[str, Path],
    scratch_dir: Optional[Union[str, Path]] = None,
    settings: Optional[WorkbenchSettings] = None,
) -> List[str]:
    """Re-run a manifest's configuration; returns the outputs whose digests differ.

    Settings fill whatever the recorded configuration leaves unset.
    """
    original = RunRecord.load(manifest)
    scratch = Path(scratch_dir) if scratch_dir else Path(tempfile.mkdtemp(prefix="wiretap-replay-"))
    try:
        config = ExperimentConfig(**{**original.config, "out_dir": str(scratch)})
    except PydanticValidationError as e:
        raise RunRecordError(f"Manifest {manifest} holds an invalid configuration: {e}")

    rerun = run(config, settings)
    differences = compare_digests(original, rerun)
    if differences:
        logger.warning(f"Replay of {manifest} differs in: {', '.join(differences)}")
    else:
        logger.info(f"Replay of {manifest} reproduced all {len(rerun.outputs)} outputs")
    return differences


def load_config(path: Union[str, Path]) -> ExperimentConfig:
    path = Validators.validate_file_path(str(path))
    try:
        return ExperimentConfig(**json.loads(path.read_text(encoding="utf-8")))
    except json.JSONDecodeError as e:
        raise ValidationError(f"Invalid JSON in {path}: {e}")
    except PydanticValidationError as e:
        raise ConfigurationError(
            f"Invalid configuration in {path}",
            [f"{'.'.join(str(p) for p in err['loc'])}: {err['msg']}" for err in e.errors()],
        )


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--out", dest="out_dir", help="Output directory")
    common.add_argument("--seed", type=int, help="Random seed (generated and recorded if omitted)")
    common.add_argument("--threads", type=int, help="Worker threads")
    common.add_argument("--cap-dense", type=int, help="Largest dense enumeration")
    common.add_argument("--cap-subsets", type=int, help="Largest exhaustive subset evaluation")
    common.add_argument("--log-level", help="Log level")

    parser = argparse.ArgumentParser(
        prog="wiretap-workbench", description="Soft-covering, secrecy exponent and wiretap code experiments"
    )
    sub = parser.add_subparsers(dest="subcommand", required=True)

    p = sub.add_parser("exponents", parents=[common], help="Secrecy exponents of a joint PMF")
    p.add_argument("--joint", required=True)
    p.add_argument("--rate", type=float, required=True)
    p.add_argument("--delta", type=float, required=True)
    p.add_argument("--n")

    p = sub.add_parser("softcover", parents=[common], help="Exact soft-covering ensembles")
    p.add_argument("--joint", required=True)
    p.add_argument("--rate", type=float, required=True)
    p.add_argument("--delta", type=float, required=True)
    p.add_argument("--n", required=True, help="Blocklength or range a..b")
    p.add_argument("--trials", type=int, default=1)

    p = sub.add_parser("capacity", parents=[common], help="Semantic-security capacities")
    p.add_argument("--main", required=True)
    p.add_argument("--eave", help="Eavesdropper channel (type I; excludes --alpha and --grid)")
    p.add_argument("--alpha", type=float, help="Revealed fraction (type II)")
    p.add_argument("--grid", help="alpha grid start:stop:step (type II, may be combined with --alpha)")
    p.add_argument("--u-card", type=int)
    p.add_argument("--strict", action="store_true", help="Also solve with |U| reduced by one")

    p = sub.add_parser("wiretap", parents=[common], help="Random wiretap code simulation")
    p.add_argument("--main", required=True)
    group = p.add_mutually_exclusive_group(required=True)
    group.add_argument("--eave")
    group.add_argument("--alpha", type=float)
    p.add_argument("--source", help="Codeword PMF (uniform over the main input alphabet by default)")
    p.add_argument("--n", required=True)
    p.add_argument("--rate", type=float, required=True)
    p.add_argument("--rtilde", dest="rate_tilde", type=float, required=True)
    p.add_argument("--eps", type=float)
    p.add_argument("--mode", choices=["exact", "mc"], default="exact")
    p.add_argument("--trials", type=int, default=10_000)
    p.add_argument("--subsets", default="exhaustive", help="exhaustive or sampled:K")

    p = sub.add_parser("validate", parents=[common], help="Report every problem with a config file")
    p.add_argument("config")

    p = sub.add_parser("replay", parents=[common], help="Re-run a manifest and compare digests")
    p.add_argument("manifest")
    p.add_argument("--scratch", help="Directory for the re-run outputs")

    return parser


def _config_from_args(args: argparse.Namespace) -> ExperimentConfig:
    values = {k: v for k, v in vars(args).items() if v is not None and k != "log_level"}
    if values.get("mode") == "mc":
        values["mode"] = "monte_carlo"
    try:
        return ExperimentConfig(**values)
    except PydanticValidationError as e:
        raise ConfigurationError(
            "Invalid arguments",
            [f"{'.'.join(str(p) for p in err['loc'])}: {err['msg']}" for err in e.errors()],
        )


def main(argv: Optional[List[str]] = None) -> int:
    """Main entry point."""
    args = build_parser().parse_args(argv)

    overrides = {
        name: getattr(args, name)
        for name in ("out_dir", "threads", "cap_dense", "cap_subsets", "log_level")
        if getattr(args, name, None) is not None
    }
    try:
        settings = get_settings(**overrides)
        settings.setup_logging()

        if args.subcommand == "validate":
            config = load_config(args.config)
            findings = validate(config, settings)
            for finding in findings:
                print(finding)
            if findings:
                return ValidationError.exit_code
            print("configuration is valid")
            return 0

        if args.subcommand == "replay":
            differences = replay(args.manifest, args.scratch, settings)
            for name in differences:
                print(f"digest mismatch: {name}")
            return RunRecordError.exit_code if differences else 0

        record = run(_config_from_args(args), settings)
        for output in record.outputs:
            print(f"{output.sha256}  {output.filename}")
        return 0

    except ConfigurationError as e:
        print(f"Error: {e.message}", file=sys.stderr)
        for finding in e.findings:
            print(f"  {finding}", file=sys.stderr)
        return e.exit_code
    except WorkbenchError as e:
        print(f"Error [{e.error_code}]: {e.message}", file=sys.stderr)
        return e.exit_code
    except KeyboardInterrupt:
        print("\nInterrupted by user", file=sys.stderr)
        return 130


if __name__ == "__main__":
    sys.exit(main())
