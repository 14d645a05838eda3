import json
import logging
import sys
from pathlib import Path
from typing import Literal

import numpy as np
from pydantic import BaseModel, Field, ValidationError
from pydantic_settings import CliApp, CliSubCommand, SettingsConfigDict, get_subcommand

from stairsolve.bench import emit_csv, emit_json, run_bench
from stairsolve.config import Config
from stairsolve.errors import InvalidArgumentError, StairsolveError
from stairsolve.mmio import load_matrix_market, write_matrix_market
from stairsolve.models import ModelName, generate, load_params, parse_params
from stairsolve.solver import SolveOptions, solve_stationary
from stairsolve.sparse import CanonicalChainMatrix, canonicalize, partition_uniform
from stairsolve.spectral import spectral_report, table1_experiment
from stairsolve.splittings import SplittingKind

logger = logging.getLogger("Cli")


def _load_chain(path: Path) -> CanonicalChainMatrix:
    return canonicalize(load_matrix_market(path))


def _block_size(cli: "StairsolveCli", size: int) -> int:
    if cli.block_size > size:
        logger.info(f"block size {cli.block_size} exceeds N={size}, using a single block")
        return size
    return cli.block_size


def _write_text(text: str, out: Path | None) -> None:
    if out is None:
        sys.stdout.write(text + "\n")
        return
    out.write_text(text + "\n")
    logger.info(f"wrote {out}")


class GenerateCommand(BaseModel):
    """Generate a benchmark chain as a Matrix Market file plus a JSON sidecar."""

    model: ModelName
    params: list[str] = Field(default_factory=list, description="model parameters as key=value")
    params_file: Path | None = Field(default=None, description="key=value, YAML or JSON parameter file")

    def run(self, cli: "StairsolveCli") -> None:
        if cli.out is None:
            raise InvalidArgumentError("generate needs --out")
        params = load_params(self.params_file) if self.params_file else {}
        params.update(parse_params(self.params))
        if self.model != "mutex":
            params.setdefault("seed", cli.seed)
        a, sidecar = generate(self.model, params)
        write_matrix_market(a.matrix, cli.out, comment=f"stairsolve {self.model} {json.dumps(sidecar['params'])}")
        sidecar_path = cli.out.with_suffix(cli.out.suffix + ".json")
        sidecar_path.write_text(json.dumps(sidecar, indent=2) + "\n")
        logger.info(f"wrote {cli.out} (N={a.n}, nnz={a.nnz}) and {sidecar_path}")


class SolveCommand(BaseModel):
    """Compute the stationary vector; writes pi to --out, one value per line."""

    matrix: Path
    method: str = "stair1"
    initial: Literal["uniform", "random"] = "uniform"
    history: Path | None = Field(default=None, description="residual history CSV")

    def run(self, cli: "StairsolveCli") -> None:
        a = _load_chain(self.matrix)
        partition = partition_uniform(a.n, _block_size(cli, a.n))
        opts = SolveOptions.from_config(cli, initial=self.initial)
        report = solve_stationary(a, partition, SplittingKind.parse(self.method), opts)
        if cli.out is not None:
            np.savetxt(cli.out, report.pi, fmt="%.16e")
        if self.history is not None:
            report.write_history_csv(self.history)
        summary = {
            "matrix": str(self.matrix),
            "method": report.method,
            "N": a.n,
            "blocks": partition.n,
            "iterations": report.iterations,
            "converged": report.converged,
            "final_err": report.residual_history[-1] if report.residual_history else None,
            "residual": report.residual,
            "T_seconds": report.wall_seconds,
            "prepare_seconds": report.prepare_seconds,
        }
        sys.stdout.write(json.dumps(summary) + "\n")


class SpectrumCommand(BaseModel):
    """Dense spectra of the iteration matrices (JSON report)."""

    matrix: Path
    methods: list[str] = Field(default_factory=lambda: ["bj", "bgs", "stair1", "stair2"])

    def run(self, cli: "StairsolveCli") -> None:
        a = _load_chain(self.matrix)
        ell = _block_size(cli, a.n)
        partition = partition_uniform(a.n, ell)
        reports = [
            spectral_report(a, partition, SplittingKind.parse(m).with_processors(cli.threads), cli.dense_limit)
            for m in self.methods
        ]
        payload = {
            "matrix": str(self.matrix),
            "N": a.n,
            "block_size": ell,
            "reports": [r.to_dict() for r in reports],
        }
        _write_text(json.dumps(payload, indent=2), cli.out)


class Table1Command(BaseModel):
    """Convergence-ratio maxima over random block lower Hessenberg matrices (CSV)."""

    trials: int = Field(default=100, ge=1)
    k: int = Field(default=64, ge=1)
    n: int = Field(default=16, ge=2)
    kp: list[int] = Field(default_factory=lambda: [16, 32, 64])
    lower_bandwidth: int = Field(default=4, ge=1)

    def run(self, cli: "StairsolveCli") -> None:
        result = table1_experiment(
            self.trials,
            self.k,
            self.n,
            self.kp,
            seed=cli.seed,
            lower_bandwidth=self.lower_bandwidth,
            workers=cli.threads,
            dense_limit=cli.dense_limit,
        )
        out = cli.out or Path("table1.csv")
        result.write_csv(out)
        logger.info(f"wrote {out}")


class BenchCommand(BaseModel):
    """Completion time, speedup and efficiency over worker counts."""

    matrix: Path
    methods: list[str] = Field(default_factory=lambda: ["bgs", "jgs", "stair1", "stair2"])
    threads_list: list[int] = Field(default_factory=lambda: [1, 2, 4])
    repeats: int = Field(default=3, ge=1)
    history_dir: Path | None = None

    def run(self, cli: "StairsolveCli") -> None:
        a = _load_chain(self.matrix)
        if self.history_dir is not None:
            self.history_dir.mkdir(parents=True, exist_ok=True)
        records = run_bench(
            a,
            [SplittingKind.parse(m) for m in self.methods],
            _block_size(cli, a.n),
            self.threads_list,
            SolveOptions.from_config(cli),
            matrix_id=self.matrix.stem,
            repeats=self.repeats,
            history_dir=self.history_dir,
        )
        out = cli.out or Path("bench.csv")
        if out.suffix == ".json":
            emit_json(records, out)
        else:
            emit_csv(records, out)
        logger.info(f"wrote {out}")


class StairsolveCli(Config):
    model_config = SettingsConfigDict(
        cli_prog_name="stairsolve",
        cli_kebab_case=True,
    )

    out: Path | None = Field(default=None, description="output file of the subcommand")

    generate: CliSubCommand[GenerateCommand]
    solve: CliSubCommand[SolveCommand]
    spectrum: CliSubCommand[SpectrumCommand]
    table1: CliSubCommand[Table1Command]
    bench: CliSubCommand[BenchCommand]

    def cli_cmd(self) -> None:
        logging.basicConfig(level=logging.getLevelName(self.log_level.upper()))
        get_subcommand(self).run(self)


def main(argv: list[str] | None = None) -> None:
    try:
        CliApp.run(StairsolveCli, cli_args=argv)
    except (StairsolveError, ValidationError, OSError) as e:
        logger.error(str(e))
        sys.exit(1)
