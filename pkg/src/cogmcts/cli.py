"""Command-line interface: run a search, generate datasets, evaluate a
single heuristic, and render reports.

Exit codes: 0 success, 1 error, 2 aborted with a resumable checkpoint.
"""

from __future__ import annotations

import json
import os
import sys
from pathlib import Path

import click

from .artifacts import HeuristicArtifact
from .backends import TranscriptLog
from .config import RunConfig
from .cop.instances import (PROBLEMS, generate_instances, load_dataset,
                            save_dataset)
from .errors import CogMCTSError, ConfigurationError, RunAborted
from .executor import ExecutorConfig, HeuristicExecutor
from .orchestrator import Orchestrator
from .reporting import load_report, render_report, write_run_dir

API_BASE_ENV = "COGMCTS_API_BASE"

# Usage mistakes are plain errors here; 2 is reserved for resumable aborts.
click.UsageError.exit_code = 1


@click.group()
def main():
    """LLM-guided heuristic search over combinatorial optimization problems."""


def _load_config(config_path, problem, budget, backend, seed,
                 disable_action) -> RunConfig:
    cfg = RunConfig.load(config_path) if config_path else RunConfig()
    if problem:
        cfg.problem = problem
    if budget is not None:
        cfg.budget = budget
    if backend:
        cfg.backend.kind = backend
    if seed is not None:
        cfg.seed = seed
    if disable_action:
        cfg.disabled_actions = sorted(set(cfg.disabled_actions)
                                      | set(disable_action))
    if cfg.backend.kind == "live" and not cfg.backend.endpoint:
        cfg.backend.endpoint = os.environ.get(API_BASE_ENV, "")
    return cfg


@main.command()
@click.option("--config", "config_path", type=click.Path(exists=True),
              help="Run configuration JSON.")
@click.option("--problem", type=click.Choice(PROBLEMS))
@click.option("--budget", type=int)
@click.option("--backend", type=click.Choice(["live", "scripted"]))
@click.option("--seed", type=int)
@click.option("--dataset", "dataset_path", type=click.Path(exists=True),
              help="Pre-generated dataset JSON (overrides generation).")
@click.option("--resume", "resume_path", type=click.Path(exists=True),
              help="Checkpoint written by a previously aborted run.")
@click.option("--disable-action", multiple=True,
              type=click.Choice(["em1", "em2", "m1", "m2"]))
@click.option("--out", "out_dir", type=click.Path(), default="run-out",
              show_default=True)
def run(config_path, problem, budget, backend, seed, dataset_path,
        resume_path, disable_action, out_dir):
    """Run one search and persist the results under --out."""
    try:
        cfg = _load_config(config_path, problem, budget, backend, seed,
                           disable_action)
        cfg.validate()
        if cfg.backend.kind == "live" \
                and cfg.backend.api_key_env not in os.environ:
            raise ConfigurationError(
                f"live backend needs the {cfg.backend.api_key_env} "
                f"environment variable")
        dataset = load_dataset(dataset_path) if dataset_path else None
        transcript = TranscriptLog()
        orch = Orchestrator(cfg, dataset=dataset, transcript=transcript)
        resume_state = None
        if resume_path:
            resume_state = json.loads(Path(resume_path).read_text())
        report = orch.run(resume_state=resume_state)
    except RunAborted as exc:
        if exc.state is not None:
            out = Path(out_dir)
            out.mkdir(parents=True, exist_ok=True)
            checkpoint = out / "checkpoint.json"
            checkpoint.write_text(json.dumps(exc.state, sort_keys=True))
            click.echo(f"aborted: {exc}; checkpoint at {checkpoint}", err=True)
        else:
            click.echo(f"aborted before any progress: {exc}", err=True)
        sys.exit(2)
    except CogMCTSError as exc:
        click.echo(f"error: {exc}", err=True)
        sys.exit(1)
    write_run_dir(report, out_dir, transcript)
    click.echo(f"best reward {report.best_reward:.6f} "
               f"(digest {report.digest()[:12]}) -> {out_dir}")


@main.command("gen-instances")
@click.option("--problem", type=click.Choice(PROBLEMS), required=True)
@click.option("--n-instances", type=int, default=16, show_default=True)
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--param", "params", multiple=True,
              help="Size parameter as key=value (e.g. n=50, capacity=12.5).")
@click.option("--out", "out_path", type=click.Path(), required=True)
def gen_instances(problem, n_instances, seed, params, out_path):
    """Generate a seeded benchmark dataset and write it as JSON."""
    size_params = {}
    for item in params:
        key, _, value = item.partition("=")
        if not _:
            raise click.UsageError(f"--param expects key=value, got {item!r}")
        size_params[key] = float(value)
    try:
        dataset = generate_instances(problem, n_instances, seed, **size_params)
    except (CogMCTSError, KeyError) as exc:
        click.echo(f"error: {exc}", err=True)
        sys.exit(1)
    digest = save_dataset(dataset, out_path)
    click.echo(f"wrote {len(dataset)} {problem} instance(s) to {out_path} "
               f"(digest {digest[:12]})")


@main.command("eval")
@click.option("--dataset", "dataset_path", type=click.Path(exists=True),
              required=True)
@click.option("--artifact", "artifact_path", type=click.Path(exists=True),
              required=True, help="Heuristic artifact JSON document.")
@click.option("--timeout", type=float, default=60.0, show_default=True)
def eval_artifact(dataset_path, artifact_path, timeout):
    """Evaluate one stored heuristic against a dataset."""
    try:
        dataset = load_dataset(dataset_path)
        artifact = HeuristicArtifact.from_dict(
            json.loads(Path(artifact_path).read_text()))
        executor = HeuristicExecutor(dataset.problem,
                                     ExecutorConfig(timeout_s=timeout))
        result = executor.evaluate(artifact, dataset)
        executor.close()
    except CogMCTSError as exc:
        click.echo(f"error: {exc}", err=True)
        sys.exit(1)
    if result.status != "ok":
        click.echo(f"evaluation {result.status}: {result.message}", err=True)
        sys.exit(1)
    click.echo(f"reward {result.reward:.6f} over {len(dataset)} instance(s)")


@main.command()
@click.option("--run-dir", type=click.Path(exists=True), required=True,
              help="Directory produced by the run command.")
@click.option("--out", "out_dir", type=click.Path(), default=None,
              help="Destination for rendered files (defaults to run dir).")
def report(run_dir, out_dir):
    """Render trajectory/action tables and the convergence figure."""
    try:
        rep = load_report(run_dir)
        dest = render_report(rep, out_dir or run_dir)
    except (CogMCTSError, OSError, json.JSONDecodeError) as exc:
        click.echo(f"error: {exc}", err=True)
        sys.exit(1)
    click.echo(f"rendered report files in {dest}")


if __name__ == "__main__":
    main()
