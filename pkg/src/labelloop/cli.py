"""Command-line front door: synthesize corpora, run loops with any oracle,
evaluate models, compare runs, and serve the annotation API.

Exit codes: 0 success, 2 usage, 3 bad data, 4 oracle transport, 5 invariant
violation.
"""
from __future__ import annotations

import json
import os
import sys

import click

from .core import (
    DataError,
    InvariantError,
    LabelLoopError,
    OracleProtocolError,
    OracleTransportError,
)
from .evaluation import (
    EvaluationReport,
    NoPositivesInferred,
    compare_methods,
    evaluate_run,
    format_comparison,
)
from .loop import LoopController
from .models import save_lexicon
from .oracles import AnnotationsPending
from .runcfg import RunSpec
from .store import DirectoryStore
from .synth import default_lexicon, generate_pool

EXIT_DATA = 3
EXIT_TRANSPORT = 4
EXIT_INVARIANT = 5


def _fail(exc: LabelLoopError) -> "click.exceptions.Exit":
    click.echo(f"error: {exc}", err=True)
    if isinstance(exc, (OracleTransportError, OracleProtocolError)):
        code = EXIT_TRANSPORT
    elif isinstance(exc, InvariantError):
        code = EXIT_INVARIANT
    else:
        code = EXIT_DATA
    return click.exceptions.Exit(code)


@click.group()
def main():
    """Active-learning runs: cold-start, uncertainty sampling, evaluation."""


@main.command()
@click.option("--out", required=True, type=click.Path(), help="dataset file to write")
@click.option("--size", default=10000, show_default=True)
@click.option("--positive-fraction", default=0.10, show_default=True)
@click.option("--ambiguous-fraction", default=0.05, show_default=True)
@click.option("--trap-fraction", default=0.30, show_default=True)
@click.option("--seed", default=0, show_default=True)
@click.option("--category", default="coffee", show_default=True)
@click.option("--lexicon-out", type=click.Path(), help="also write the companion lexicon")
def synth(out, size, positive_fraction, ambiguous_fraction, trap_fraction, seed, category, lexicon_out):
    """Generate a seeded synthetic commodity-name corpus with hidden labels."""
    from .core import save_pool

    try:
        pool = generate_pool(
            size, positive_fraction, ambiguous_fraction, seed, category, trap_fraction
        )
        save_pool(pool, out)
        if lexicon_out:
            save_lexicon(default_lexicon(category), lexicon_out)
    except LabelLoopError as exc:
        raise _fail(exc)
    click.echo(f"wrote {len(pool)} points to {out}")


def _spec_from_flags(config, **overrides) -> RunSpec:
    if config:
        spec = RunSpec.load(config)
        for key, value in overrides.items():
            if value is not None:
                setattr(spec, key, value)
        return spec
    if overrides.get("dataset") is None:
        raise DataError("either --config or --dataset is required")
    defaults = RunSpec(dataset=overrides["dataset"])
    for key, value in overrides.items():
        if value is not None:
            setattr(defaults, key, value)
    return defaults


def _run_flags(fn):
    opts = [
        click.option("--config", type=click.Path(exists=True), help="run config file (same record the service consumes)"),
        click.option("--dataset", type=click.Path()),
        click.option("--lexicon", type=click.Path()),
        click.option("--category", default=None),
        click.option("--k", type=int, default=None),
        click.option("--max-iters", "max_iterations", type=int, default=None),
        click.option("--n-eval", "n_eval", type=int, default=None),
        click.option("--seed", type=int, default=None),
        click.option("--strategy", "strategy_id", default=None,
                     type=click.Choice(["uncertainty", "random", "confident_zero_shot"])),
        click.option("--oracle", default=None, help="scripted | noisy:RHO | remote:URL | human"),
        click.option("--threshold", type=float, default=None),
        click.option("--epochs", type=int, default=None),
        click.option("--lr", type=float, default=None),
        click.option("--feature-dim", "feature_dim", type=int, default=None),
    ]
    for opt in reversed(opts):
        fn = opt(fn)
    return fn


@main.command()
@_run_flags
@click.option("--out", "run_dir", required=True, type=click.Path(), help="run directory to create")
@click.option("--service", default="http://127.0.0.1:8414", show_default=True,
              help="service address (human-oracle runs)")
def run(config, run_dir, service, **overrides):
    """Execute a full run (cold-start, loop, evaluation) into a run directory."""
    try:
        spec = _spec_from_flags(config, **overrides)
        if spec.oracle == "human":
            _start_human_run(spec, run_dir, service)
            return
        pool = spec.load_pool()
        store = DirectoryStore(run_dir)
        spec.save(os.path.join(run_dir, "config.json"))
        controller = LoopController(
            pool, spec.scorer(), spec.build_oracle(), spec.loop_config(),
            spec.train_config(), store=store,
        )
        result = controller.run()
        X, _ = controller.pool_features()
        try:
            report = evaluate_run(
                result.params, pool, controller.oracle, controller.config,
                threshold=spec.threshold, store=store, state=result.state, X=X,
                category=spec.category,
            )
        except NoPositivesInferred:
            store.save_report({"no_positives_inferred": True, "estimated_precision": None})
            click.echo("run complete; no positives inferred (precision undefined)")
            return
    except LabelLoopError as exc:
        raise _fail(exc)
    click.echo(
        f"run complete: {len(result.state.annotations)} annotations, "
        f"model version {result.state.model_version}, "
        f"estimated precision {report.estimated_precision:.3f} "
        f"({report.n_true_positive_in_sample}/{report.n_sampled}), "
        f"#inferred-positive {report.inferred_positive_count}"
    )


def _start_human_run(spec: RunSpec, run_dir: str, service: str) -> None:
    import httpx

    try:
        resp = httpx.get(f"{service}/status", timeout=3.0)
    except httpx.HTTPError:
        raise DataError(
            f"human-oracle runs need the annotation service; nothing answered at "
            f"{service}. Start it with `labelloop serve` and retry."
        )
    del resp
    run_id = os.path.basename(os.path.normpath(run_dir))
    reply = httpx.post(
        f"{service}/runs",
        json={"config": spec.to_dict(), "run_id": run_id},
        timeout=10.0,
    )
    if reply.status_code != 200:
        raise DataError(f"service rejected the run: {reply.text}")
    click.echo(
        f"run {reply.json()['run_id']} started; label candidates at {service} "
        "(GET /candidates, POST /annotations) or in the web console."
    )


@main.command()
@click.option("--run-dir", required=True, type=click.Path(exists=True))
@click.option("--oracle", default=None, help="override the run's oracle spec")
@click.option("--threshold", type=float, default=None)
def evaluate(run_dir, oracle, threshold):
    """(Re-)estimate precision for a completed run directory."""
    try:
        spec = RunSpec.load(os.path.join(run_dir, "config.json"))
        if oracle is not None:
            spec.oracle = oracle
        if threshold is not None:
            spec.threshold = threshold
        if spec.oracle == "human":
            raise DataError("drive human-oracle evaluation through the service")
        pool = spec.load_pool()
        store = DirectoryStore(run_dir)
        controller = LoopController(
            pool, spec.scorer(), spec.build_oracle(), spec.loop_config(),
            spec.train_config(), store=store,
        )
        result = controller.run()
        X, _ = controller.pool_features()
        try:
            report = evaluate_run(
                result.params, pool, controller.oracle, controller.config,
                threshold=spec.threshold, store=store, state=result.state, X=X,
                category=spec.category,
            )
        except NoPositivesInferred:
            store.save_report({"no_positives_inferred": True, "estimated_precision": None})
            click.echo("no positives inferred (precision undefined)")
            return
    except AnnotationsPending as exc:
        raise _fail(DataError(str(exc)))
    except LabelLoopError as exc:
        raise _fail(exc)
    click.echo(
        f"estimated precision {report.estimated_precision:.3f} "
        f"({report.n_true_positive_in_sample}/{report.n_sampled}), "
        f"#inferred-positive {report.inferred_positive_count}"
    )


@main.command()
@click.argument("run_dirs", nargs=-1, type=click.Path(exists=True))
def compare(run_dirs):
    """Tabulate estimated precision across two or more run directories."""
    try:
        if len(run_dirs) < 2:
            raise DataError("need at least two run directories to compare")
        reports = []
        for d in run_dirs:
            store = DirectoryStore(d)
            raw = store.load_report()
            if raw is None or raw.get("estimated_precision") is None:
                raise DataError(
                    f"{d} has no evaluation yet; run `labelloop evaluate --run-dir {d}`"
                )
            spec = RunSpec.load(os.path.join(d, "config.json"))
            name = f"{spec.strategy_id}"
            reports.append((name, EvaluationReport.from_dict(raw)))
        rows, diffs = compare_methods(reports)
    except LabelLoopError as exc:
        raise _fail(exc)
    click.echo(format_comparison(rows, diffs))


@main.command()
@click.option("--runs-dir", default="runs", show_default=True, type=click.Path())
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--port", default=8414, show_default=True)
def serve(runs_dir, host, port):
    """Serve the run/annotation API (set LABELLOOP_ADDR to override host:port)."""
    from .service import serve as _serve

    _serve(runs_dir, host, port)


if __name__ == "__main__":
    main()
