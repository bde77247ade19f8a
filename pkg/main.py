#!/usr/bin/env python3
"""
ICU AGENT PIPELINE - Main Entry Point
Multi-agent vs single-agent mortality and length-of-stay prediction

Run with:
    python main.py synth --seed 7 --n 170 --out-dir ./data
    python main.py run --graph mas --runs 8 --data-dir ./data --output-dir ./runs/mas
    python main.py run --graph sas --runs 8 --data-dir ./data --output-dir ./runs/sas
    python main.py compare --mas-dir ./runs/mas --sas-dir ./runs/sas --format markdown
    python main.py score --runs-dir ./runs/mas --rubric ./my_rubric.json

Exit codes: 0 success, 1 usage or invalid config, 2 data error, 3 provider error.
"""

import argparse
import asyncio
import sys
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence

from loguru import logger

# Add project root to path
sys.path.insert(0, str(Path(__file__).parent))

from config import ConfigError, ExperimentConfig, get_settings, load_experiment_config, setup_logging
from agents import build_few_shot
from evaluation import (
    EmptyResultsError,
    PairingError,
    RunDirectoryError,
    compare_models,
    emit_report,
    load_runs,
    metrics_for_run,
    metrics_from_records,
)
from ingestion import LoadError, StratumError, generate_synthetic, load_cohort, sample_balanced
from orchestrator import (
    GraphValidationError,
    PipelineExecutor,
    RunStore,
    graph_for,
    new_run_id,
)
from provider import ChatCompletionsClient, MockBackend, ModelBackend, ProviderError, RetryPolicy
from transparency import RubricError, TransparencyScorer, load_rubric

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_DATA = 2
EXIT_PROVIDER = 3


class PipelineArgumentParser(argparse.ArgumentParser):
    """argparse with usage errors mapped to exit code 1"""

    def error(self, message: str):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def build_backend(config: ExperimentConfig) -> ModelBackend:
    """
    Model backend for an experiment

    Raises:
        ConfigError: http backend without an API key
    """
    if config.provider.backend == "http":
        return ChatCompletionsClient.from_settings(config.provider)
    return MockBackend()


def cmd_synth(args: argparse.Namespace) -> int:
    """Write a synthetic eICU-shaped cohort"""
    try:
        paths = generate_synthetic(args.seed, args.n, args.expired_fraction, args.out_dir)
    except (OSError, ValueError) as e:
        logger.error(f"❌ Synthetic generation failed: {e}")
        return EXIT_DATA
    for path in paths:
        print(path)
    return EXIT_OK


def _run_overrides(args: argparse.Namespace) -> Dict[str, Any]:
    return {
        "data_dir": args.data_dir,
        "graph": args.graph,
        "graph_file": args.graph_file,
        "runs": args.runs,
        "seed": args.seed,
        "n_expired": args.n_expired,
        "n_survived": args.n_survived,
        "max_parallel": args.max_parallel,
        "token_budget": args.token_budget,
        "threshold": args.threshold,
        "apache_blend_weight": args.apache_blend,
        "rubric_path": args.rubric,
        "output_dir": args.output_dir,
        "provider": {
            "backend": args.backend,
            "base_url": args.base_url,
            "model_id": args.model,
            "api_key_env": args.api_key_env,
        },
    }


async def run_experiment(config: ExperimentConfig, backend: ModelBackend) -> List[Path]:
    """
    Execute config.runs repetitions with seeds seed, seed+1, ...

    Returns:
        The run directories written, in seed order

    Raises:
        LoadError / StratumError: cohort cannot be loaded or sampled
        GraphValidationError: invalid graph
        RubricError: invalid rubric file
    """
    records, _ = load_cohort(config.data_dir, config.schema_map)
    exemplars = build_few_shot(records)
    exemplar_ids = {e.stay_id for e in exemplars}
    pool = [r for r in records if r.stay_id not in exemplar_ids]
    logger.info(f"🧾 Few-shot exemplars {sorted(exemplar_ids)} held out of a pool of {len(pool)} stays")

    graph = graph_for(config.graph, config.graph_file, config.provider.model_for)
    scorer = TransparencyScorer(load_rubric(config.rubric_path))
    policy = RetryPolicy.from_settings(config.retry)

    directories = []
    for k in range(config.runs):
        seed = config.seed + k
        cohort = sample_balanced(pool, config.n_expired, config.n_survived, seed)
        store = RunStore(config.output_dir, new_run_id(seed), graph.label.value)
        executor = PipelineExecutor(
            graph,
            backend,
            policy,
            exemplars=exemplars,
            token_budget=config.token_budget,
            scorer=scorer,
            temperature=config.provider.temperature,
            max_output_tokens=config.provider.max_output_tokens,
            store=store,
        )
        result = await executor.run_batch(cohort, config.max_parallel, seed)

        try:
            metrics = metrics_from_records(result.records, config.threshold, config.apache_blend_weight)
        except EmptyResultsError:
            logger.error(f"❌ Run {k + 1}/{config.runs} (seed {seed}): every patient failed")
            raise ProviderError(f"run with seed {seed} produced no predictions")
        store.save_metrics(metrics.model_dump())
        logger.info(
            f"✅ Run {k + 1}/{config.runs} (seed {seed}) | accuracy {metrics.accuracy_percent:.1f}% | "
            f"LOS MAE {metrics.los_mae_days:.2f}d | transparency {metrics.mean_transparency:.1f}"
        )
        directories.append(store.directory)
    return directories


def cmd_run(args: argparse.Namespace) -> int:
    """Run the configured graph over repeated balanced samples"""
    try:
        config = load_experiment_config(args.config, _run_overrides(args))
    except ConfigError as e:
        logger.error(f"❌ {e}")
        return EXIT_USAGE

    setup_logging(get_settings().log_level, get_settings().log_dir or Path(config.output_dir) / "logs")

    # Provider problems are fatal before any run starts
    try:
        backend = build_backend(config)
    except ConfigError as e:
        logger.error(f"❌ Provider configuration: {e}")
        return EXIT_PROVIDER

    async def _run() -> List[Path]:
        try:
            return await run_experiment(config, backend)
        finally:
            await backend.close()

    try:
        directories = asyncio.run(_run())
    except (LoadError, StratumError) as e:
        logger.error(f"❌ Data error: {e}")
        return EXIT_DATA
    except (GraphValidationError, RubricError) as e:
        logger.error(f"❌ {e}")
        return EXIT_USAGE
    except ProviderError as e:
        logger.error(f"❌ Provider error: {e}")
        return EXIT_PROVIDER

    for directory in directories:
        print(directory)
    return EXIT_OK


def cmd_compare(args: argparse.Namespace) -> int:
    """Metrics of persisted runs (recomputed, or stored when records are gone) as the MAS vs SAS report"""
    try:
        config = load_experiment_config(args.config, {
            "threshold": args.threshold,
            "apache_blend_weight": args.apache_blend,
        })
    except ConfigError as e:
        logger.error(f"❌ {e}")
        return EXIT_USAGE

    try:
        mas_runs = load_runs(args.mas_dir, args.mas_label)
        sas_runs = load_runs(args.sas_dir, args.sas_label)
        mas_seeds = [run.summary.seed for run in mas_runs]
        sas_seeds = [run.summary.seed for run in sas_runs]
        if len(mas_seeds) == len(sas_seeds) and mas_seeds != sas_seeds:
            raise PairingError(f"seed schedules differ: MAS {mas_seeds} vs SAS {sas_seeds}")
        report = compare_models(
            [metrics_for_run(run, config.threshold, config.apache_blend_weight) for run in mas_runs],
            [metrics_for_run(run, config.threshold, config.apache_blend_weight) for run in sas_runs],
            seeds=mas_seeds,
        )
    except (RunDirectoryError, PairingError, EmptyResultsError, OSError, ValueError) as e:
        logger.error(f"❌ Cannot compare runs: {e}")
        return EXIT_DATA

    document = emit_report(report, args.format)
    if args.output:
        Path(args.output).write_text(document, encoding="utf-8")
        logger.info(f"📄 Report written to {args.output}")
    else:
        sys.stdout.write(document)
    return EXIT_OK


def cmd_score(args: argparse.Namespace) -> int:
    """Re-score transparency of persisted records with a rubric, rewriting them in place"""
    try:
        config = load_experiment_config(args.config, {
            "threshold": args.threshold,
            "apache_blend_weight": args.apache_blend,
        })
        scorer = TransparencyScorer(load_rubric(args.rubric))
    except (ConfigError, RubricError) as e:
        logger.error(f"❌ {e}")
        return EXIT_USAGE

    try:
        runs = load_runs(args.runs_dir)
        for run in runs:
            store = RunStore.open(run.directory)
            rescored = [record.rescored(scorer) for record in run.records]
            for record in rescored:
                store.save_record(record)
            metrics = metrics_from_records(rescored, config.threshold, config.apache_blend_weight)
            store.save_metrics(metrics.model_dump())
            logger.info(
                f"🔎 Re-scored {len(rescored)} records in {run.directory} | "
                f"transparency {metrics.mean_transparency:.2f}"
            )
    except (RunDirectoryError, EmptyResultsError, OSError, ValueError) as e:
        logger.error(f"❌ Cannot re-score runs: {e}")
        return EXIT_DATA
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = PipelineArgumentParser(description='ICU multi-agent prediction pipeline')
    commands = parser.add_subparsers(dest='command', required=True, parser_class=PipelineArgumentParser)

    synth = commands.add_parser('synth', help='Write a synthetic eICU-shaped cohort')
    synth.add_argument('--seed', type=int, default=0, help='RNG seed (default: 0)')
    synth.add_argument('--n', type=int, default=170, help='Number of ICU stays (default: 170)')
    synth.add_argument('--expired-fraction', type=float, default=0.5,
                       help='Share of expired stays (default: 0.5)')
    synth.add_argument('--out-dir', default='./data', help='Destination directory (default: ./data)')
    synth.set_defaults(func=cmd_synth)

    run = commands.add_parser('run', help='Run a graph over repeated balanced samples')
    run.add_argument('--config', help='JSON experiment config; flags override its values')
    run.add_argument('--data-dir', help='Directory with the cohort CSV files')
    run.add_argument('--graph', choices=['mas', 'sas'], help='Built-in graph (default: mas)')
    run.add_argument('--graph-file', help='Declarative graph document (overrides --graph)')
    run.add_argument('--runs', type=int, help='Repetitions, seeds seed..seed+runs-1 (default: 8)')
    run.add_argument('--seed', type=int, help='First seed (default: 0)')
    run.add_argument('--n-expired', type=int, help='Expired stays per sample (default: 76)')
    run.add_argument('--n-survived', type=int, help='Survived stays per sample (default: 74)')
    run.add_argument('--max-parallel', type=int, help='Patients in flight (default: 4)')
    run.add_argument('--token-budget', type=int, help='Per-prompt token budget (default: 10000)')
    run.add_argument('--threshold', type=float, help='Mortality classification threshold (default: 0.5)')
    run.add_argument('--apache-blend', type=float, help='Weight of APACHE mortality in classification')
    run.add_argument('--rubric', help='Transparency rubric JSON')
    run.add_argument('--backend', choices=['mock', 'http'], help='Model backend (default: mock)')
    run.add_argument('--base-url', help='Chat-completions base URL')
    run.add_argument('--model', help='Default model id')
    run.add_argument('--api-key-env', help='Environment variable holding the API key')
    run.add_argument('--output-dir', help='Where run directories are written (default: $OUTPUT_DIR or ./runs)')
    run.set_defaults(func=cmd_run)

    compare = commands.add_parser('compare', help='Compare persisted MAS and SAS runs')
    compare.add_argument('--mas-dir', required=True, help='Directory holding the MAS runs')
    compare.add_argument('--sas-dir', required=True, help='Directory holding the SAS runs')
    compare.add_argument('--mas-label', default='MAS', help='Graph label of the MAS runs (default: MAS)')
    compare.add_argument('--sas-label', default='SAS', help='Graph label of the SAS runs (default: SAS)')
    compare.add_argument('--format', choices=['json', 'csv', 'markdown'], default='markdown',
                         help='Report format (default: markdown)')
    compare.add_argument('--output', help='Write the report here instead of stdout')
    compare.add_argument('--config', help='JSON experiment config (threshold, blend weight)')
    compare.add_argument('--threshold', type=float, help='Mortality classification threshold')
    compare.add_argument('--apache-blend', type=float, help='Weight of APACHE mortality in classification')
    compare.set_defaults(func=cmd_compare)

    score = commands.add_parser('score', help='Re-score transparency of persisted records')
    score.add_argument('--runs-dir', required=True, help='Directory holding run directories')
    score.add_argument('--rubric', help='Transparency rubric JSON (default rubric if omitted)')
    score.add_argument('--config', help='JSON experiment config (threshold, blend weight)')
    score.add_argument('--threshold', type=float, help='Mortality classification threshold')
    score.add_argument('--apache-blend', type=float, help='Weight of APACHE mortality in classification')
    score.set_defaults(func=cmd_score)

    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    """Main entry point"""
    args = build_parser().parse_args(argv)
    if args.command != 'run':
        setup_logging(get_settings().log_level)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
