"""Command line interface.

Subcommands: ``stage1``, ``stage2``, ``pipeline``, ``sweep``, ``config init``.
Exit codes: 0 success, 1 validation/config error, 2 I/O error, 3 internal
invariant violation or unexpected failure.
"""

from __future__ import annotations

import logging
import sys
from pathlib import Path

import click

from .config import default_config_yaml, load_config
from .errors import InputIOError, InvariantViolation, ValidationError
from .pipeline import load_selection_json, run_pipeline, run_stage1, run_stage2, run_sweep

logger = logging.getLogger("minesite")

EXIT_OK = 0
EXIT_VALIDATION = 1
EXIT_IO = 2
EXIT_INTERNAL = 3


def _setup_logging() -> None:
    logging.basicConfig(
        level=logging.INFO,
        format="%(levelname)s %(name)s: %(message)s",
        stream=sys.stderr,
    )


config_option = click.option(
    "--config", "config_path", required=True, type=click.Path(), help="Run config YAML."
)
out_option = click.option(
    "--out", "out_dir", default=None, type=click.Path(), help="Output directory (overrides config)."
)
threads_option = click.option(
    "--threads", default=1, show_default=True, type=int, help="Row-band workers for screening."
)


def _resolve_out(config, out_dir: str | None) -> Path:
    return Path(out_dir) if out_dir is not None else Path(config.output_dir)


@click.group()
def cli() -> None:
    """Two-stage site selection for surplus-powered mining farms."""


@cli.command("stage1")
@config_option
@out_option
@threads_option
def cmd_stage1(config_path: str, out_dir: str | None, threads: int) -> None:
    """Select the profit-maximizing region set and write the per-K table."""
    config = load_config(config_path)
    config.validate_paths()
    result, outputs = run_stage1(config, _resolve_out(config, out_dir))
    click.echo(f"K*={result.k_star} regions={','.join(result.regions_star)} "
               f"pi_max_usd={result.pi_max_usd:.2f}")
    for path in outputs:
        click.echo(f"wrote {path}")


@cli.command("stage2")
@config_option
@out_option
@threads_option
@click.option(
    "--selection",
    "selection_path",
    default=None,
    type=click.Path(),
    help="Stage-1 selection.json (default: <out>/stage1/selection.json).",
)
@click.option(
    "--regions",
    "regions_arg",
    default=None,
    help="Comma-separated region codes; overrides --selection.",
)
def cmd_stage2(
    config_path: str,
    out_dir: str | None,
    threads: int,
    selection_path: str | None,
    regions_arg: str | None,
) -> None:
    """Screen the selected regions' rasters into candidate-site GeoJSON."""
    config = load_config(config_path)
    config.validate_paths()
    out = _resolve_out(config, out_dir)
    if regions_arg:
        codes = [c.strip() for c in regions_arg.split(",") if c.strip()]
    else:
        path = Path(selection_path) if selection_path else out / "stage1" / "selection.json"
        if not path.exists():
            raise ValidationError(
                f"no stage-1 selection at {path}; run stage1 first or pass --regions"
            )
        _, codes = load_selection_json(path)
    results, outputs = run_stage2(config, codes, out, n_workers=threads)
    for r in sorted(results, key=lambda r: r.region_code):
        click.echo(
            f"{r.region_code}: initial={r.initial_count} available={r.available_count}"
        )
    for path in outputs:
        click.echo(f"wrote {path}")


@cli.command("pipeline")
@config_option
@out_option
@threads_option
def cmd_pipeline(config_path: str, out_dir: str | None, threads: int) -> None:
    """Run stage 1 then stage 2 and write a run manifest."""
    config = load_config(config_path)
    config.validate_paths()
    out = _resolve_out(config, out_dir)
    manifest = run_pipeline(config, out, n_workers=threads, config_path=str(config_path))
    click.echo(f"wrote {out / 'manifest.json'} "
               f"({sum(1 for s in manifest.stages if s.status == 'complete')} stages complete)")


@cli.command("sweep")
@config_option
@out_option
@threads_option
def cmd_sweep(config_path: str, out_dir: str | None, threads: int) -> None:
    """Re-run stage 1 across a parameter range and tabulate K*, max profit."""
    config = load_config(config_path)
    config.validate_paths()
    path = run_sweep(config, _resolve_out(config, out_dir))
    click.echo(f"wrote {path}")


@cli.group("config")
def cmd_config() -> None:
    """Configuration helpers."""


@cmd_config.command("init")
@click.option(
    "--out",
    "out_path",
    default="config.yaml",
    show_default=True,
    type=click.Path(),
    help="Where to write the default config (file or directory).",
)
def cmd_config_init(out_path: str) -> None:
    """Write a fully commented default configuration file."""
    path = Path(out_path)
    if path.is_dir():
        path = path / "config.yaml"
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(default_config_yaml(), encoding="utf-8")
    click.echo(f"wrote {path}")


def main(argv: list[str] | None = None) -> int:
    """Entry point mapping failures onto the documented exit codes."""
    _setup_logging()
    try:
        cli.main(args=argv, standalone_mode=False)
    except (ValidationError,) as exc:
        logger.error("%s", exc)
        return EXIT_VALIDATION
    except click.UsageError as exc:
        logger.error("%s", exc.format_message())
        return EXIT_VALIDATION
    except (InputIOError, OSError) as exc:
        logger.error("%s", exc)
        return EXIT_IO
    except click.exceptions.Exit as exc:
        return exc.exit_code
    except click.Abort:
        return EXIT_INTERNAL
    except InvariantViolation as exc:
        logger.error("internal invariant violated: %s", exc)
        return EXIT_INTERNAL
    except Exception as exc:  # pragma: no cover - last-resort guard
        logger.exception("unexpected failure: %s", exc)
        return EXIT_INTERNAL
    return EXIT_OK


def entrypoint() -> None:
    sys.exit(main())


if __name__ == "__main__":
    sys.exit(main())
