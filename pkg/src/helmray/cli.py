"""Command line: ``run``, ``validate`` and ``figure``.

Exit codes: 0 success, 2 configuration error, 3 numerical failure
(caustic, energy drift, escape, ...), 4 I/O failure.
"""

from __future__ import annotations

import argparse
import logging
import math
import sys
import warnings
from dataclasses import replace
from pathlib import Path

from . import bohm
from .config import ComparatorConfig, RunConfig, load_run_config, serialize_run_config
from .errors import ConfigError, HelmrayError
from .output import read_trajectories, render_figure, write_trajectories
from .potentials import PotentialField
from .scenarios import ScenarioKind, TrajectoryBundle, run_scenario
from .units import make_unit_system

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NUMERICAL = 3
EXIT_IO = 4

TRAJECTORY_FILE = "trajectories.csv"
COMPARATOR_FILE = "comparator.csv"
FIGURE_FILE = "trajectories.svg"
CONFIG_ECHO_FILE = "run.cfg"

log = logging.getLogger("helmray")


def run_comparator(cc: ComparatorConfig, lambda0_over_w0: float) -> TrajectoryBundle:
    """Evolve the configured initial state and trace Bohm paths from the seeds."""
    u = make_unit_system(lambda0_over_w0)
    V = PotentialField.free()
    half = 0.5 * cc.box_length
    if cc.initial == "packet":
        grid = bohm.gaussian_packet(-half, half, cc.n_points, cc.packet_x0, cc.packet_sigma, cc.packet_k)
    else:
        modes = bohm.eigenmodes(-half, half, cc.n_points, V, u, max(cc.modes))
        weight = 1.0 / math.sqrt(len(cc.modes))
        grid = bohm.superpose([replace(modes[n - 1], c_n=weight) for n in cc.modes])
    _, history = bohm.evolve_tdse(grid, V, cc.dt, cc.steps, u, history_every=cc.history_every)
    return bohm.bohm_bundle(history, cc.seeds, V, u)


def execute(cfg: RunConfig) -> dict[str, Path]:
    """Run everything the config asks for and write the outputs."""
    out = cfg.output_dir
    out.mkdir(parents=True, exist_ok=True)
    written = {"config": out / CONFIG_ECHO_FILE}
    written["config"].write_text(serialize_run_config(cfg))
    bundle = run_scenario(cfg.scenario)
    written["trajectories"] = write_trajectories(bundle, out / TRAJECTORY_FILE)
    if cfg.emit_svg:
        with warnings.catch_warnings():
            if cfg.scenario.scenario is not ScenarioKind.GAUSSIAN:
                warnings.simplefilter("ignore", UserWarning)
                log.info("no waist-line overlay for the %s scenario", cfg.scenario.scenario.value)
            written["figure"] = render_figure(bundle, bundle.units, out / FIGURE_FILE)
    if cfg.comparator is not None:
        comp = run_comparator(cfg.comparator, cfg.scenario.lambda0_over_w0)
        written["comparator"] = write_trajectories(comp, out / COMPARATOR_FILE)
    return written


def _cmd_run(args) -> int:
    cfg = load_run_config(args.config)
    if args.output_dir is not None:
        cfg = replace(cfg, output_dir=Path(args.output_dir))
    for name, path in execute(cfg).items():
        log.info("wrote %s: %s", name, path)
    return EXIT_OK


def _cmd_validate(args) -> int:
    cfg = load_run_config(args.config)
    log.info("%s: valid (%s scenario, %d rays)", args.config, cfg.scenario.scenario.value, cfg.scenario.n_rays)
    return EXIT_OK


def _cmd_figure(args) -> int:
    bundles = read_trajectories(args.csv)
    if "exact" not in bundles:
        raise ConfigError(f"{args.csv}: no ray trajectories (source=exact) to draw")
    bundle = bundles["exact"]
    target = Path(args.svg)
    if args.output_dir is not None:
        target = Path(args.output_dir) / target.name
        target.parent.mkdir(parents=True, exist_ok=True)
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        render_figure(bundle, bundle.units, target)
    for w in caught:
        log.warning("%s", w.message)
    log.info("wrote figure: %s", target)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="helmray", description="Exact wave-ray trajectories and Bohm comparison.")
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--output-dir", default=None, help="directory for outputs (overrides output.dir)")
    common.add_argument("--quiet", action="store_true", help="only report errors")
    sub = parser.add_subparsers(dest="command", required=True)
    p = sub.add_parser("run", parents=[common], help="run a configuration and write CSV/SVG outputs")
    p.add_argument("config")
    p.set_defaults(func=_cmd_run)
    p = sub.add_parser("validate", parents=[common], help="parse and range-check a configuration")
    p.add_argument("config")
    p.set_defaults(func=_cmd_validate)
    p = sub.add_parser("figure", parents=[common], help="draw the trajectory figure from a CSV")
    p.add_argument("csv")
    p.add_argument("svg")
    p.set_defaults(func=_cmd_figure)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.ERROR if args.quiet else logging.INFO,
                        format="%(levelname)s: %(message)s", stream=sys.stderr, force=True)
    try:
        return args.func(args)
    except ConfigError as exc:
        log.error("configuration error: %s", exc)
        return EXIT_CONFIG
    except (HelmrayError, ArithmeticError) as exc:
        log.error("numerical error: %s", exc)
        return EXIT_NUMERICAL
    except OSError as exc:
        log.error("I/O error: %s", exc)
        return EXIT_IO
