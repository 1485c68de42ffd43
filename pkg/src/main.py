import argparse
import json
import logging
import sys
from pathlib import Path
from typing import Any, Optional

from pydantic import ValidationError

from src.converter import DataConverter
from src.crud import CreateData, ReadData
from src.exceptions import FucikError
from src.load_env import log_level, output_dir, thread_num
from src.models.run_models import Command, RunConfig
from src.routers import analysis, solve
from src.routers.command_router import CommandRouter

DEFAULT_CONFIG = Path(__file__).with_name("config.json")

router = CommandRouter()
router.include_router(analysis.analysis_router)
router.include_router(solve.solve_router)


def get_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", type=Path, help="JSON file with defaults for any flag")
    common.add_argument("--p", type=float)
    common.add_argument("--nodes", type=int, help="interior mesh nodes")
    common.add_argument("--left", type=float)
    common.add_argument("--right", type=float)
    common.add_argument("--eps-reg", dest="eps_reg", type=float)
    common.add_argument("--tol", type=float)
    common.add_argument("--beads", type=int)
    common.add_argument("--grad-tol", dest="grad_tol", type=float)
    common.add_argument("--s", type=float)
    common.add_argument("--s-max", dest="s_max", type=float)
    common.add_argument("--s-grid", dest="s_grid", type=float, nargs="+")
    common.add_argument("--a", type=float)
    common.add_argument("--b", type=float)
    common.add_argument("--a0", type=float)
    common.add_argument("--b0", type=float)
    common.add_argument("--t-small", dest="t_small", type=float)
    common.add_argument("--t-large", dest="t_large", type=float)
    common.add_argument("--restarts", type=int)
    common.add_argument("--spectrum", type=Path)
    common.add_argument("--seed", type=int)
    common.add_argument("--threads", dest="thread_num", type=int)
    common.add_argument("--output-dir", dest="output_dir", type=Path)

    parser = argparse.ArgumentParser(description="Fucik spectrum toolkit for the 1D p-Laplacian")
    commands = parser.add_subparsers(dest="command", required=True)
    for command in Command:
        commands.add_parser(command.value, parents=[common])
    return parser


def merge_config(args: argparse.Namespace) -> dict[str, Any]:
    """flags > --config file > src/config.json > environment."""
    merged: dict[str, Any] = {"thread_num": thread_num, "output_dir": output_dir}
    merged.update(ReadData.read_config(DEFAULT_CONFIG))
    if args.config is not None:
        merged.update(ReadData.read_config(args.config))
    merged.update({key: value for key, value in vars(args).items() if value is not None and key != "config"})
    return merged


def main(argv: Optional[list[str]] = None) -> int:
    parser = get_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=getattr(logging, log_level, logging.INFO))
    try:
        config = RunConfig(**merge_config(args))
    except (ValidationError, OSError, ValueError) as e:
        parser.error(str(e))
    CreateData.create_run_metadata(config.output_dir, config.command.value, DataConverter().config_hash(config.hashed()))
    try:
        return router.dispatch(config)
    except FucikError as e:
        logging.error(f"{config.command.value} failed: {e.detail}")
        print(json.dumps(e.to_dict(), indent=2))
        return e.status_code


if __name__ == "__main__":
    sys.exit(main())
