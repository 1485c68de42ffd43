import json
import logging
from datetime import datetime, timezone
from pathlib import Path
from typing import Any, Optional

import numpy as np
from pydantic import BaseModel, ValidationError
from uuid6 import uuid7

from src.converter import DataConverter
from src.exceptions import PreconditionError
from src.grid import Field
from src.models.spectrum_models import Provenance, SpectrumData

converter = DataConverter()


class CreateData:
    @staticmethod
    def create_json(record: BaseModel, path: Path) -> Path:
        """Write a record as indented JSON

        Args:
            record (BaseModel): any pydantic record
            path (Path): target file, parent directories are created

        Returns:
            Path: the written file
        """
        try:
            path.parent.mkdir(parents=True, exist_ok=True)
            path.write_text(record.model_dump_json(indent=2) + "\n", encoding="utf-8")
            logging.info(f"wrote {path}")
            return path
        except OSError as e:
            logging.error(f"Failed to write {path}: {e}")
            raise

    @staticmethod
    def create_csv(rows: np.ndarray, header: str, path: Path) -> Path:
        """Write rows as CSV with a header line

        Args:
            rows (np.ndarray): two-dimensional array
            header (str): comma separated column names
            path (Path): target file

        Returns:
            Path: the written file
        """
        try:
            path.parent.mkdir(parents=True, exist_ok=True)
            np.savetxt(path, rows, delimiter=",", header=header, comments="", fmt="%.17g")
            logging.info(f"wrote {path}")
            return path
        except OSError as e:
            logging.error(f"Failed to write {path}: {e}")
            raise

    @staticmethod
    def create_run_metadata(directory: Path, command: str, config_hash: str) -> dict[str, Any]:
        """Write run_metadata.json with a time-ordered run id and the wall-clock time

        Kept out of the artifacts so that their bytes only depend on the config.
        """
        metadata = {
            "run_id": str(uuid7()),
            "command": command,
            "config_hash": config_hash,
            "started_at": datetime.now(timezone.utc).isoformat(),
        }
        try:
            directory.mkdir(parents=True, exist_ok=True)
            (directory / "run_metadata.json").write_text(json.dumps(metadata, indent=2) + "\n", encoding="utf-8")
        except OSError as e:
            logging.error(f"Failed to write run metadata: {e}")
            raise
        return metadata


class ReadData:
    @staticmethod
    def read_spectrum(path: Path, expected: Optional[Provenance] = None) -> SpectrumData:
        """Read a spectrum file written by the curve command

        Raises:
            PreconditionError: missing, unreadable or mismatched spectrum file
        """
        try:
            return converter.spectrum_from_json(path.read_text(encoding="utf-8"), expected)
        except OSError as e:
            logging.error(f"Failed to read spectrum {path}: {e}")
            raise PreconditionError(f"Cannot read spectrum file {path}: {e}")
        except (ValidationError, ValueError) as e:
            logging.error(f"Invalid spectrum file {path}: {e}")
            raise PreconditionError(f"Invalid spectrum file {path}: {e}")

    @staticmethod
    def read_config(path: Path) -> dict[str, Any]:
        with path.open(encoding="utf-8") as handle:
            config = json.load(handle)
        if not isinstance(config, dict):
            raise ValueError(f"{path} must hold a JSON object.")
        return config

    @staticmethod
    def read_field(path: Path) -> Field:
        """Read a field file written next to the CSV dumps

        Raises:
            PreconditionError: missing or invalid field file
        """
        try:
            return converter.field_from_json(path.read_text(encoding="utf-8"))
        except OSError as e:
            logging.error(f"Failed to read field {path}: {e}")
            raise PreconditionError(f"Cannot read field file {path}: {e}")
        except ValueError as e:
            logging.error(f"Invalid field file {path}: {e}")
            raise PreconditionError(f"Invalid field file {path}: {e}")
