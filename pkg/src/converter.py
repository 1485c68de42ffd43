import hashlib
import json
from typing import Any, Optional

import numpy as np

from src import __version__
from src.grid import Field
from src.models.fucik_models import Domain, Exponent, ShiftParam
from src.models.schema_models import FieldRecord, MinimaxResult
from src.models.spectrum_models import Provenance, SpectrumData
from src.sphere import sphere_residual

FIELD_HEADER = "x,u"
PATH_HEADER = "bead,t,value,grad_norm"
CURVE_HEADER = "s,c,a,b,residual,branch"
SWEEP_HEADER = "sweep,max_value,grad_norm,argmax,reparam_defect"
DESCENT_HEADER = "iteration,value,grad_norm"


class DataConverter:
    """This class is used to convert solver records into artifact rows and JSON."""

    def config_hash(self, config: dict[str, Any]) -> str:
        """SHA-256 of the canonical JSON of a config

        Args:
            config (dict[str, Any]): JSON-compatible config

        Returns:
            str: hex digest, independent of key order
        """
        canonical = json.dumps(config, sort_keys=True, separators=(",", ":"), default=str)
        return hashlib.sha256(canonical.encode("utf-8")).hexdigest()

    def provenance(self, domain: Domain, p: Exponent, config: dict[str, Any]) -> Provenance:
        return Provenance(
            left=domain.left,
            right=domain.right,
            n_interior=domain.n_interior,
            p=p.p,
            eps_reg=p.eps_reg,
            config_hash=self.config_hash(config),
            version=__version__,
        )

    def field_to_rows(self, field: Field) -> np.ndarray:
        """Convert a field to (x, u) rows including both boundary nodes

        Args:
            field (Field): nodal field

        Returns:
            np.ndarray: shape (n_interior + 2, 2)
        """
        return np.column_stack([field.domain.all_nodes(), field.padded()])

    def field_to_record(self, field: Field) -> FieldRecord:
        return FieldRecord(domain=field.domain, values=field.values.tolist())

    def field_from_json(self, text: str) -> Field:
        """Parse a field file

        Args:
            text (str): JSON text of a FieldRecord

        Returns:
            Field: the field on the stored domain

        Raises:
            ValueError: the number of values does not match the domain
        """
        record = FieldRecord.model_validate_json(text)
        return Field(np.array(record.values, dtype=float), record.domain)

    def history_to_rows(self, history: list) -> np.ndarray:
        """(iteration, value, grad_norm) rows of a recorded descent"""
        return np.array(history, dtype=float).reshape(-1, 3)

    def path_to_rows(self, result: MinimaxResult, p: Exponent) -> np.ndarray:
        """Convert the path of a minimax result to plot-ready rows

        Args:
            result (MinimaxResult): converged or flagged minimax result
            p (Exponent): exponent of the run

        Returns:
            np.ndarray: (bead, t, value, grad_norm) rows, t the normalized energy-norm arclength
        """
        s = ShiftParam(s=result.s)
        spacings = result.path.spacings()
        arclength = np.concatenate(([0.0], np.cumsum(spacings)))
        if arclength[-1] > 0.0:
            arclength /= arclength[-1]
        rows = []
        for index, bead in enumerate(result.path.beads):
            value, residual = sphere_residual(bead.field, s, p)
            rows.append((index, arclength[index], value, residual))
        return np.array(rows, dtype=float)

    def sweeps_to_rows(self, result: MinimaxResult) -> np.ndarray:
        rows = [
            (record.sweep, record.max_value, record.grad_norm, record.argmax, record.reparam_defect)
            for record in result.sweeps
        ]
        return np.array(rows, dtype=float).reshape(-1, 5)

    def curve_to_rows(self, spectrum: SpectrumData) -> np.ndarray:
        """Convert the traced curve to rows of both branches

        Args:
            spectrum (SpectrumData): traced spectrum

        Returns:
            np.ndarray: (s, c, a, b, residual, branch) rows; branch 0 is a >= b, branch 1 its mirror
        """
        upper = [(pt.s, pt.c, pt.a, pt.b, pt.grad_residual, 0) for pt in spectrum.curve]
        lower = [(pt.s, pt.c, pt.b, pt.a, pt.grad_residual, 1) for pt in spectrum.curve]
        return np.array(upper + lower, dtype=float).reshape(-1, 6)

    def spectrum_from_json(self, text: str, expected: Optional[Provenance] = None) -> SpectrumData:
        """Parse a spectrum file

        Args:
            text (str): JSON text of a SpectrumData
            expected (Optional[Provenance]): when given, the mesh and exponent must match

        Returns:
            SpectrumData: validated spectrum

        Raises:
            ValueError: unsupported version or mismatched provenance
        """
        spectrum = SpectrumData.model_validate_json(text)
        if spectrum.version != SpectrumData.model_fields["version"].default:
            raise ValueError(f"Unsupported spectrum format version {spectrum.version}.")
        if expected is not None and spectrum.provenance is not None:
            stored = spectrum.provenance
            if (stored.n_interior, stored.p, stored.left, stored.right) != (
                expected.n_interior,
                expected.p,
                expected.left,
                expected.right,
            ):
                raise ValueError(
                    f"Spectrum was computed for p={stored.p:g}, n={stored.n_interior} on "
                    f"[{stored.left:g}, {stored.right:g}], not for this run."
                )
        return spectrum
