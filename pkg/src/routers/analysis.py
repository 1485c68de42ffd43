import logging

from src.crud import CreateData, ReadData
from src.converter import CURVE_HEADER, DESCENT_HEADER, FIELD_HEADER, PATH_HEADER, SWEEP_HEADER, DataConverter
from src.eigen import compute_lambda1
from src.minimax import mountain_pass_c
from src.models.fucik_models import ShiftParam
from src.models.run_models import Command, RunConfig
from src.models.schema_models import EigReport
from src.routers.command_router import CommandRouter
from src.spectrum import classify as classify_point, default_s_grid, trace_curve

analysis_router = CommandRouter()
converter = DataConverter()


def curve_grid(config: RunConfig, lambda1: float) -> list[float]:
    """Explicit --s-grid, else the default grid cut at --s-max (which is always included)."""
    if config.s_grid is not None:
        return sorted(set(config.s_grid))
    grid = default_s_grid(lambda1)
    if config.s_max is None:
        return grid
    return [s for s in grid if s < config.s_max] + [config.s_max]


class AnalysisCommands:
    @staticmethod
    @analysis_router.route(Command.eig)
    def eig(config: RunConfig) -> int:
        """First eigenpair by sphere descent and lambda2 = c(0) by the string method."""
        domain, p = config.domain(), config.exponent()
        provenance = converter.provenance(domain, p, config.hashed())
        eig = compute_lambda1(domain, p, tol=config.tol)
        second = mountain_pass_c(ShiftParam(s=0.0), eig, config.minimax_config())
        report = EigReport(
            lambda1=eig.eigenvalue,
            lambda2=second.c,
            residuals={"lambda1": eig.residual, "lambda2": second.grad_norm_at_max},
            iterations=eig.iterations,
            provenance=provenance,
        )
        CreateData.create_json(report, config.output_dir / "eig.json")
        CreateData.create_csv(converter.field_to_rows(eig.phi.field), FIELD_HEADER, config.output_dir / "phi1.csv")
        CreateData.create_json(converter.field_to_record(eig.phi.field), config.output_dir / "phi1.json")
        CreateData.create_csv(converter.history_to_rows(eig.history), DESCENT_HEADER, config.output_dir / "descent.csv")
        print(report.model_dump_json(indent=2))
        return 0

    @staticmethod
    @analysis_router.route(Command.mpass)
    def mpass(config: RunConfig) -> int:
        domain, p = config.domain(), config.exponent()
        eig = compute_lambda1(domain, p, tol=config.tol)
        result = mountain_pass_c(ShiftParam(s=config.s), eig, config.minimax_config())
        result.provenance = converter.provenance(domain, p, config.hashed())
        CreateData.create_json(result, config.output_dir / "mpass.json")
        CreateData.create_csv(converter.sweeps_to_rows(result), SWEEP_HEADER, config.output_dir / "sweeps.csv")
        CreateData.create_csv(converter.path_to_rows(result, p), PATH_HEADER, config.output_dir / "path.csv")
        CreateData.create_csv(
            converter.field_to_rows(result.argmax_bead.field), FIELD_HEADER, config.output_dir / "saddle.csv"
        )
        CreateData.create_json(converter.field_to_record(result.argmax_bead.field), config.output_dir / "saddle.json")
        print(result.model_dump_json(indent=2, exclude={"path", "argmax_bead", "sweeps"}))
        return 0

    @staticmethod
    @analysis_router.route(Command.curve)
    def curve(config: RunConfig) -> int:
        """Trace c(s) on the grid; failed shifts are kept in the spectrum file as markers."""
        domain, p = config.domain(), config.exponent()
        eig = compute_lambda1(domain, p, tol=config.tol)
        grid = curve_grid(config, eig.eigenvalue)
        spectrum = trace_curve(eig, grid, config.minimax_config(), converter.provenance(domain, p, config.hashed()))
        CreateData.create_json(spectrum, config.output_dir / "spectrum.json")
        CreateData.create_csv(converter.curve_to_rows(spectrum), CURVE_HEADER, config.output_dir / "curve.csv")
        if spectrum.failures:
            logging.warning(f"curve: {len(spectrum.failures)} of {len(grid)} shifts failed")
        print(spectrum.model_dump_json(indent=2))
        return 0

    @staticmethod
    @analysis_router.route(Command.classify)
    def classify(config: RunConfig) -> int:
        spectrum = ReadData.read_spectrum(config.spectrum)
        prediction = classify_point(config.a, config.b, spectrum)
        prediction.provenance = spectrum.provenance
        CreateData.create_json(prediction, config.output_dir / "classify.json")
        print(prediction.model_dump_json(indent=2))
        return 0
