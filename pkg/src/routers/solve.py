import logging

from src.bvp import multiplicity_experiment
from src.check_suite import run_checks
from src.converter import FIELD_HEADER, DataConverter
from src.crud import CreateData, ReadData
from src.eigen import compute_lambda1
from src.models.run_models import Command, RunConfig
from src.routers.command_router import CommandRouter
from src.spectrum import default_s_grid, trace_curve

# Exit status of a solve run that misses a solution its scenario guarantees.
MISSING_SOLUTION_STATUS = 3

solve_router = CommandRouter()
converter = DataConverter()


class SolveCommands:
    @staticmethod
    @solve_router.route(Command.solve)
    def solve(config: RunConfig) -> int:
        """Multiplicity experiment for the model nonlinearity with slopes (a0, b0) near 0 and (a, b) at infinity.

        Without --spectrum the default curve is traced first on the same mesh.
        """
        domain, p = config.domain(), config.exponent()
        provenance = converter.provenance(domain, p, config.hashed())
        eig = compute_lambda1(domain, p, tol=config.tol)
        if config.spectrum is not None:
            spectrum = ReadData.read_spectrum(config.spectrum, expected=provenance)
        else:
            logging.info("solve: no spectrum given, tracing the default curve")
            spectrum = trace_curve(eig, default_s_grid(eig.eigenvalue), config.minimax_config(), provenance)
        report = multiplicity_experiment(
            config.ab0(), config.ab(), spectrum, domain, p, config.solve_config(), eig=eig
        )
        report.provenance = provenance
        CreateData.create_json(report, config.output_dir / "solve.json")
        for index, record in enumerate(report.solutions):
            CreateData.create_csv(
                converter.field_to_rows(record.field), FIELD_HEADER, config.output_dir / f"solution_{index}.csv"
            )
            CreateData.create_json(converter.field_to_record(record.field), config.output_dir / f"solution_{index}.json")
        print(report.model_dump_json(indent=2, exclude={"solutions": {"__all__": {"field"}}}))
        if report.missing:
            logging.error(f"solve: missing {report.missing}")
            return MISSING_SOLUTION_STATUS
        return 0

    @staticmethod
    @solve_router.route(Command.check)
    def check(config: RunConfig) -> int:
        domain, p = config.domain(), config.exponent()
        report = run_checks(domain, p, config.seed, config.minimax_config(), config.solve_config())
        report.provenance = converter.provenance(domain, p, config.hashed())
        CreateData.create_json(report, config.output_dir / "check.json")
        width = max(len(row.name) for row in report.rows)
        for row in report.rows:
            print(f"{'PASS' if row.passed else 'FAIL'}  {row.name:<{width}}  {row.value:.3e} <= {row.threshold:.3e}")
        return 0 if report.passed else 1
