import json
import logging
from dataclasses import dataclass, field
from itertools import product
from pathlib import Path
from typing import Callable

import numpy as np

from multiband_bcs.exceptions import InvalidArguments, NoAttraction, NumericalError, TcNotFound
from multiband_bcs.models.physics import ModelInstance
from multiband_bcs.numerics.analysis import asymptotic_report, run_sweep
from multiband_bcs.numerics.checks import run_checks
from multiband_bcs.numerics.fermi_operator import intra_band_minimum, perturbation_constants, v_coefficient
from multiband_bcs.numerics.gap import euler_lagrange_residual, free_energy_density, solve_gap
from multiband_bcs.numerics.kernels import build_grid
from multiband_bcs.numerics.spectral import critical_temperature, kappa_thresholds
from multiband_bcs.schemas.models import (
    AsymptoticReport,
    BandMinimum,
    ConstantsReport,
    GapSummary,
    RunConfig,
    RunSummary,
    SweepRecord,
    TcResultList,
    VerdictStatus,
)
from multiband_bcs.settings import Settings
from multiband_bcs.utils.action import ActionLogger
from multiband_bcs.utils.io import atomic_write, emit_csv, gap_csv, write_json, write_plot_data


logger = logging.getLogger(__name__)

REPORT_LAMBDAS = (0.4, 0.3, 0.25, 0.2)
REPORT_KAPPAS = tuple(float(sign * kappa) for sign in (-1, 1) for kappa in np.linspace(0.02, 0.2, 10))


@dataclass
class RunContext:
    config: RunConfig
    model: ModelInstance
    opts: Settings
    out: Path
    artifacts: list[str] = field(default_factory=list)

    @property
    def run_id(self) -> str:
        return self.model.name or self.config.model_path.stem

    @property
    def workers(self) -> int:
        return self.config.workers or self.opts.BCS_NUM_WORKERS

    def written(self, path: Path) -> None:
        self.artifacts.append(path.name)
        ActionLogger.log_event(self.run_id, "artifact_written", {"path": str(path)})


def _lambdas(ctx: RunContext, default=None) -> list[float]:
    if ctx.config.lambdas:
        return ctx.config.lambdas
    if default is None:
        raise InvalidArguments(f"{ctx.config.command} needs at least one --lambda value")
    return list(default)


def _kappas(ctx: RunContext, default=(0.0,)) -> list[float]:
    return ctx.config.kappas or list(default)


def finish(ctx: RunContext, code: int, **fields) -> int:
    status = {0: "ok", 2: "partial"}.get(code, "error")
    summary = RunSummary(
        run_id=ctx.run_id,
        command=ctx.config.command,
        status=status,
        exit_code=code,
        model=ctx.model.to_config(),
        artifacts=[*ctx.artifacts, "summary.json"],
        **fields,
    )
    write_json(ctx.out / "summary.json", summary)
    return code


def _plot_files(ctx: RunContext, records: list[SweepRecord]) -> None:
    """κ vs λ·log-ratio per λ and λ vs λ·log T_c per κ"""
    unique = {(r.lambda_, r.kappa): r for r in records if r.tc_found}
    for lam in sorted({lam for lam, _ in unique}):
        rows = sorted((k, r.log_ratio) for (l_, k), r in unique.items() if l_ == lam and r.log_ratio is not None)
        if rows:
            path = ctx.out / f"enhancement_lambda_{lam:g}.dat"
            ctx.written(write_plot_data(path, ("kappa", "lambda_log_ratio"), *zip(*rows)))
    for kappa in sorted({kappa for _, kappa in unique}):
        rows = sorted((lam, lam * np.log(r.tc)) for (lam, k), r in unique.items() if k == kappa)
        path = write_plot_data(ctx.out / f"tc_kappa_{kappa:g}.dat", ("lambda", "lambda_log_tc"), *zip(*rows))
        ctx.written(path)


def _sweep_artifacts(ctx: RunContext, records: list[SweepRecord]) -> int:
    ctx.written(emit_csv(records, ctx.out / "sweep.csv"))
    _plot_files(ctx, records)
    failed = [r for r in records if r.error]
    for record in failed:
        ActionLogger.log_event(
            ctx.run_id, "point_failed", {"lambda": record.lambda_, "kappa": record.kappa, "error": record.error}
        )
    return len(failed)


def tc_command(ctx: RunContext) -> int:
    results, failed = [], 0
    for lam, kappa in product(_lambdas(ctx), _kappas(ctx)):
        try:
            result = critical_temperature(ctx.model, lam, kappa, ctx.opts)
        except NumericalError as e:
            failed += 1
            ActionLogger.log_event(ctx.run_id, "point_failed", {"lambda": lam, "kappa": kappa, "error": e.eng})
            continue
        print(result.model_dump_json(by_alias=True, exclude={"min_eig_trajectory"}))
        results.append(result)
    ctx.written(write_json(ctx.out / "tc.json", TcResultList(results)))
    return finish(ctx, 2 if failed else 0, n_records=len(results), n_failed=failed)


def sweep_command(ctx: RunContext) -> int:
    if not ctx.config.kappas:
        raise InvalidArguments("sweep needs a kappa grid")
    records = run_sweep(ctx.model, _lambdas(ctx), ctx.config.kappas, ctx.opts, workers=ctx.workers, run_id=ctx.run_id)
    failed = _sweep_artifacts(ctx, records)
    return finish(ctx, 2 if failed else 0, n_records=len(records), n_failed=failed)


def gap_command(ctx: RunContext) -> int:
    model, opts = ctx.model, ctx.opts
    lam, kappa = _lambdas(ctx)[0], _kappas(ctx)[0]
    tc = None
    T = ctx.config.temperature
    if T is None:
        result = critical_temperature(model, lam, kappa, opts)
        if not result.found:
            raise TcNotFound(lam, kappa)
        tc = result.tc
        T = ctx.config.t_fraction * tc
    grid = build_grid(model, T, opts)
    solution = solve_gap(model, grid, T, lam, kappa, opts=opts, tc_hint=tc)
    summary = GapSummary(
        lambda_=lam,
        kappa=kappa,
        T=T,
        tc=tc,
        converged=solution.converged,
        trivial=solution.is_trivial(opts),
        residual=solution.residual,
        iterations=solution.iterations,
        restarts=solution.restarts,
        grid_points=grid.size,
        max_delta=[float(np.max(np.abs(solution.band_values(a)))) for a in range(model.n_bands)],
        free_energy=free_energy_density(model, grid, T, lam, kappa, solution, opts),
        euler_lagrange_residual=euler_lagrange_residual(model, grid, T, lam, kappa, solution, opts),
    )
    print(summary.model_dump_json(by_alias=True))
    ctx.written(atomic_write(ctx.out / "gap.csv", gap_csv(model, solution)))
    ctx.written(write_json(ctx.out / "gap.json", summary))
    return finish(ctx, 0, n_records=1)


def constants_command(ctx: RunContext) -> int:
    model, opts = ctx.model, ctx.opts
    minima = [intra_band_minimum(model, a, opts=opts) for a in range(model.n_bands)]
    report = ConstantsReport(
        run_id=ctx.run_id,
        band_minima=[BandMinimum(band=a + 1, e=e, channel=ell) for a, (e, ell) in enumerate(minima)],
        v_matrix=[[v_coefficient(model, a, b) for b in range(model.n_bands)] for a in range(model.n_bands)],
        thresholds=[kappa_thresholds(model, lam, opts) for lam in ctx.config.lambdas],
    )
    code = 0
    try:
        report.constants = perturbation_constants(model, opts=opts)
    except NoAttraction as e:
        logger.warning(e.eng)
        code = 2
    print(report.model_dump_json(by_alias=True, indent=2))
    ctx.written(write_json(ctx.out / "constants.json", report))
    return finish(ctx, code)


def _report_text(report: AsymptoticReport) -> str:
    lines = [f"run {report.run_id}", ""]
    if report.constants is not None:
        lines.append("constants: " + json.dumps(report.constants.model_dump(exclude_none=True)))
    for thresholds in report.thresholds:
        lines.append(
            f"lambda={thresholds.lambda_:g}: kappa_c- = {thresholds.kappa_minus}, kappa_c+ = {thresholds.kappa_plus}"
            f" ({thresholds.status.value})"
        )
    lines += ["", f"{'claim':<40} {'status':<8} detail"]
    lines += [f"{v.claim:<40} {v.status.value:<8} {v.detail}" for v in report.verdicts]
    if report.fits:
        lines += ["", f"{'branch':<14} {'side':>4} {'lambda':>8} {'window':>18} {'slope':>12} {'prediction':>12}"]
        for fit in report.fits:
            window = f"[{fit.fit_window[0]:.3g}, {fit.fit_window[1]:.3g}]"
            prediction = "" if fit.prediction is None else f"{fit.prediction:12.6g}"
            lines.append(
                f"{fit.branch.value:<14} {fit.side:>4} {fit.lambda_:>8g} {window:>18} {fit.slope:12.6g} {prediction}"
            )
    if report.gaps:
        lines += ["", "gaps:"] + [f"  {gap}" for gap in report.gaps]
    return "\n".join(lines) + "\n"


def report_command(ctx: RunContext) -> int:
    lambdas = _lambdas(ctx, REPORT_LAMBDAS)
    kappas = _kappas(ctx, REPORT_KAPPAS)
    report, records = asymptotic_report(ctx.model, lambdas, kappas, ctx.opts, workers=ctx.workers, run_id=ctx.run_id)
    failed = _sweep_artifacts(ctx, records)
    ctx.written(write_json(ctx.out / "report.json", report))
    text = _report_text(report)
    print(text, end="")
    ctx.written(atomic_write(ctx.out / "report.txt", text))
    failing = [v.claim for v in report.verdicts if v.status == VerdictStatus.FAIL]
    if failing:
        logger.warning(f"Claims not reproduced: {', '.join(failing)}")
    return finish(ctx, 2 if failed else 0, n_records=len(records), n_failed=failed, verdicts=report.verdicts)


def check_command(ctx: RunContext) -> int:
    results = run_checks(ctx.model, ctx.opts)
    for result in results:
        print(result.model_dump_json())
    failed = sum(not result.passed for result in results)
    return finish(ctx, 2 if failed else 0, n_records=len(results), n_failed=failed, checks=results)


COMMANDS: dict[str, tuple[Callable[[RunContext], int], str]] = {
    "tc": (tc_command, "critical temperature for every (lambda, kappa) pair"),
    "sweep": (sweep_command, "T_c over a lambda x kappa grid, written as CSV"),
    "gap": (gap_command, "gap equation at a temperature or a fraction of T_c"),
    "constants": (constants_command, "Fermi-surface constants and inter-band thresholds"),
    "report": (report_command, "sweeps, enhancement fits and verdicts"),
    "check": (check_command, "built-in invariant suite"),
}
