"""T_c sweeps, enhancement-law fits and the per-claim report"""

from __future__ import annotations

import logging
from concurrent.futures import ProcessPoolExecutor
from itertools import groupby

import numpy as np

from multiband_bcs.exceptions import BcsError, BranchMismatch, InsufficientData, NoAttraction, NumericalError
from multiband_bcs.models.physics import ModelInstance
from multiband_bcs.schemas.models import (
    AsymptoticReport,
    EnhancementFit,
    FitBranch,
    KappaThresholds,
    PerturbationConstants,
    SweepRecord,
    TcResult,
    TwoBandPoint,
    Verdict,
    VerdictStatus,
)
from multiband_bcs.settings import Settings, get_settings

from .fermi_operator import perturbation_constants, v_min_two_band
from .spectral import critical_temperature, kappa_thresholds


logger = logging.getLogger(__name__)

LAW_TOLERANCE = 0.15
SYMMETRY_TOLERANCE = 0.05
TWO_BAND_TOLERANCE = 0.10


def _tc_point(model: ModelInstance, lam: float, kappa: float, opts: Settings) -> TcResult | str:
    try:
        return critical_temperature(model, lam, kappa, opts)
    except NumericalError as e:
        logger.warning(f"T_c failed at lambda={lam}, kappa={kappa}: {e.eng}")
        return e.eng


def sweep_points(lambdas, kappas) -> list[tuple[float, float]]:
    """Canonical order: a κ = 0 reference point first for every λ, then the κ grid as given"""
    return [(float(lam), float(kappa)) for lam in lambdas for kappa in [0.0, *kappas]]


def run_sweep(
    model: ModelInstance,
    lambdas,
    kappas,
    opts: Settings | None = None,
    *,
    workers: int | None = None,
    run_id: str | None = None,
) -> list[SweepRecord]:
    """T_c over the λ × κ grid plus one κ = 0 reference row per λ, sorted by (λ, κ)"""
    opts = opts or get_settings()
    workers = workers or opts.BCS_NUM_WORKERS
    run_id = run_id or model.name or "model"
    points = sweep_points(lambdas, kappas)
    args = ([model] * len(points), [lam for lam, _ in points], [kappa for _, kappa in points], [opts] * len(points))
    if workers == 1:
        results = list(map(_tc_point, *args))
    else:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_tc_point, *args))

    reference: dict[float, TcResult | str] = {}
    for (lam, kappa), result in zip(points, results):
        if kappa == 0.0:
            reference.setdefault(lam, result)

    records = []
    for (lam, kappa), result in zip(points, results):
        ref = reference[lam]
        tc_ref = ref.tc if isinstance(ref, TcResult) else None
        if isinstance(result, str):
            records.append(
                SweepRecord(
                    run_id=run_id,
                    dimension=model.dimension,
                    n_bands=model.n_bands,
                    lambda_=lam,
                    kappa=kappa,
                    tc=None,
                    tc_found=False,
                    tc_ref=tc_ref,
                    error=result,
                )
            )
            continue
        log_ratio = lam * float(np.log(result.tc / tc_ref)) if result.found and tc_ref else None
        records.append(
            SweepRecord(
                run_id=run_id,
                dimension=model.dimension,
                n_bands=model.n_bands,
                lambda_=lam,
                kappa=kappa,
                tc=result.tc,
                tc_found=result.found,
                tc_ref=tc_ref,
                min_eig_at_tc=result.min_eig_at_tc,
                channel=result.channel,
                grid_points=result.grid_points,
                iterations=result.iterations,
                log_ratio=log_ratio,
            )
        )
    records.sort(key=lambda record: (record.lambda_, record.kappa))
    return records


def _branch_side(branch: FitBranch, side: int | None) -> int:
    expected = {FitBranch.LINEAR_PLUS: 1, FitBranch.LINEAR_MINUS: -1}.get(branch)
    if expected is None:
        return 0 if side is None else side
    if side not in (None, expected):
        raise BranchMismatch(branch.value)
    return expected


def fit_enhancement(
    records: list[SweepRecord],
    branch: FitBranch,
    *,
    side: int | None = None,
    window: tuple[float, float] | None = None,
    prediction: float | None = None,
    opts: Settings | None = None,
) -> EnhancementFit:
    """Zero-intercept least squares of λ·log(T_c/T_c(λ,0)) against |κ| (linear) or κ² (quadratic)"""
    opts = opts or get_settings()
    branch = FitBranch(branch)
    side = _branch_side(branch, side)
    low, high = window if window is not None else (0.0, np.inf)
    usable = [
        r
        for r in records
        if r.tc_found
        and r.log_ratio is not None
        and r.kappa != 0.0
        and (side == 0 or np.sign(r.kappa) == side)
        and low <= abs(r.kappa) <= high
    ]
    if len(usable) < opts.FIT_MIN_RECORDS:
        raise InsufficientData(branch.value, len(usable), opts.FIT_MIN_RECORDS)
    lambdas = {r.lambda_ for r in usable}
    if len(lambdas) > 1:
        raise BranchMismatch(branch.value)

    kappa = np.abs([r.kappa for r in usable])
    x = kappa**2 if branch == FitBranch.QUADRATIC else kappa
    y = np.array([r.log_ratio for r in usable])
    slope = float(x @ y / (x @ x))
    residual_norm = float(np.linalg.norm(y - slope * x))
    agreement = abs(slope - prediction) / abs(prediction) if prediction else None
    return EnhancementFit(
        branch=branch,
        side=side,
        lambda_=lambdas.pop(),
        slope=slope,
        fit_window=(float(kappa.min()), float(kappa.max())),
        residual_norm=residual_norm,
        slope_error=residual_norm / float(np.linalg.norm(x)),
        n_records=len(usable),
        prediction=prediction,
        agreement=agreement,
    )


def calibrate_t0(model: ModelInstance, kappa: float, lam_ref: float | None = None, opts: Settings | None = None):
    """T0 such that T0·exp(1/(λ_ref 𝔳_min(κ))) reproduces the computed T_c(λ_ref, κ)"""
    opts = opts or get_settings()
    lam_ref = opts.LAMBDA_REF if lam_ref is None else lam_ref
    v_min = v_min_two_band(model, kappa)
    if v_min >= 0:
        raise NoAttraction(v_min)
    result = critical_temperature(model, lam_ref, kappa, opts)
    if not result.found:
        raise InsufficientData("two_band", 0, 1)
    return result.tc * float(np.exp(-1.0 / (lam_ref * v_min)))


def two_band_prediction(model: ModelInstance, lam: float, kappa: float, t0_fit: float) -> float | None:
    """T0·exp(1/(λ 𝔳_min(κ))); None stands for the categorical T_c = 0 of 𝔳_min(κ) ≥ 0"""
    v_min = v_min_two_band(model, kappa)
    if v_min >= 0:
        logger.info(f"v_min({kappa}) = {v_min} ≥ 0: T_c vanishes for small lambda")
        return None
    return t0_fit * float(np.exp(1.0 / (lam * v_min)))


def _by_lambda(records: list[SweepRecord]) -> dict[float, list[SweepRecord]]:
    return {lam: list(group) for lam, group in groupby(records, key=lambda r: r.lambda_)}


def monotonicity_verdict(records: list[SweepRecord], opts: Settings) -> Verdict:
    """T_c(λ, κ) ≥ T_c(λ, 0) must hold; growth in |κ| along each sign is only flagged"""
    slack = 2.0 * opts.BISECT_TOL
    failures, flags = [], []
    for lam, group in _by_lambda(records).items():
        tc_ref = next((r.tc for r in group if r.kappa == 0.0 and r.tc_found), 0.0)
        for record in group:
            tc = record.tc if record.tc_found else 0.0
            if record.error is None and tc < tc_ref * (1.0 - slack):
                failures.append(f"lambda={lam}, kappa={record.kappa}")
        for sign in (-1.0, 1.0):
            branch = [r for r in group if np.sign(r.kappa) == sign and r.error is None]
            branch.sort(key=lambda r: abs(r.kappa))
            for inner, outer in zip(branch, branch[1:]):
                tc_inner = inner.tc if inner.tc_found else 0.0
                tc_outer = outer.tc if outer.tc_found else 0.0
                if tc_inner > tc_outer * (1.0 + slack):
                    flags.append(f"lambda={lam}, kappa {inner.kappa} -> {outer.kappa}")
    if failures:
        return Verdict(claim="monotone_enhancement", status=VerdictStatus.FAIL, detail="; ".join(failures))
    if flags:
        return Verdict(claim="monotone_enhancement", status=VerdictStatus.FLAGGED, detail="; ".join(flags))
    return Verdict(claim="monotone_enhancement", status=VerdictStatus.PASS)


def _law_fits(
    records: list[SweepRecord], branch: FitBranch, side: int, prediction: float | None, opts: Settings, gaps: list
) -> list[EnhancementFit]:
    """Fit on the full κ window and on its lower half"""
    fits = []
    try:
        full = fit_enhancement(records, branch, side=side, prediction=prediction, opts=opts)
    except NumericalError as e:
        gaps.append(e.eng)
        return fits
    fits.append(full)
    try:
        fits.append(
            fit_enhancement(
                records,
                branch,
                side=side,
                window=(0.0, 0.5 * full.fit_window[1]),
                prediction=prediction,
                opts=opts,
            )
        )
    except NumericalError as e:
        gaps.append(f"half window: {e.eng}")
    return fits


def _law_verdict(claim: str, fits: list[EnhancementFit]) -> Verdict:
    full = [fit for fit in fits if fit.agreement is not None]
    if not full:
        return Verdict(claim=claim, status=VerdictStatus.SKIPPED, detail="no usable fit")
    worst = max(fit.agreement for fit in full)
    detail = ", ".join(
        f"{fit.branch.value}({fit.side:+d}) slope={fit.slope:.6g} vs {fit.prediction:.6g}" for fit in full
    )
    status = VerdictStatus.PASS if worst <= LAW_TOLERANCE else VerdictStatus.FAIL
    return Verdict(claim=claim, status=status, detail=detail)


def sign_symmetry_verdict(claim: str, fits: list[EnhancementFit], expected: bool = True) -> Verdict | None:
    """Widest-window slopes for κ > 0 and κ < 0 agree within their fit errors or SYMMETRY_TOLERANCE"""
    widest: dict[int, EnhancementFit] = {}
    for fit in fits:
        if fit.side not in widest or fit.fit_window[1] > widest[fit.side].fit_window[1]:
            widest[fit.side] = fit
    if 1 not in widest or -1 not in widest:
        return None
    plus, minus = widest[1], widest[-1]
    difference = abs(plus.slope - minus.slope)
    tolerance = max(plus.slope_error + minus.slope_error, SYMMETRY_TOLERANCE * max(abs(plus.slope), abs(minus.slope)))
    if not expected:
        status = VerdictStatus.SKIPPED
    else:
        status = VerdictStatus.PASS if difference <= tolerance else VerdictStatus.FAIL
    detail = f"slopes {plus.slope:.6g} and {minus.slope:.6g}, difference {difference:.3g}, tolerance {tolerance:.3g}"
    return Verdict(claim=claim, status=status, detail=detail)


def _two_band_points(
    model: ModelInstance, records: list[SweepRecord], opts: Settings, gaps: list
) -> list[TwoBandPoint]:
    points, seen = [], set()
    for kappa in sorted({r.kappa for r in records}):
        try:
            t0 = calibrate_t0(model, kappa, opts.LAMBDA_REF, opts)
        except NumericalError as e:
            gaps.append(f"two-band calibration at kappa={kappa}: {e.eng}")
            continue
        for record in records:
            if record.kappa != kappa or record.lambda_ == opts.LAMBDA_REF or (record.lambda_, kappa) in seen:
                continue
            seen.add((record.lambda_, kappa))
            predicted = two_band_prediction(model, record.lambda_, kappa, t0)
            error = None
            if predicted is not None and record.tc_found:
                error = abs(np.log(record.tc / t0) / np.log(predicted / t0) - 1.0)
            points.append(
                TwoBandPoint(
                    lambda_=record.lambda_,
                    kappa=kappa,
                    tc=record.tc,
                    tc_predicted=predicted,
                    relative_error=error,
                )
            )
    return points


def _two_band_verdict(points: list[TwoBandPoint]) -> Verdict:
    details, status = [], VerdictStatus.PASS
    for kappa in sorted({p.kappa for p in points}):
        ladder = [p for p in points if p.kappa == kappa and p.relative_error is not None]
        ladder.sort(key=lambda p: -p.lambda_)
        if not ladder:
            continue
        errors = [p.relative_error for p in ladder]
        if errors[-1] > TWO_BAND_TOLERANCE:
            status = VerdictStatus.FAIL
        elif any(b > a for a, b in zip(errors, errors[1:])) and status == VerdictStatus.PASS:
            status = VerdictStatus.FLAGGED
        details.append(f"kappa={kappa}: " + ", ".join(f"{p.lambda_}:{p.relative_error:.3g}" for p in ladder))
    if not details:
        return Verdict(claim="two_band_closed_form", status=VerdictStatus.SKIPPED, detail="no comparable points")
    return Verdict(claim="two_band_closed_form", status=status, detail="; ".join(details))


def asymptotic_report(
    model: ModelInstance,
    lambdas,
    kappas,
    opts: Settings | None = None,
    *,
    workers: int | None = None,
    run_id: str | None = None,
) -> tuple[AsymptoticReport, list[SweepRecord]]:
    """Sweep, constants, thresholds, fits and a verdict per claim; failures become gaps, not errors"""
    opts = opts or get_settings()
    run_id = run_id or model.name or "model"
    records = run_sweep(model, lambdas, kappas, opts, workers=workers, run_id=run_id)
    gaps = [f"lambda={r.lambda_}, kappa={r.kappa}: {r.error}" for r in records if r.error]

    constants: PerturbationConstants | None = None
    try:
        constants = perturbation_constants(model, opts=opts)
    except NoAttraction as e:
        gaps.append(e.eng)

    thresholds: list[KappaThresholds] = []
    for lam in lambdas:
        try:
            thresholds.append(kappa_thresholds(model, lam, opts))
        except BcsError as e:
            gaps.append(f"thresholds at lambda={lam}: {e.eng}")

    verdicts = [monotonicity_verdict(records, opts)]
    fits: list[EnhancementFit] = []
    if model.interactions.is_decoupled:
        flat = all(r.log_ratio is None or abs(r.log_ratio) <= 2.0 * opts.BISECT_TOL for r in records)
        infinite = all(t.kappa_minus is None and t.kappa_plus is None for t in thresholds)
        verdicts.append(
            Verdict(
                claim="decoupled",
                status=VerdictStatus.PASS if flat and infinite else VerdictStatus.FAIL,
                detail="enhancement zero, thresholds infinite",
            )
        )
    elif constants is not None:
        for lam, group in _by_lambda(records).items():
            if constants.degenerate:
                linear = _law_fits(group, FitBranch.LINEAR_PLUS, 1, constants.A1_plus, opts, gaps)
                linear += _law_fits(group, FitBranch.LINEAR_MINUS, -1, constants.A1_minus, opts, gaps)
                fits += linear
                verdicts.append(_law_verdict(f"linear_law(lambda={lam})", linear))
                expect_equal = np.isclose(constants.A1_plus, constants.A1_minus, rtol=1e-8)
                verdict = sign_symmetry_verdict(f"linear_sign_symmetry(lambda={lam})", linear, expect_equal)
                if verdict is not None:
                    verdicts.append(verdict)
            else:
                quadratic = _law_fits(group, FitBranch.QUADRATIC, 1, constants.A2, opts, gaps)
                quadratic += _law_fits(group, FitBranch.QUADRATIC, -1, constants.A2, opts, gaps)
                fits += quadratic
                verdicts.append(_law_verdict(f"quadratic_law(lambda={lam})", quadratic))
                verdict = sign_symmetry_verdict(f"quadratic_sign_symmetry(lambda={lam})", quadratic)
                if verdict is not None:
                    verdicts.append(verdict)

    two_band: list[TwoBandPoint] = []
    if model.n_bands == 2 and not model.interactions.is_decoupled:
        two_band = _two_band_points(model, records, opts, gaps)
        verdicts.append(_two_band_verdict(two_band))

    report = AsymptoticReport(
        run_id=run_id,
        constants=constants,
        thresholds=thresholds,
        fits=fits,
        two_band=two_band,
        verdicts=verdicts,
        gaps=gaps,
    )
    return report, records
