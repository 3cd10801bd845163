"""Birman–Schwinger operator on the radial grid, critical temperature and inter-band thresholds"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np
from numpy.linalg import LinAlgError
from scipy.interpolate import BarycentricInterpolator
from scipy.linalg import eigh, eigvalsh
from scipy.optimize import brentq

from multiband_bcs.exceptions import BracketFailure, EigensolverFailure, GridMismatch, InvalidCoupling
from multiband_bcs.models.physics import ModelInstance, sphere_area
from multiband_bcs.schemas.models import KappaThresholds, TcResult, ThresholdStatus
from multiband_bcs.settings import Settings, get_settings

from .kernels import RadialGrid, build_grid, kernel_block, kt_symbol, valid_channels


logger = logging.getLogger(__name__)

GRID_DESIGN_FACTOR = 0.05  # first grid resolves T ≥ GRID_DESIGN_FACTOR·min μ
SCAN_STEP = 10.0


@dataclass(frozen=True)
class ChannelOperator:
    ell: int
    T: float
    lam: float
    kappa: float
    matrix: np.ndarray

    @property
    def size(self) -> int:
        return self.matrix.shape[0]


def nystrom_constant(d: int) -> float:
    """c_d = (2π)^{-d/2}|S^{d-1}|"""
    return (2.0 * np.pi) ** (-d / 2) * sphere_area(d)


@dataclass
class BirmanSchwingerAssembler:
    """Assembles channel operators on one grid; the temperature independent kernel is cached per channel"""

    model: ModelInstance
    grid: RadialGrid
    opts: Settings = field(default_factory=get_settings)
    _kernels: dict[int, np.ndarray] = field(default_factory=dict, repr=False)

    def interaction(self, ell: int) -> np.ndarray:
        """c_d √w_i K_ℓ(p_i, q_j) √w_j over all band pairs, not scaled by λ or κ"""
        if ell not in self._kernels:
            grid = self.grid
            matrix = np.zeros((grid.size, grid.size))
            for a in range(grid.n_bands):
                for b in range(a, grid.n_bands):
                    block = kernel_block(self.model, (a, b), ell, grid.band_nodes[a], grid.band_nodes[b], self.opts)
                    block = block * np.sqrt(grid.band_weights[a])[:, None] * np.sqrt(grid.band_weights[b])[None, :]
                    matrix[grid.band_slice(a), grid.band_slice(b)] = block
                    matrix[grid.band_slice(b), grid.band_slice(a)] = block.T
            self._kernels[ell] = nystrom_constant(self.model.dimension) * matrix
        return self._kernels[ell]

    def coupling_mask(self, kappa: float) -> np.ndarray:
        index = self.grid.band_index
        return np.where(index[:, None] == index[None, :], 1.0, kappa)

    def inverse_sqrt_symbol(self, T: float) -> np.ndarray:
        grid = self.grid
        return np.concatenate(
            [kt_symbol(self.model.bands[a], grid.band_nodes[a], T) ** -0.5 for a in range(grid.n_bands)]
        )

    def check_temperature(self, T: float) -> None:
        floor = self.opts.T_FLOOR * self.model.max_mu
        if not T >= floor * (1.0 - 1e-12):
            raise InvalidCoupling("T", T)
        if T < self.grid.temperature * (1.0 - 1e-12):
            raise GridMismatch(T, self.grid.temperature)

    def assemble(self, T: float, lam: float, kappa: float, ell: int) -> ChannelOperator:
        self.check_temperature(T)
        s = self.inverse_sqrt_symbol(T)
        matrix = lam * self.coupling_mask(kappa) * self.interaction(ell) * s[:, None] * s[None, :]
        return ChannelOperator(ell=ell, T=T, lam=lam, kappa=kappa, matrix=0.5 * (matrix + matrix.T))

    def lowest(self, T: float, lam: float, kappa: float, channels) -> tuple[float, int]:
        """Smallest eigenvalue over channels and the channel attaining it"""
        best, best_ell = np.inf, 0
        for ell in channels:
            value, _ = min_eigenvalue(self.assemble(T, lam, kappa, ell))
            if value < best:
                best, best_ell = value, ell
        return best, best_ell


def assemble_operator(
    model: ModelInstance, grid: RadialGrid, T: float, lam: float, kappa: float, ell: int, opts: Settings | None = None
) -> ChannelOperator:
    return BirmanSchwingerAssembler(model, grid, opts or get_settings()).assemble(T, lam, kappa, ell)


def min_eigenvalue(op: ChannelOperator) -> tuple[float, np.ndarray]:
    """Smallest eigenvalue and its eigenvector, largest component made positive"""
    if op.size == 0:
        return 0.0, np.zeros(0)
    try:
        values, vectors = eigh(op.matrix, subset_by_index=[0, 0])
    except (LinAlgError, ValueError) as e:
        raise EigensolverFailure(str(e))
    if not np.isfinite(values[0]):
        raise EigensolverFailure(f"non-finite eigenvalue at T={op.T}, ell={op.ell}")
    vector = vectors[:, 0]
    if vector[np.argmax(np.abs(vector))] < 0:
        vector = -vector
    return float(values[0]), vector


class _TcSearch:
    """Lowest eigenvalue as a function of T, rebuilding the grid when T falls below its design temperature"""

    def __init__(self, model: ModelInstance, lam: float, kappa: float, opts: Settings, grid: RadialGrid | None):
        self.model, self.lam, self.kappa, self.opts = model, lam, kappa, opts
        self.pinned = grid is not None
        self.grid = grid or build_grid(model, GRID_DESIGN_FACTOR * min(b.chemical_potential for b in model.bands), opts)
        self.assembler = BirmanSchwingerAssembler(model, self.grid, opts)
        self.channels = valid_channels(model.dimension, opts.TC_MAX_CHANNEL)
        self.trajectory: list[tuple[float, float]] = []
        self.evaluations = 0

    def __call__(self, T: float) -> tuple[float, int]:
        if T < self.grid.temperature and not self.pinned:
            logger.debug(f"Rebuilding grid for T={T / SCAN_STEP}")
            self.grid = build_grid(self.model, T / SCAN_STEP, self.opts)
            self.assembler = BirmanSchwingerAssembler(self.model, self.grid, self.opts)
        value, ell = self.assembler.lowest(T, self.lam, self.kappa, self.channels)
        self.trajectory.append((T, value))
        self.evaluations += 1
        return value, ell


def critical_temperature(
    model: ModelInstance,
    lam: float,
    kappa: float,
    opts: Settings | None = None,
    *,
    grid: RadialGrid | None = None,
) -> TcResult:
    """Largest T with lowest Birman–Schwinger eigenvalue −1.

    Scans down in decades from T_ceiling until the lowest eigenvalue drops to −1, then bisects in log T.
    With a pinned grid the search stops at the grid's design temperature.
    """
    opts = opts or get_settings()
    if not lam > 0:
        raise InvalidCoupling("lambda", lam)
    search = _TcSearch(model, lam, kappa, opts, grid)
    floor = opts.T_FLOOR * model.max_mu
    if search.pinned:
        floor = max(floor, grid.temperature)
    hi = opts.T_CEILING_FACTOR * model.max_mu

    value, ell = search(hi)
    if value <= -1.0:
        raise BracketFailure(hi, value)
    lo = hi
    while True:
        lo = max(lo / SCAN_STEP, floor)
        value, ell = search(lo)
        if value <= -1.0:
            break
        if lo <= floor:
            logger.info(f"No T_c above T_floor={floor} for lambda={lam}, kappa={kappa}")
            return TcResult(
                lambda_=lam,
                kappa=kappa,
                tc=None,
                found=False,
                bracket=(floor, floor),
                min_eig_trajectory=search.trajectory,
                channel=ell,
                min_eig_at_tc=value,
                iterations=search.evaluations,
                grid_points=search.grid.size,
            )
        hi = lo

    while hi / lo - 1.0 > opts.BISECT_TOL:
        mid = np.sqrt(lo * hi)
        value, _ = search(mid)
        if value <= -1.0:
            lo = mid
        else:
            hi = mid

    def shifted(log_t: float) -> float:
        return search(np.exp(log_t))[0] + 1.0

    f_lo, f_hi = shifted(np.log(lo)), shifted(np.log(hi))
    if f_lo == 0.0 or f_hi == 0.0 or f_lo * f_hi > 0:
        tc = lo if abs(f_lo) <= abs(f_hi) else hi
    else:
        tc = float(np.exp(brentq(shifted, np.log(lo), np.log(hi), xtol=1e-15, rtol=4 * np.finfo(float).eps)))
    value, ell = search(tc)
    logger.info(f"T_c={tc} (channel {ell}) for lambda={lam}, kappa={kappa}")
    return TcResult(
        lambda_=lam,
        kappa=kappa,
        tc=tc,
        found=True,
        bracket=(lo, hi),
        min_eig_trajectory=search.trajectory,
        channel=ell,
        min_eig_at_tc=value,
        iterations=search.evaluations,
        grid_points=search.grid.size,
    )


def kappa_response(
    model: ModelInstance,
    grid: RadialGrid,
    T: float,
    lam: float,
    kappas,
    opts: Settings | None = None,
) -> np.ndarray:
    """f(κ) = lowest eigenvalue at (T, λ, κ) minus its value at κ = 0; concave with f(0) = 0"""
    opts = opts or get_settings()
    assembler = BirmanSchwingerAssembler(model, grid, opts)
    channels = valid_channels(model.dimension, opts.TC_MAX_CHANNEL)
    reference, _ = assembler.lowest(T, lam, 0.0, channels)
    return np.array([assembler.lowest(T, lam, kappa, channels)[0] - reference for kappa in np.atleast_1d(kappas)])


def kappa_thresholds(model: ModelInstance, lam: float, opts: Settings | None = None) -> KappaThresholds:
    """Inter-band couplings κ_c± beyond which T_c(λ, κ) exceeds T_c(λ, 0).

    When T_c(λ, 0) is not found the thresholds mark the onset of superconductivity above T_floor instead.
    None means no crossing up to KAPPA_SCAN_MAX.
    """
    opts = opts or get_settings()
    reference = critical_temperature(model, lam, 0.0, opts)
    if reference.found:
        T, status = reference.tc, ThresholdStatus.REFERENCE
    else:
        T, status = opts.T_FLOOR * model.max_mu, ThresholdStatus.ONSET
    grid = build_grid(model, T, opts)
    assembler = BirmanSchwingerAssembler(model, grid, opts)
    channels = valid_channels(model.dimension, opts.TC_MAX_CHANNEL)
    if status == ThresholdStatus.REFERENCE:
        target = assembler.lowest(T, lam, 0.0, channels)[0] - opts.KAPPA_CROSSING_TOL
    else:
        target = -1.0

    def crosses(kappa: float) -> bool:
        return assembler.lowest(T, lam, kappa, channels)[0] < target

    thresholds = []
    for sign in (-1.0, 1.0):
        lo, kappa = 0.0, opts.KAPPA_SCAN_START
        while kappa <= opts.KAPPA_SCAN_MAX and not crosses(sign * kappa):
            lo, kappa = kappa, 2.0 * kappa
        if kappa > opts.KAPPA_SCAN_MAX:
            thresholds.append(None)
            continue
        hi = kappa
        while hi - lo > opts.BISECT_TOL * hi:
            mid = 0.5 * (lo + hi)
            if crosses(sign * mid):
                hi = mid
            else:
                lo = mid
        thresholds.append(0.5 * (lo + hi))
    logger.info(f"kappa thresholds at lambda={lam}: {thresholds} ({status.value})")
    return KappaThresholds(
        lambda_=lam,
        kappa_minus=thresholds[0],
        kappa_plus=thresholds[1],
        status=status,
        temperature=T,
        tc_ref=reference.tc,
    )


def fermi_surface_trace(model: ModelInstance, grid: RadialGrid) -> np.ndarray:
    """Rows L_i(k_a)/√w_i: point evaluation at each k_F in the weighted Nyström basis"""
    rows = np.zeros((grid.n_bands, grid.size))
    for a, band in enumerate(model.bands):
        k_f = band.fermi_momentum
        edges = grid.panel_edges[a]
        panel = int(np.argmin(np.abs(edges - k_f)))
        nodes = grid.band_nodes[a]
        local = np.flatnonzero((nodes > edges[panel - 1]) & (nodes < edges[panel + 1]))
        interpolator = BarycentricInterpolator(nodes[local], np.eye(len(local)))
        weights = interpolator(k_f).ravel()
        offset = grid.band_slice(a).start
        rows[a, offset + local] = weights / np.sqrt(grid.band_weights[a][local])
    return rows


def singular_split_norm(
    model: ModelInstance,
    grid: RadialGrid,
    T: float,
    lam: float,
    kappa: float,
    T0: float | None = None,
    ell: int = 0,
    opts: Settings | None = None,
) -> float:
    """‖λ|V|^{1/2}(K_T^{-1} − log(T0/T) 𝔉†𝔉)|V|^{1/2}‖ / λ in channel ell, T0 defaulting to max μ"""
    opts = opts or get_settings()
    assembler = BirmanSchwingerAssembler(model, grid, opts)
    assembler.check_temperature(T)
    T0 = model.max_mu if T0 is None else T0

    interaction = assembler.coupling_mask(kappa) * assembler.interaction(ell)
    values, vectors = eigh(0.5 * (interaction + interaction.T))
    abs_half = (vectors * np.sqrt(np.abs(values))) @ vectors.T

    fermi = fermi_surface_trace(model, grid)
    density = np.array([2.0 * b.fermi_momentum ** (model.dimension - 1) / b.fermi_velocity for b in model.bands])
    singular = fermi.T @ (density[:, None] * fermi)
    inverse_symbol = np.diag(assembler.inverse_sqrt_symbol(T) ** 2)
    remainder = lam * abs_half @ (inverse_symbol - np.log(T0 / T) * singular) @ abs_half
    return float(np.max(np.abs(eigvalsh(0.5 * (remainder + remainder.T))))) / lam
