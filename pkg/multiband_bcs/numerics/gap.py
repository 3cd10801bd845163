"""s-wave multi-band gap equation and the BCS free energy relative to the normal state"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import root
from scipy.special import entr, expit

from multiband_bcs.exceptions import GapGridMismatch, GapNotConverged, InvalidCoupling
from multiband_bcs.models.physics import ModelInstance, dispersion_eval, sphere_area
from multiband_bcs.settings import Settings, get_settings

from .kernels import RadialGrid, build_grid
from .spectral import SCAN_STEP, BirmanSchwingerAssembler


logger = logging.getLogger(__name__)

STALL_WINDOW = 50
RESTART_FACTOR = 10.0


@dataclass
class GapSolution:
    T: float
    lam: float
    kappa: float
    grid: RadialGrid = field(repr=False)
    delta: np.ndarray = field(repr=False)
    residual: float
    iterations: int
    converged: bool
    restarts: int = 0
    residual_history: list[float] = field(default_factory=list, repr=False)

    def band_values(self, a: int) -> np.ndarray:
        return self.delta[self.grid.band_slice(a)]

    def is_trivial(self, opts: Settings | None = None) -> bool:
        opts = opts or get_settings()
        return float(np.max(np.abs(self.delta), initial=0.0)) <= opts.GAP_TRIVIAL_TOL * self.T


def _energies(model: ModelInstance, grid: RadialGrid) -> np.ndarray:
    return np.concatenate([dispersion_eval(model.bands[a], grid.band_nodes[a]) for a in range(grid.n_bands)])


def _pair_response(E: np.ndarray, T: float) -> tuple[np.ndarray, np.ndarray]:
    """h = tanh(E/2T)/E and h'(E)/E, both regular at E = 0"""
    x = E / (2.0 * T)
    small = x < 1e-4
    with np.errstate(divide="ignore", invalid="ignore"):
        t = np.tanh(x)
        h = np.where(small, (1.0 - x * x / 3.0) / (2.0 * T), t / E)
        sech2 = 1.0 - t * t
        regular = (sech2 / (2.0 * T * E) - t / E**2) / E
        dh_over_e = np.where(small, (-2.0 / 3.0 + 8.0 * x * x / 15.0) / (8.0 * T**3), regular)
    return h, dh_over_e


class GapMap:
    """Δ ↦ −λ c_d Σ_b κ^{[a≠b]} ∫ K_0 tanh(E/2T)/E Δ q^{d-1} dq on the grid"""

    def __init__(self, model: ModelInstance, grid: RadialGrid, T: float, lam: float, kappa: float, opts: Settings):
        assembler = BirmanSchwingerAssembler(model, grid, opts)
        assembler.check_temperature(T)
        sqrt_w = np.sqrt(grid.weights)
        self.kernel = assembler.coupling_mask(kappa) * assembler.interaction(0) / sqrt_w[:, None] / sqrt_w[None, :]
        self.weights = grid.weights
        self.epsilon = _energies(model, grid)
        self.T, self.lam = T, lam

    def energy(self, delta: np.ndarray) -> np.ndarray:
        return np.sqrt(self.epsilon**2 + delta**2)

    def __call__(self, delta: np.ndarray) -> np.ndarray:
        h, _ = _pair_response(self.energy(delta), self.T)
        return -self.lam * self.kernel @ (self.weights * h * delta)

    def defect(self, delta: np.ndarray) -> np.ndarray:
        return delta - self(delta)

    def jacobian(self, delta: np.ndarray) -> np.ndarray:
        """d(Δ − map(Δ))/dΔ"""
        h, dh_over_e = _pair_response(self.energy(delta), self.T)
        column = self.weights * (h + delta**2 * dh_over_e)
        return np.eye(len(delta)) + self.lam * self.kernel * column[None, :]


def _check_delta(grid: RadialGrid, delta: np.ndarray) -> np.ndarray:
    delta = np.asarray(delta, dtype=float)
    if delta.shape != (grid.size,) or not np.all(np.isfinite(delta)):
        raise GapGridMismatch()
    return delta


def _seed(model: ModelInstance, grid: RadialGrid, init: float | list[float]) -> np.ndarray:
    amplitudes = np.broadcast_to(np.asarray(init, dtype=float), (model.n_bands,))
    if not np.all(amplitudes > 0):
        raise InvalidCoupling("init", float(np.min(amplitudes)))
    return np.concatenate(
        [
            amplitudes[a] * np.exp(-((dispersion_eval(band, grid.band_nodes[a]) / band.chemical_potential) ** 2))
            for a, band in enumerate(model.bands)
        ]
    )


def _iterate(gap_map: GapMap, delta: np.ndarray, tol: float, opts: Settings) -> tuple[np.ndarray, float, int, list]:
    """Damped fixed-point iteration with Anderson mixing; stops on convergence or stall"""
    beta, depth = opts.GAP_DAMPING, opts.ANDERSON_DEPTH
    xs, rs, history = [], [], []
    residual = np.inf
    for iteration in range(1, opts.GAP_MAX_ITER + 1):
        r = gap_map(delta) - delta
        residual = float(np.max(np.abs(r)))
        history.append(residual)
        if residual <= tol:
            return delta, residual, iteration, history
        if iteration > STALL_WINDOW and residual > 0.9 * min(history[-STALL_WINDOW:-1]):
            logger.debug(f"Fixed-point iteration stalled at residual {residual}")
            break
        xs.append(delta)
        rs.append(r)
        xs, rs = xs[-(depth + 1) :], rs[-(depth + 1) :]
        step = delta + beta * r
        if depth and len(xs) > 1:
            dx = np.diff(np.array(xs), axis=0).T
            dr = np.diff(np.array(rs), axis=0).T
            gamma, *_ = np.linalg.lstsq(dr, r, rcond=None)
            step = step - (dx + beta * dr) @ gamma
        delta = step
    return delta, residual, len(history), history


def _polish(gap_map: GapMap, delta: np.ndarray) -> np.ndarray:
    solution = root(gap_map.defect, delta, jac=gap_map.jacobian, method="hybr")
    return solution.x


def solve_gap(
    model: ModelInstance,
    grid: RadialGrid,
    T: float,
    lam: float,
    kappa: float,
    init: float | list[float] | None = None,
    opts: Settings | None = None,
    *,
    tc_hint: float | None = None,
    seed: np.ndarray | None = None,
) -> GapSolution:
    """Solve the s-wave gap equation at temperature T.

    Starts from init·exp(−(ε/μ)²) per band, or from seed when continuing along a T-ladder.
    A trivial result below tc_hint, or a failure to converge, restarts with a tenfold seed.
    """
    opts = opts or get_settings()
    gap_map = GapMap(model, grid, T, lam, kappa, opts)
    tol = opts.GAP_TOL * model.max_mu
    init = 0.1 * model.max_mu if init is None else init
    start = _check_delta(grid, seed) if seed is not None else _seed(model, grid, init)

    total, history = 0, []
    for restart in range(opts.GAP_RESTARTS + 1):
        delta, residual, iterations, trace = _iterate(gap_map, start, tol, opts)
        total += iterations
        history += trace
        if residual > tol:
            delta = _polish(gap_map, delta)
            residual = float(np.max(np.abs(gap_map.defect(delta))))
            history.append(residual)
        solution = GapSolution(
            T=T,
            lam=lam,
            kappa=kappa,
            grid=grid,
            delta=delta,
            residual=residual,
            iterations=total,
            converged=residual <= tol,
            restarts=restart,
            residual_history=history,
        )
        collapsed = solution.converged and tc_hint is not None and T < tc_hint and solution.is_trivial(opts)
        if solution.converged and not collapsed:
            logger.debug(f"Gap at T={T}: max {np.max(np.abs(delta))}, residual {residual}, {total} iterations")
            return solution
        logger.debug(f"Restarting gap solve at T={T} ({'trivial' if collapsed else 'not converged'})")
        start = RESTART_FACTOR * start
    if solution.converged:
        logger.warning(f"Gap collapsed to zero at T={T} below the expected T_c={tc_hint}")
        return solution
    raise GapNotConverged(solution.residual, total)


def gap_defect(
    model: ModelInstance,
    grid: RadialGrid,
    T: float,
    lam: float,
    kappa: float,
    delta: np.ndarray,
    opts: Settings | None = None,
) -> float:
    """sup |Δ − map(Δ)|"""
    delta = _check_delta(grid, delta)
    gap_map = GapMap(model, grid, T, lam, kappa, opts or get_settings())
    return float(np.max(np.abs(gap_map.defect(delta)), initial=0.0))


def _state_delta(grid: RadialGrid, T: float, state) -> np.ndarray:
    if state is None:
        return np.zeros(grid.size)
    if isinstance(state, GapSolution):
        if state.grid is not grid and (
            state.delta.shape != (grid.size,) or not np.array_equal(state.grid.nodes, grid.nodes)
        ):
            raise GapGridMismatch()
        if not np.isclose(state.T, T, rtol=1e-12):
            raise GapGridMismatch()
        return state.delta
    return _check_delta(grid, state)


def pair_amplitude(model: ModelInstance, grid: RadialGrid, T: float, delta: np.ndarray) -> np.ndarray:
    """α̂ = Δ tanh(E/2T)/(2E)"""
    epsilon = _energies(model, grid)
    h, _ = _pair_response(np.sqrt(epsilon**2 + delta**2), T)
    return 0.5 * h * delta


def interaction_energy(
    model: ModelInstance,
    grid: RadialGrid,
    T: float,
    lam: float,
    kappa: float,
    state,
    opts: Settings | None = None,
    *,
    form: str = "quadratic",
) -> float:
    """∫ Σ_ab V_ab ᾱ_a α_b.

    form="quadratic" evaluates the quadratic form in α̂. form="gap" gives −½∫ Σ_a Δ_a α̂_a,
    the value it takes at gap solutions.
    """
    delta = _state_delta(grid, T, state)
    alpha = pair_amplitude(model, grid, T, delta)
    area = sphere_area(model.dimension)
    if form == "gap":
        return -0.5 * area * float(np.sum(grid.weights * delta * alpha))
    gap_map = GapMap(model, grid, T, lam, kappa, opts or get_settings())
    field_ = lam * gap_map.kernel @ (grid.weights * alpha)
    return area * float(np.sum(grid.weights * alpha * field_))


def free_energy_density(
    model: ModelInstance,
    grid: RadialGrid,
    T: float,
    lam: float,
    kappa: float,
    state,
    opts: Settings | None = None,
) -> float:
    """Superconducting minus normal free energy per volume; state is a GapSolution, a Δ array or None (normal)"""
    if state is None:
        return 0.0
    delta = _state_delta(grid, T, state)
    epsilon = _energies(model, grid)
    energy = np.sqrt(epsilon**2 + delta**2)
    t = np.tanh(energy / (2.0 * T))
    with np.errstate(divide="ignore", invalid="ignore"):
        ratio = np.where(energy > 0, epsilon / energy, 0.0)
    occupation = 0.5 * (1.0 - ratio * t)
    normal_occupation = expit(-epsilon / T)
    entropy = entr(expit(energy / T)) + entr(expit(-energy / T))
    normal_entropy = entr(expit(epsilon / T)) + entr(expit(-epsilon / T))
    integrand = epsilon * (occupation - normal_occupation) - T * (entropy - normal_entropy)
    kinetic = sphere_area(model.dimension) * float(np.sum(grid.weights * integrand))
    return kinetic + interaction_energy(model, grid, T, lam, kappa, delta, opts)


def state_eigenvalues(model: ModelInstance, grid: RadialGrid, T: float, state) -> tuple[np.ndarray, np.ndarray]:
    """γ̂ and the two eigenvalues of the 2×2 BdG block per grid point"""
    delta = _state_delta(grid, T, state)
    epsilon = _energies(model, grid)
    energy = np.sqrt(epsilon**2 + delta**2)
    with np.errstate(divide="ignore", invalid="ignore"):
        ratio = np.where(energy > 0, epsilon / energy, 0.0)
    occupation = 0.5 * (1.0 - ratio * np.tanh(energy / (2.0 * T)))
    return occupation, np.stack([expit(-energy / T), expit(energy / T)])


def euler_lagrange_residual(
    model: ModelInstance,
    grid: RadialGrid,
    T: float,
    lam: float,
    kappa: float,
    state,
    opts: Settings | None = None,
) -> float:
    """sup |(K_T^Δ + V)α| on the grid"""
    delta = _state_delta(grid, T, state)
    alpha = pair_amplitude(model, grid, T, delta)
    gap_map = GapMap(model, grid, T, lam, kappa, opts or get_settings())
    return float(np.max(np.abs(0.5 * delta + lam * gap_map.kernel @ (grid.weights * alpha)), initial=0.0))


def gap_critical_temperature(
    model: ModelInstance,
    lam: float,
    kappa: float,
    opts: Settings | None = None,
    *,
    grid: RadialGrid | None = None,
    bracket: tuple[float, float] | None = None,
) -> float | None:
    """Largest T at which solve_gap finds a nontrivial Δ, by log-T bisection on triviality.

    bracket is (lo, hi) with a nontrivial gap expected at lo. Without one, T is scanned down in decades
    from T_ceiling. Returns None when Δ is trivial at T_floor.
    """
    opts = opts or get_settings()
    floor = opts.T_FLOOR * model.max_mu
    lo, hi = bracket if bracket is not None else (None, opts.T_CEILING_FACTOR * model.max_mu)
    grid = grid or build_grid(model, lo or floor, opts)
    floor = max(floor, grid.temperature)

    def nontrivial(T: float, seed: np.ndarray | None) -> GapSolution | None:
        solution = solve_gap(model, grid, T, lam, kappa, opts=opts, seed=seed)
        return None if solution.is_trivial(opts) else solution

    if lo is None:
        lo = hi
        found = None
        while found is None:
            if lo <= floor:
                return None
            hi, lo = lo, max(lo / SCAN_STEP, floor)
            found = nontrivial(lo, None)
    else:
        found = nontrivial(lo, None)
        if found is None:
            return None
    while hi / lo - 1.0 > opts.BISECT_TOL:
        mid = float(np.sqrt(lo * hi))
        solution = nontrivial(mid, found.delta)
        if solution is None:
            hi = mid
        else:
            lo, found = mid, solution
    logger.info(f"Gap-equation T_c={np.sqrt(lo * hi)} for lambda={lam}, kappa={kappa}")
    return float(np.sqrt(lo * hi))
