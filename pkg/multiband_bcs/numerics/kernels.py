"""Special functions, channel-projected interaction kernels and momentum grids"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from functools import cached_property, lru_cache

import numpy as np
from numpy.typing import ArrayLike
from scipy.special import eval_chebyt, eval_legendre, j0, roots_chebyt, roots_legendre, spherical_jn

from multiband_bcs.exceptions import GridDegenerate, InvalidChannel, InvalidDimension, InvalidGridSpec
from multiband_bcs.models.physics import BandDispersion, ModelInstance, dispersion_eval, potential_fourier
from multiband_bcs.settings import Settings, get_settings


logger = logging.getLogger(__name__)

MAX_PANEL_RATIO = 3.0  # between widths of neighbouring panels near k_F


def angular_average(d: int, y: ArrayLike) -> np.ndarray | float:
    """j_d(y), the normalized spherical average of e^{iy p·e₁}"""
    y = np.asarray(y, dtype=float)
    match d:
        case 1:
            return np.cos(y)
        case 2:
            return j0(y)
        case 3:
            return spherical_jn(0, y)
    raise InvalidDimension(d)


def kt_symbol(band: BandDispersion, p: ArrayLike, T: float) -> np.ndarray | float:
    """K_T(p) = ε/tanh(ε/2T), equal to 2T on the Fermi surface"""
    x = np.abs(dispersion_eval(band, p)) / (2.0 * T)
    with np.errstate(divide="ignore", invalid="ignore"):
        ratio = np.where(x < 1e-6, 1.0 + x * x / 3.0, x / np.tanh(x))
    return 2.0 * T * ratio


def degeneracy(ell: int, d: int) -> int:
    """Multiplicity of channel ell among the spherical harmonics on S^{d-1}"""
    check_channel(ell, d)
    match d:
        case 3:
            return 2 * ell + 1
        case 2:
            return 1 if ell == 0 else 2
    return 1


def check_channel(ell: int, d: int) -> None:
    if ell < 0 or (d == 1 and ell > 1):
        raise InvalidChannel(ell, d)


def valid_channels(d: int, ell_max: int) -> range:
    return range(min(ell_max, 1) + 1) if d == 1 else range(ell_max + 1)


@lru_cache(maxsize=64)
def _angular_rule(d: int, order: int) -> tuple[np.ndarray, np.ndarray]:
    """Nodes t = cos ψ and weights normalized to the unit angular measure"""
    match d:
        case 3:
            t, w = roots_legendre(order)
            w = 0.5 * w
        case 2:
            t, w = roots_chebyt(order)
            w = w / np.pi
        case _:
            t, w = np.array([1.0, -1.0]), np.array([0.5, 0.5])
    t.flags.writeable = False
    w.flags.writeable = False
    return t, w


def _angular_basis(d: int, ell: int, t: np.ndarray) -> np.ndarray:
    match d:
        case 3:
            return eval_legendre(ell, t)
        case 2:
            return eval_chebyt(ell, t)
    return t**ell


def _project(model: ModelInstance, pair: tuple[int, int], ell: int, p, q, order: int) -> np.ndarray:
    d = model.dimension
    t, w = _angular_rule(d, order)
    p = np.asarray(p, dtype=float)[..., None]
    q = np.asarray(q, dtype=float)[..., None]
    r = np.sqrt(np.maximum(p * p + q * q - 2.0 * p * q * t, 0.0))
    values = potential_fourier(model.interactions[pair], d, r)
    return values @ (w * _angular_basis(d, ell, t))


def channel_kernel(
    model: ModelInstance,
    pair: tuple[int, int],
    ell: int,
    p: ArrayLike,
    q: ArrayLike,
    opts: Settings | None = None,
) -> np.ndarray | float:
    """Projection of V̂_ab(p − q) onto angular channel ell between spheres of radii p and q.

    Broadcasts over p and q. The angular rule starts at ANGULAR_ORDER points and is doubled
    while two successive estimates differ by more than ANGULAR_TOL relative to |V̂_ab(0)|.
    """
    opts = opts or get_settings()
    d = model.dimension
    check_channel(ell, d)
    pot = model.interactions[pair]
    if pot.is_zero:
        return np.zeros(np.broadcast_shapes(np.shape(p), np.shape(q)))
    if d == 1:
        return _project(model, pair, ell, p, q, 2)

    scale = abs(float(potential_fourier(pot, d, 0.0)))
    order = opts.ANGULAR_ORDER
    value = _project(model, pair, ell, p, q, order)
    while order < opts.ANGULAR_MAX_ORDER:
        refined = _project(model, pair, ell, p, q, 2 * order)
        order *= 2
        change = np.max(np.abs(refined - value), initial=0.0)
        value = refined
        if change <= opts.ANGULAR_TOL * scale:
            break
    else:
        logger.debug(f"Angular rule for V_{pair} at ell={ell} stopped at the maximal order {order}")
    return value


def kernel_block(
    model: ModelInstance, pair: tuple[int, int], ell: int, p: np.ndarray, q: np.ndarray, opts: Settings | None = None
) -> np.ndarray:
    return channel_kernel(model, pair, ell, p[:, None], q[None, :], opts)


@dataclass(frozen=True)
class RadialGrid:
    """Composite Gauss–Legendre grid per band, measure p^{d-1} dp absorbed into the weights"""

    band_nodes: tuple[np.ndarray, ...]
    band_weights: tuple[np.ndarray, ...]
    panel_edges: tuple[np.ndarray, ...]
    order: int
    uv_cutoff: float
    clustering_scale: float
    temperature: float

    @property
    def n_bands(self) -> int:
        return len(self.band_nodes)

    @cached_property
    def offsets(self) -> np.ndarray:
        return np.concatenate([[0], np.cumsum([len(x) for x in self.band_nodes])])

    @property
    def size(self) -> int:
        return int(self.offsets[-1])

    def band_slice(self, a: int) -> slice:
        return slice(int(self.offsets[a]), int(self.offsets[a + 1]))

    @cached_property
    def nodes(self) -> np.ndarray:
        return np.concatenate(self.band_nodes)

    @cached_property
    def weights(self) -> np.ndarray:
        return np.concatenate(self.band_weights)

    @cached_property
    def band_index(self) -> np.ndarray:
        return np.repeat(np.arange(self.n_bands), [len(x) for x in self.band_nodes])


def _panel_rule(edges: np.ndarray, order: int) -> tuple[np.ndarray, np.ndarray]:
    x, w = roots_legendre(order)
    left, right = edges[:-1, None], edges[1:, None]
    half = 0.5 * (right - left)
    return (left + half * (x + 1.0)).ravel(), (half * w).ravel()


def _panels_needed(span: float) -> int:
    return int(np.ceil(np.log(span) / np.log(MAX_PANEL_RATIO))) + 1


def _band_edges(k_f: float, inner: float, uv_cutoff: float, n_left: int, n_right: int) -> np.ndarray:
    left = k_f - np.geomspace(inner, k_f, n_left)[::-1]
    right = k_f + np.geomspace(inner, uv_cutoff - k_f, n_right)
    return np.concatenate([left, [k_f], right])


def build_grid(
    model: ModelInstance,
    T: float,
    opts: Settings | None = None,
    *,
    points_per_band: int | None = None,
    uv_cutoff_factor: float | None = None,
    clustering_scale: float | None = None,
) -> RadialGrid:
    """Grid resolving the K_T^{-1} peak of every band at temperatures ≥ T.

    Each band gets geometrically growing panels on both sides of k_F, the innermost of width
    clustering_scale·max(T, T_floor)/v_F, covering [0, uv_cutoff].
    """
    opts = opts or get_settings()
    points_per_band = points_per_band or opts.POINTS_PER_BAND
    uv_cutoff_factor = uv_cutoff_factor or opts.UV_CUTOFF_FACTOR
    clustering_scale = clustering_scale or opts.CLUSTERING_SCALE
    order = min(opts.GRID_PANEL_ORDER, points_per_band // 4)
    n_panels = points_per_band // order
    if T <= 0 or points_per_band < 16 or n_panels < 4:
        raise InvalidGridSpec(f"T={T}, points_per_band={points_per_band}, panel order {order}")
    n_left = n_panels // 2
    n_right = n_panels - n_left

    d = model.dimension
    uv_cutoff = uv_cutoff_factor * model.max_fermi_momentum
    t_eff = max(T, opts.T_FLOOR * model.max_mu)
    nodes, weights, edges = [], [], []
    for a, band in enumerate(model.bands):
        k_f = band.fermi_momentum
        inner = clustering_scale * t_eff / band.fermi_velocity
        if inner >= 0.5 * k_f or inner >= 0.5 * (uv_cutoff - k_f):
            raise GridDegenerate(a + 1, T)
        band_edges = _band_edges(
            k_f,
            inner,
            uv_cutoff,
            max(n_left, _panels_needed(k_f / inner)),
            max(n_right, _panels_needed((uv_cutoff - k_f) / inner)),
        )
        x, w = _panel_rule(band_edges, order)
        nodes.append(x)
        weights.append(w * x ** (d - 1))
        edges.append(band_edges)
    logger.debug(f"Built grid with {sum(len(x) for x in nodes)} points for T={T}, uv_cutoff={uv_cutoff}")
    return RadialGrid(
        band_nodes=tuple(nodes),
        band_weights=tuple(weights),
        panel_edges=tuple(edges),
        order=order,
        uv_cutoff=uv_cutoff,
        clustering_scale=clustering_scale,
        temperature=T,
    )


def inverse_symbol_integral(model: ModelInstance, grid: RadialGrid, a: int, T: float) -> float:
    """Grid value of ∫₀^Λ p^{d-1} dp / K_{T,a}(p)"""
    return float(np.sum(grid.band_weights[a] / kt_symbol(model.bands[a], grid.band_nodes[a], T)))
