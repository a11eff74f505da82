"""3-dimensional Bessel bridges: explicit transition kernel, exact path
sampling via the norm of a 3-component Gaussian bridge, and the mixture law
(draw hitting times, then independent bridges per vertex) that matches the
S.D.E. trajectories.
"""

import math
from dataclasses import dataclass

import numpy as np

from .errors import GridOutOfRange, InvalidParams, TimeOutOfRange
from .nu import NuParams
from .sde import SdeConfig, sample_beta
from .streams import DOMAIN_BRIDGE, substream


def bridge_density(theta: float, t_end: float, t: float, y) -> float | np.ndarray:
    """Density of the bridge value at time t in (0, T), from theta > 0 to 0.

    p(y) = y/(theta sqrt(2 pi t)) (T/(T-t))^{3/2}
           exp(-y^2/(2(T-t)) + theta^2/(2T))
           (exp(-(y-theta)^2/(2t)) - exp(-(y+theta)^2/(2t)))  for y >= 0.
    """
    if theta <= 0 or t_end <= 0:
        raise InvalidParams("theta and t_end must be positive")
    if not 0 < t < t_end:
        raise TimeOutOfRange("need 0 < t < T")
    y = np.asarray(y, dtype=float)
    rem = t_end - t
    pref = (y / theta) / math.sqrt(2.0 * math.pi * t) * (t_end / rem) ** 1.5
    body = np.exp(-(y**2) / (2.0 * rem) + theta**2 / (2.0 * t_end))
    wall = np.exp(-((y - theta) ** 2) / (2.0 * t)) - np.exp(-((y + theta) ** 2) / (2.0 * t))
    out = np.where(y >= 0, pref * body * wall, 0.0)
    return float(out) if out.ndim == 0 else out


@dataclass
class BridgePath:
    """Sampled bridge: values are norms of the retained 3-component state,
    so the grid can be refined later without resampling."""

    theta: float
    t_end: float
    times: np.ndarray        # (P,)
    components: np.ndarray   # (P, 3)

    @property
    def values(self) -> np.ndarray:
        return np.linalg.norm(self.components, axis=1)

    def refine(self, new_times, rng: np.random.Generator) -> "BridgePath":
        """Insert extra grid points by bridge conditioning between neighbors."""
        new_times = np.asarray(new_times, dtype=float)
        _check_grid(new_times, self.t_end)
        anchor_t = np.concatenate(([0.0], self.times, [self.t_end]))
        anchor_c = np.vstack(([self.theta, 0.0, 0.0], self.components, [0.0, 0.0, 0.0]))
        order = np.argsort(anchor_t, kind="stable")
        anchor_t = anchor_t[order]
        anchor_c = anchor_c[order]
        out_t, out_c = [], []
        for v in new_times:
            if np.any(np.isclose(anchor_t, v)):
                k = int(np.argmin(np.abs(anchor_t - v)))
                out_t.append(anchor_t[k])
                out_c.append(anchor_c[k])
                continue
            k = int(np.searchsorted(anchor_t, v))
            s, u = anchor_t[k - 1], anchor_t[k]
            cs, cu = anchor_c[k - 1], anchor_c[k]
            frac = (v - s) / (u - s)
            mean = cs + frac * (cu - cs)
            sd = math.sqrt((v - s) * (u - v) / (u - s))
            val = mean + sd * np.array([rng.standard_normal() for _ in range(3)])
            out_t.append(v)
            out_c.append(val)
            anchor_t = np.insert(anchor_t, k, v)
            anchor_c = np.insert(anchor_c, k, val, axis=0)
        all_t = np.concatenate([self.times, np.array(out_t)])
        all_c = np.vstack([self.components, np.array(out_c)])
        order = np.argsort(all_t, kind="stable")
        keep = np.concatenate(([True], np.diff(all_t[order]) > 0))
        return BridgePath(self.theta, self.t_end, all_t[order][keep], all_c[order][keep])


def _check_grid(grid: np.ndarray, t_end: float):
    if grid.ndim != 1 or len(grid) == 0:
        raise GridOutOfRange("grid must be a nonempty 1-D array")
    if (np.diff(grid) < 0).any():
        raise GridOutOfRange("grid must be nondecreasing")
    if grid[0] < 0 or grid[-1] > t_end:
        raise GridOutOfRange("grid must lie in [0, T]")


def sample_bridge(theta: float, t_end: float, grid, rng: np.random.Generator) -> BridgePath:
    """Exact bridge values on the grid (no discretization bias at grid points).

    The 3-component start is (theta, 0, 0); rotational invariance of the norm
    makes the direction immaterial.
    """
    if theta <= 0 or t_end <= 0:
        raise InvalidParams("theta and t_end must be positive")
    grid = np.asarray(grid, dtype=float)
    _check_grid(grid, t_end)
    comp = np.empty((len(grid), 3))
    s = 0.0
    c = np.array([theta, 0.0, 0.0])
    for k, u in enumerate(grid):
        if u >= t_end:
            c = np.zeros(3)
        elif u > s:
            rem = t_end - s
            frac = (u - s) / rem
            sd = math.sqrt((u - s) * (t_end - u) / rem)
            c = c * (1.0 - frac) + sd * np.array(
                [rng.standard_normal() for _ in range(3)])
        comp[k] = c
        s = max(s, float(u))
    return BridgePath(theta, t_end, grid.copy(), comp)


@dataclass
class MixtureSamples:
    """Bundle values of the hitting-time mixture: independent bridges given T."""

    values: list                # values[i] has shape (m, len(grids[i]))
    t_hit: np.ndarray           # (m, n)
    grids: list


def sample_mixture(params: NuParams, n_samples: int, grid_per_vertex,
                   config: SdeConfig, seed: int | None = None,
                   workers: int = 1) -> MixtureSamples:
    """Draw T from the S.D.E. hitting law, then independent bridges per vertex.

    grid_per_vertex: one time grid per vertex (values past T_i read 0, the
    path being extended by 0 after its end).
    """
    seed = config.seed if seed is None else seed
    grids = [np.asarray(g, dtype=float) for g in grid_per_vertex]
    if len(grids) != params.n:
        raise InvalidParams("need one grid per vertex")
    draws = sample_beta(params, n_samples, config, seed=seed, workers=workers)
    m = draws.t_hit.shape[0]
    values = [np.zeros((m, len(g))) for g in grids]
    for row in range(m):
        rng = substream(seed, DOMAIN_BRIDGE, int(draws.replica_ids[row]))
        for i in range(params.n):
            t_i = float(draws.t_hit[row, i])
            g = grids[i]
            inside = g < t_i
            if inside.any():
                path = sample_bridge(float(params.theta[i]), t_i, g[inside], rng)
                values[i][row, inside] = path.values
            # beyond T_i the path is 0 already
    return MixtureSamples(values=values, t_hit=draws.t_hit, grids=grids)
