"""Compare simulated charge densities with the exact kernel at one time slice."""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from typing import IO, NamedTuple

import numpy as np

from .kernel import KernelParams, kernel_table
from .montecarlo import ChargeLattice

COMPARISON_FIELDS = ("t", "x", "mc", "exact", "scaled_mc", "z")


def slice_xs(t: int) -> np.ndarray:
    return np.arange(-t, t + 1, 2)


def rho_from_counts(lattice: ChargeLattice, t: int) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Net deposits by arrival direction at slice ``t``: ``(xs, rho_plus, rho_minus)``.

    Both channels are summed.
    """
    if not 0 < t <= lattice.counts.shape[2] - 1:
        raise ValueError(f"slice t={t} outside 1..{lattice.counts.shape[2] - 1}")
    xs = slice_xs(t)
    per_sigma = lattice.counts[:, :, t, xs + lattice.offset].sum(axis=0)
    return xs, per_sigma[0].astype(float), per_sigma[1].astype(float)


def _kernel_slices(params: KernelParams, t: int):
    """Signed and unsigned start=+ / start=- slices on ``slice_xs(t)``, indexed [e, x]."""
    if not 1 <= t <= params.t_max:
        raise ValueError(f"slice t={t} outside 1..{params.t_max}")
    plus = kernel_table(params, +1)
    minus = plus.mirrored()
    idx = slice_xs(t) + params.t_max
    return (
        plus.signed_slice(t)[idx].T,
        minus.signed_slice(t)[idx].T,
        plus.unsigned_slice(t)[idx].T,
        minus.unsigned_slice(t)[idx].T,
    )


def exact_prediction(params: KernelParams, t: int) -> tuple[np.ndarray, np.ndarray]:
    """Kernel counterpart of ``rho_plus - rho_minus`` at slice ``t``.

    Sums ``sigma * (G[sigma, +] - G[sigma, -])`` over the end direction, with
    ``G`` the colour-signed kernel for each start direction.
    """
    g_plus, g_minus, _, _ = _kernel_slices(params, t)
    sign = np.array([1.0, -1.0])[:, None]
    return slice_xs(t), (sign * (g_plus - g_minus)).sum(axis=0)


class Entry(NamedTuple):
    x: int
    mc: float
    exact: float
    z: float


@dataclass(frozen=True)
class SliceComparison:
    t: int
    entries: tuple[Entry, ...]
    scale: float
    reduced_chi2: float
    warning: str | None = None

    @property
    def max_abs_z(self) -> float:
        return max(abs(e.z) for e in self.entries)

    def rows(self) -> list[dict]:
        return [
            {"t": self.t, "x": e.x, "mc": e.mc, "exact": e.exact,
             "scaled_mc": self.scale * e.mc, "z": e.z}
            for e in self.entries
        ]

    def summary(self) -> dict:
        out = {
            "t": self.t,
            "scale": self.scale,
            "reduced_chi2": self.reduced_chi2,
            "n_points": len(self.entries),
            "max_abs_z": self.max_abs_z,
            "status": "warning" if self.warning else "ok",
        }
        if self.warning:
            out["warning"] = self.warning
        return out


def fit_scale(mc: np.ndarray, exact: np.ndarray) -> float:
    """Least-squares ``s`` minimising ``sum((s * mc - exact)**2)``."""
    denom = float(np.dot(mc, mc))
    if denom == 0.0:
        raise ValueError("simulated slice is identically zero; nothing to fit")
    return float(np.dot(mc, exact)) / denom


def standard_errors(lattice: ChargeLattice, t: int) -> np.ndarray:
    """Per-x standard error of ``(rho_plus - rho_minus) / loops``.

    Per loop, each channel crosses slice t once with a unit deposit, so the
    second moment at x is the sum of the two visit probabilities plus twice
    the probability that both channels meet there (a meeting deposits the
    same sign on both).  Visit and meeting probabilities come from the
    kernel tables at the sampling weight, scaled by ``(1-p)**(t-1)``.
    """
    p = lattice.config.corner_prob
    if p >= 1.0:
        raise ValueError("corner_prob 1 has no finite corner weight")
    loops = lattice.loops_completed
    if loops < 1:
        raise ValueError("lattice holds no completed loops")
    n = lattice.config.n_steps
    params = KernelParams(t, p / (1 - p))
    _, _, u_plus, u_minus = _kernel_slices(params, t)
    table = kernel_table(params, +1)
    idx = slice_xs(t) + t
    odd = (table.w[t, idx, :, 1] + table.w[t, idx, :, 3]).sum(axis=1)
    # meeting after leg 2j: odd corners so far, then a corner (or the path ends)
    meet = odd * (p if t < n else 1.0)
    scale = (1 - p) ** (t - 1)
    xs, rho_p, rho_m = rho_from_counts(lattice, t)
    mean = (rho_p - rho_m) / loops
    second = scale * (u_plus.sum(axis=0) + u_minus.sum(axis=0) + 2 * meet)
    return np.sqrt(np.clip(second - mean**2, 0.0, None) / loops)


def residual_errors(mc: np.ndarray, se: np.ndarray) -> np.ndarray:
    """Standard errors of ``s*mc - exact`` in units of ``s`` after the scale fit.

    Linearising the unweighted fit, the residual is the projection of the
    noise orthogonal to ``mc``; its variance is the diagonal of
    ``(I - P) D (I - P)`` with ``D = diag(se**2)``.
    """
    norm2 = float(np.dot(mc, mc))
    lev = mc**2 / norm2
    spread = float(np.dot(mc**2, se**2)) / norm2**2
    var = se**2 * (1 - 2 * lev) + mc**2 * spread
    return np.sqrt(np.clip(var, 0.0, None))


def compare_slice(
    lattice: ChargeLattice, t: int, params: KernelParams | None = None
) -> SliceComparison:
    """Fit the simulated slice to the kernel prediction and score each site.

    ``params`` defaults to the kernel matching the sampling law, corner
    weight ``p/(1-p)``.  ``z`` is the fitted residual over its standard
    error, fit leverage included.
    """
    n = lattice.config.n_steps
    if not 1 <= t <= n:
        raise ValueError(f"slice t={t} outside 1..{n}")
    p = lattice.config.corner_prob
    if params is None:
        if p >= 1.0:
            raise ValueError("corner_prob 1 has no finite corner weight")
        params = KernelParams(t, p / (1 - p))
    warning = None
    if 2 * t > n:
        warning = f"slice t={t} beyond n/2={n / 2:g}; kernel comparison outside the default range"

    xs, rho_p, rho_m = rho_from_counts(lattice, t)
    mc = (rho_p - rho_m) / lattice.loops_completed
    _, exact = exact_prediction(params, t)
    scale = fit_scale(mc, exact)
    err = residual_errors(mc, standard_errors(lattice, t))

    resid = scale * mc - exact
    tol = 1e-9 * max(1.0, float(np.max(np.abs(exact))))
    z = np.empty_like(resid)
    for k in range(len(xs)):
        if abs(resid[k]) <= tol:
            z[k] = 0.0
        elif err[k] > 0:
            z[k] = resid[k] / (abs(scale) * err[k])
        else:
            z[k] = math.copysign(math.inf, resid[k])
    chi2 = float(np.sum(z**2)) / max(len(xs) - 1, 1)
    entries = tuple(Entry(int(x), float(m), float(e), float(zz)) for x, m, e, zz in zip(xs, mc, exact, z))
    return SliceComparison(t, entries, scale, chi2, warning)


def sign_changes(values: np.ndarray, floor: float = 0.0) -> int:
    """Sign changes along x, ignoring entries with magnitude <= ``floor``."""
    signs = [np.sign(v) for v in values if abs(v) > floor]
    return sum(1 for a, b in zip(signs, signs[1:]) if a != b)


def write_comparison_csv(comparison: SliceComparison, fh: IO[str]) -> None:
    writer = csv.writer(fh, lineterminator="\n")
    writer.writerow(COMPARISON_FIELDS)
    for row in comparison.rows():
        writer.writerow([row["t"], row["x"]] + [format(row[k], ".17g") for k in COMPARISON_FIELDS[2:]])
