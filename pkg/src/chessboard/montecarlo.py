"""Single-path Monte Carlo: sample, entwine, deposit.

Each loop samples a chessboard path with a per-step flip probability,
entwines it with its orthogonal twin and records the signed time direction
of every traversed bond on the lattice.  Loop ``i`` draws its bits from a
fixed window of a Philox stream keyed by the seed, so results do not depend
on how loop indices are split between workers.
"""

from __future__ import annotations

import csv
import json
import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from functools import lru_cache
from itertools import product
from typing import IO

import numpy as np

from . import _engine
from .kernel import GuardError
from .paths import DIRECTIONS, PLUS, Path, Site, corner_count
from .twins import Channel, EntwinedLoop, entwine

logger = logging.getLogger(__name__)

ORACLE_LIMIT = 16
CHUNK = 1 << 15
CHANNELS = (Channel.A, Channel.B)
COUNTS_FIELDS = ("t", "x", "sigma", "channel", "count")
ORACLE_FIELDS = ("t", "x", "sigma", "channel", "mean")


@dataclass(frozen=True)
class SimConfig:
    n_steps: int
    corner_prob: float
    loops: int = 1
    seed: int = 0
    workers: int = 1

    def __post_init__(self):
        if self.n_steps < 1:
            raise ValueError("n_steps must be >= 1")
        if not 0.0 <= self.corner_prob <= 1.0:
            raise ValueError(f"corner_prob must lie in [0, 1], got {self.corner_prob}")
        if self.loops < 1:
            raise ValueError("loops must be >= 1")
        if not 0 <= self.seed < 2**64:
            raise ValueError("seed must be an unsigned 64-bit integer")
        if self.workers < 1:
            raise ValueError("workers must be >= 1")

    @property
    def effective_weight(self) -> float:
        """Boltzmann base a_eff = p/(1-p) induced by the flip process."""
        p = self.corner_prob
        return math.inf if p == 1.0 else p / (1.0 - p)


def _sigma_index(sigma: int) -> int:
    return 0 if sigma == PLUS else 1


def _channel_index(channel: Channel) -> int:
    return 0 if Channel(channel) is Channel.A else 1


def lattice_shape(n_steps: int) -> tuple[int, int, int, int]:
    # extension can double the path length; |x| <= t bounds space
    return (2, 2, 2 * n_steps + 1, 4 * n_steps + 1)


@dataclass(eq=False)
class ChargeLattice:
    """Integer deposits ``counts[channel, sigma, t, x + offset]``."""

    config: SimConfig
    counts: np.ndarray = field(repr=False)
    loops_completed: int = 0
    max_t: int = 0

    @classmethod
    def empty(cls, config: SimConfig) -> ChargeLattice:
        return cls(config, np.zeros(lattice_shape(config.n_steps), dtype=np.int64))

    @property
    def offset(self) -> int:
        return 2 * self.config.n_steps

    def get(self, site: Site, sigma: int, channel: Channel) -> int:
        x, t = site
        if not 0 <= t < self.counts.shape[2] or abs(x) > self.offset:
            return 0
        return int(self.counts[_channel_index(channel), _sigma_index(sigma), t, x + self.offset])

    def items(self) -> list[tuple[Site, int, Channel, int]]:
        """Nonzero cells sorted by (t, x, sigma, channel)."""
        return _nonzero_items(self.counts, self.offset)

    def as_dict(self) -> dict[tuple[Site, int, Channel], int]:
        return {(s, sig, ch): v for s, sig, ch, v in self.items()}

    def slice_sums(self) -> np.ndarray:
        """Net deposit per time slice, summed over x, sigma and channel."""
        return self.counts.sum(axis=(0, 1, 3))


def _nonzero_items(arr: np.ndarray, offset: int) -> list:
    out = []
    for ci, si, t, xi in zip(*np.nonzero(arr)):
        v = arr[ci, si, t, xi]
        out.append((Site(int(xi) - offset, int(t)), DIRECTIONS[si], CHANNELS[ci], v.item()))
    out.sort(key=lambda r: (r[0].t, r[0].x, r[1], r[2].value))
    return out


def sample_path(n: int, p_c: float, rng: np.random.Generator) -> Path:
    """First step +1, then flip direction with probability ``p_c`` per step."""
    if not 0.0 <= p_c <= 1.0:
        raise ValueError(f"p_c must lie in [0, 1], got {p_c}")
    flips = rng.random(n - 1) < p_c
    steps, d = [PLUS], PLUS
    for f in flips:
        d = -d if f else d
        steps.append(d)
    return Path(steps)


def deposit(loop: EntwinedLoop, lattice: ChargeLattice) -> ChargeLattice:
    """Add each move's time direction at the upper end of its bond, in place."""
    off = lattice.offset
    T = lattice.counts.shape[2] - 1
    for move, s0, s1 in loop.segments():
        upper, lower = (s1, s0) if s1.t > s0.t else (s0, s1)
        if upper.t > T or abs(upper.x) > off:
            raise ValueError(f"loop leaves the lattice at {upper}")
        sigma = upper.x - lower.x
        ci, si = _channel_index(move.channel), _sigma_index(sigma)
        lattice.counts[ci, si, upper.t, upper.x + off] += move.time_dir
        lattice.max_t = max(lattice.max_t, upper.t)
    return lattice


# --- random streams -------------------------------------------------------

def _draws_per_loop(n: int) -> int:
    return 4 * math.ceil((n - 1) / 4)


def loop_bits(seed: int, n: int, first: int, count: int) -> np.ndarray:
    """Raw 64-bit draws for loops ``first .. first+count-1``, one row per loop."""
    width = _draws_per_loop(n)
    if width == 0:
        return np.zeros((count, 0), dtype=np.uint64)
    bitgen = np.random.Philox(key=seed, counter=first * (width // 4))
    return bitgen.random_raw(count * width).reshape(count, width)


def _threshold(p_c: float) -> np.uint64:
    # flip iff the top 53 bits, read as a uniform in [0, 1), fall below p_c
    return np.uint64(int(p_c * 2**53))


def loop_path(config: SimConfig, index: int) -> Path:
    """The base path the engine samples for loop ``index``."""
    bits = loop_bits(config.seed, config.n_steps, index, 1)[0]
    thr = _threshold(config.corner_prob)
    steps, d = [PLUS], PLUS
    for k in range(config.n_steps - 1):
        if (bits[k] >> np.uint64(11)) < thr:
            d = -d
        steps.append(d)
    return Path(steps)


# --- runs -------------------------------------------------------------------

def run_range(config: SimConfig, first: int, stop: int, chunk: int = CHUNK) -> ChargeLattice:
    """Accumulate loops ``first .. stop-1`` into a fresh lattice."""
    lattice = ChargeLattice.empty(config)
    thr = _threshold(config.corner_prob)
    for lo in range(first, stop, chunk):
        hi = min(stop, lo + chunk)
        bits = loop_bits(config.seed, config.n_steps, lo, hi - lo)
        t = _engine.accumulate(bits, config.n_steps, thr, lattice.counts, lattice.offset)
        lattice.max_t = max(lattice.max_t, int(t))
    lattice.loops_completed = stop - first
    return lattice


def shard_bounds(loops: int, workers: int) -> list[tuple[int, int]]:
    """Contiguous, near-equal blocks of loop indices, one per worker."""
    edges = [loops * k // workers for k in range(workers + 1)]
    return [(a, b) for a, b in zip(edges, edges[1:]) if b > a]


def run(config: SimConfig) -> ChargeLattice:
    shards = shard_bounds(config.loops, config.workers)
    if len(shards) == 1:
        parts = [run_range(config, *shards[0])]
    else:
        with ThreadPoolExecutor(max_workers=len(shards)) as pool:
            parts = list(pool.map(lambda b: run_range(config, *b), shards))
    total = ChargeLattice.empty(config)
    for part in parts:
        total = merge(total, part)
    total.config = config
    logger.info("completed %d loops (n=%d, p_c=%g)", total.loops_completed,
                config.n_steps, config.corner_prob)
    return total


def merge(a: ChargeLattice, b: ChargeLattice) -> ChargeLattice:
    ka = (a.config.n_steps, a.config.corner_prob, a.config.seed)
    kb = (b.config.n_steps, b.config.corner_prob, b.config.seed)
    if ka != kb:
        raise ValueError(f"cannot merge lattices from different runs: {ka} vs {kb}")
    return ChargeLattice(
        config=a.config,
        counts=a.counts + b.counts,
        loops_completed=a.loops_completed + b.loops_completed,
        max_t=max(a.max_t, b.max_t),
    )


# --- exact expectation by enumeration --------------------------------------

@lru_cache(maxsize=4)
def _patterns_by_corners(n: int) -> tuple[np.ndarray, np.ndarray]:
    """Sum of deposit patterns (and of their absolute values) grouped by R."""
    scratch = SimConfig(n_steps=n, corner_prob=0.0)
    signed = np.zeros((n,) + lattice_shape(n))
    visits = np.zeros_like(signed)
    for tail in product(DIRECTIONS, repeat=n - 1):
        path = Path((PLUS,) + tail)
        lat = deposit(entwine(path), ChargeLattice.empty(scratch))
        R = corner_count(path)
        signed[R] += lat.counts
        visits[R] += np.abs(lat.counts)
    signed.flags.writeable = False
    visits.flags.writeable = False
    return signed, visits


def expected_counts(n: int, p_c: float, moment: int = 1) -> np.ndarray:
    """Exact per-loop expectation of deposits (moment=1) or squared deposits (moment=2).

    Same layout as :attr:`ChargeLattice.counts`.  Enumerates all 2**(n-1)
    base paths; each loop puts at most one unit deposit on any key, so the
    second moment is the visit probability.
    """
    if n > ORACLE_LIMIT:
        raise GuardError(f"expectation oracle limited to n <= {ORACLE_LIMIT}, got {n}")
    if not 0.0 <= p_c <= 1.0:
        raise ValueError(f"p_c must lie in [0, 1], got {p_c}")
    signed, visits = _patterns_by_corners(n)
    src = {1: signed, 2: visits}[moment]
    R = np.arange(n)
    probs = p_c**R * (1.0 - p_c) ** (n - 1 - R)  # 0.0**0 == 1
    return np.tensordot(probs, src, axes=1)


def expected_lattice(n: int, p_c: float) -> dict[tuple[Site, int, Channel], float]:
    arr = expected_counts(n, p_c)
    return {(s, sig, ch): v for s, sig, ch, v in _nonzero_items(arr, 2 * n)}


# --- files ------------------------------------------------------------------

def write_counts_csv(lattice: ChargeLattice, fh: IO[str]) -> None:
    writer = csv.writer(fh, lineterminator="\n")
    writer.writerow(COUNTS_FIELDS)
    for site, sigma, ch, v in lattice.items():
        writer.writerow([site.t, site.x, f"{sigma:+d}", ch.value, v])


def write_expected_csv(n: int, p_c: float, fh: IO[str]) -> None:
    writer = csv.writer(fh, lineterminator="\n")
    writer.writerow(ORACLE_FIELDS)
    for (site, sigma, ch), v in expected_lattice(n, p_c).items():
        writer.writerow([site.t, site.x, f"{sigma:+d}", ch.value, format(v, ".17g")])


def metadata(lattice: ChargeLattice) -> dict:
    meta = asdict(lattice.config)
    meta["loops"] = lattice.loops_completed
    meta["max_t"] = lattice.max_t
    return {k: meta[k] for k in ("n_steps", "corner_prob", "loops", "seed", "workers", "max_t")}


def read_counts(csv_fh: IO[str], meta_fh: IO[str]) -> ChargeLattice:
    meta = json.load(meta_fh)
    config = SimConfig(
        n_steps=int(meta["n_steps"]),
        corner_prob=float(meta["corner_prob"]),
        loops=int(meta["loops"]),
        seed=int(meta["seed"]),
        workers=int(meta["workers"]),
    )
    lattice = ChargeLattice.empty(config)
    reader = csv.DictReader(csv_fh)
    if tuple(reader.fieldnames or ()) != COUNTS_FIELDS:
        raise ValueError(f"unexpected columns {reader.fieldnames}")
    off = lattice.offset
    for row in reader:
        ci = _channel_index(Channel(row["channel"]))
        si = _sigma_index(int(row["sigma"]))
        lattice.counts[ci, si, int(row["t"]), int(row["x"]) + off] = int(row["count"])
    lattice.loops_completed = config.loops
    lattice.max_t = int(meta["max_t"])
    return lattice
