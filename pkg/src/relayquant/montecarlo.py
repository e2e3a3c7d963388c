"""Symbol error rate estimation and diversity-order fitting.

The SER of a quantized beamforming scheme at power P is the channel average
of the Gaussian tail of the selected SNR,

    SER(P) = E_h[ Q( sqrt(2 * SNR_best(h, P)) ) ],

so the estimator averages smooth Q values instead of counting rare symbol
flips, which keeps the variance workable at small error rates.  Trials are
split into fixed-size chunks; chunk c of grid point i draws from the counter
stream (seed, i, c) and partial sums are combined in chunk order, so the
output is bit-identical no matter how many worker threads run.

Diversity order is estimated as the log-log slope of the SER curve over a
power window: the fit is -log10(ser) against log10(P).
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Optional, Sequence, TextIO

import numpy as np
from scipy import special

from . import rng as _rng
from .codebooks import CodebookSpec, resolve_codebook
from .model import NetworkConfig, PowerLevel, sample_channels

CHUNK_TRIALS = 4096
CSV_HEADER = "p_db,ser,std_err,trials"


def gaussian_tail(x):
    """Q(x) = P[N(0,1) > x], evaluated as erfc(x / sqrt(2)) / 2."""
    return 0.5 * special.erfc(np.asarray(x, dtype=float) / math.sqrt(2.0))


def worker_count() -> int:
    """Thread cap for simulation chunks; RELAYQUANT_THREADS overrides."""
    env = os.environ.get("RELAYQUANT_THREADS")
    if env is not None:
        try:
            n = int(env)
        except ValueError as exc:
            raise ValueError(f"RELAYQUANT_THREADS must be an integer, got {env!r}") from exc
        if n < 1:
            raise ValueError(f"RELAYQUANT_THREADS must be >= 1, got {n}")
        return n
    return min(8, os.cpu_count() or 1)


@dataclass(frozen=True)
class SimulationPlan:
    """Everything that determines one SER curve, including its randomness."""

    network: NetworkConfig
    codebook: CodebookSpec
    p_grid_db: tuple[float, ...]
    trials_per_point: int
    seed: int
    grid_resolution: Optional[int] = None

    def __post_init__(self):
        grid = tuple(float(p) for p in self.p_grid_db)
        if not grid:
            raise ValueError("p_grid_db must not be empty")
        if any(b <= a for a, b in zip(grid, grid[1:])):
            raise ValueError("p_grid_db must be strictly ascending")
        if int(self.trials_per_point) < 1:
            raise ValueError("trials_per_point must be >= 1")
        object.__setattr__(self, "p_grid_db", grid)
        object.__setattr__(self, "trials_per_point", int(self.trials_per_point))
        object.__setattr__(self, "seed", int(self.seed))


@dataclass(frozen=True)
class SerCurve:
    """Ordered rows of (p_db, ser, std_err, trials)."""

    p_db: tuple[float, ...]
    ser: tuple[float, ...]
    std_err: tuple[float, ...]
    trials: tuple[int, ...]

    def rows(self):
        return zip(self.p_db, self.ser, self.std_err, self.trials)

    def write_csv(self, fh: TextIO) -> None:
        fh.write(CSV_HEADER + "\n")
        for p, s, e, t in self.rows():
            fh.write(f"{p!r},{s!r},{e!r},{t}\n")

    def to_json(self) -> dict:
        return {
            "rows": [
                {"p_db": p, "ser": s, "std_err": e, "trials": t}
                for p, s, e, t in self.rows()
            ]
        }

    @classmethod
    def read_csv(cls, fh: TextIO) -> "SerCurve":
        header = fh.readline().strip()
        if header != CSV_HEADER:
            raise ValueError(f"bad curve header {header!r}, expected {CSV_HEADER!r}")
        p, s, e, t = [], [], [], []
        for line in fh:
            line = line.strip()
            if not line:
                continue
            parts = line.split(",")
            if len(parts) != 4:
                raise ValueError(f"bad curve row {line!r}")
            p.append(float(parts[0]))
            s.append(float(parts[1]))
            e.append(float(parts[2]))
            t.append(int(parts[3]))
        return cls(tuple(p), tuple(s), tuple(e), tuple(t))


def _point_chunks(trials: int):
    return [(c, min(CHUNK_TRIALS, trials - c * CHUNK_TRIALS))
            for c in range((trials + CHUNK_TRIALS - 1) // CHUNK_TRIALS)]


def estimate_ser(plan: SimulationPlan) -> SerCurve:
    """Monte Carlo SER at every grid point of the plan.

    Deterministic for a fixed plan: chunk randomness is addressed by
    (seed, point, chunk) and partial sums combine in chunk order, so worker
    count never changes the output bits.
    """
    config = plan.network
    workers = worker_count()
    p_out, ser_out, err_out, n_out = [], [], [], []
    for point, p_db in enumerate(plan.p_grid_db):
        power = PowerLevel.from_db(p_db)
        evaluator = resolve_codebook(plan.codebook, power, plan.grid_resolution)

        def run_chunk(chunk_size, _point=point, _power=power, _ev=evaluator):
            chunk, size = chunk_size
            gen = _rng.stream(plan.seed, _point, chunk)
            f, g = sample_channels(config, gen, size)
            snr = _ev.best_snr(f, g, config, _power)
            q = gaussian_tail(np.sqrt(2.0 * snr))
            return float(q.sum()), float(np.square(q).sum())

        chunks = _point_chunks(plan.trials_per_point)
        if workers == 1 or len(chunks) == 1:
            partials = [run_chunk(c) for c in chunks]
        else:
            with ThreadPoolExecutor(max_workers=workers) as pool:
                partials = list(pool.map(run_chunk, chunks))

        total = 0.0
        total_sq = 0.0
        for s1, s2 in partials:
            total += s1
            total_sq += s2
        n = plan.trials_per_point
        mean = total / n
        if n > 1:
            var = max(0.0, (total_sq - n * mean * mean) / (n - 1))
            std_err = math.sqrt(var / n)
        else:
            std_err = 0.0
        p_out.append(float(p_db))
        ser_out.append(mean)
        err_out.append(std_err)
        n_out.append(n)
    return SerCurve(tuple(p_out), tuple(ser_out), tuple(err_out), tuple(n_out))


@dataclass(frozen=True)
class DiversityEstimate:
    """Fitted high-power decay exponent of an SER curve."""

    slope: float
    intercept: float
    window: tuple[float, float]
    residual: float


def estimate_diversity(curve: SerCurve,
                       window: Optional[Sequence[float]] = None) -> DiversityEstimate:
    """Least-squares slope of -log10(ser) vs log10(P) over a dB window.

    The window defaults to the top 3 grid points.  Requires at least 3 curve
    points inside the window and positive SER at each (a zero estimate means
    the trial budget cannot see this regime).
    """
    if window is None:
        if len(curve.p_db) < 3:
            raise ValueError("curve has fewer than 3 points")
        window = (curve.p_db[-3], curve.p_db[-1])
    lo, hi = float(window[0]), float(window[1])
    sel = [(p, s) for p, s in zip(curve.p_db, curve.ser) if lo - 1e-9 <= p <= hi + 1e-9]
    if len(sel) < 3:
        raise ValueError(f"window [{lo}, {hi}] dB covers {len(sel)} points; need >= 3")
    if any(s <= 0.0 for _, s in sel):
        raise ValueError("insufficient trials for window: SER estimate is zero")
    x = np.array([p / 10.0 for p, _ in sel])        # log10 of linear power
    y = np.array([-math.log10(s) for _, s in sel])
    xm = x.mean()
    ym = y.mean()
    sxx = float(np.sum((x - xm) ** 2))
    slope = float(np.sum((x - xm) * (y - ym)) / sxx)
    intercept = float(ym - slope * xm)
    residual = float(np.abs(y - (slope * x + intercept)).max())
    return DiversityEstimate(slope, intercept, (lo, hi), residual)
