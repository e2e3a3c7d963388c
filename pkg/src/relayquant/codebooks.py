"""Codebook construction and evaluation.

Covers every quantizer family the simulator needs: explicit finite lists,
single-relay selection (SRS), unitary transforms of finite codebooks, and the
constrained continuous families

    C(eps, r) = { x : |x_q| <= 1 for all q, |x_r|^2 >= eps }

optimized per channel state by an inner maximizer.  A power-dependent variant
resolves eps = 1/log(P) at each power level, so one spec object describes a
whole family of per-power codebooks.

The continuous maximizer exploits that, for fixed magnitudes, the best phases
align every numerator term: set arg(x_q) = -arg(f_q g_q).  The numerator of
the SNR is then maximized while the denominator depends on magnitudes only,
leaving an R-dimensional magnitude search which is done on a per-axis grid
followed by a local step-halving refinement.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from typing import Optional, Union

import numpy as np

from .model import (
    MAGNITUDE_TOL,
    BeamformingVector,
    ChannelState,
    NetworkConfig,
    PowerLevel,
    best_snr,
    canonical_rows,
    relay_gains,
    snr_per_vector,
)

UNITARY_TOL = 1e-10

# Widest per-axis magnitude grids used by default; refinement narrows the rest.
def default_grid_resolution(relay_count: int) -> int:
    return 64 if relay_count <= 2 else 32


class CodebookError(ValueError):
    pass


@dataclass(frozen=True, eq=False)
class FiniteCodebook:
    """A finite list of beamforming vectors, stored as a (K, R) complex matrix.

    `admissible` records whether every vector has a unit-magnitude peak
    (infinity norm 1 within 1e-9), a structural property some checks key on.
    """

    vectors: np.ndarray
    label: str = ""

    def __post_init__(self):
        mat = np.asarray(self.vectors, dtype=np.complex128)
        if mat.ndim == 1:
            mat = mat[None, :]
        if mat.ndim != 2 or mat.shape[0] < 1 or mat.shape[1] < 1:
            raise CodebookError("codebook must be a non-empty list of non-empty vectors")
        mags = np.abs(mat)
        if not np.all(np.isfinite(mags)):
            raise CodebookError("codebook entries must be finite")
        worst = float(mags.max())
        if worst > 1.0 + MAGNITUDE_TOL:
            raise CodebookError(f"beamforming magnitude {worst} exceeds 1")
        object.__setattr__(self, "vectors", mat)

    def __len__(self) -> int:
        return self.vectors.shape[0]

    @property
    def relay_count(self) -> int:
        return self.vectors.shape[1]

    @property
    def admissible(self) -> bool:
        peaks = np.abs(self.vectors).max(axis=1)
        return bool(np.all(np.abs(peaks - 1.0) <= 1e-9))


@dataclass(frozen=True)
class SrsSpec:
    """Single-relay selection: R vectors, the r-th puts e^{j theta_r} on relay r."""

    theta: tuple[float, ...]

    def __post_init__(self):
        object.__setattr__(self, "theta", tuple(float(t) for t in self.theta))
        if len(self.theta) < 1:
            raise CodebookError("srs spec needs at least one phase")


@dataclass(frozen=True)
class UnitarySpec:
    """Right-multiply every vector of a finite base codebook by a unitary matrix."""

    base: "FiniteSpec"
    matrix: np.ndarray

    def __post_init__(self):
        mat = np.asarray(self.matrix, dtype=np.complex128)
        deviation = _unitary_deviation(mat)
        if deviation > UNITARY_TOL:
            raise CodebookError(f"matrix is not unitary: max |U U^H - I| = {deviation:.3e}")
        object.__setattr__(self, "matrix", mat)


@dataclass(frozen=True)
class ConstrainedSpec:
    """Continuous family with the pinned relay forced to |x_r|^2 >= epsilon."""

    epsilon: float
    pinned_relay: int

    def __post_init__(self):
        e = float(self.epsilon)
        if not 0.0 <= e <= 1.0:
            raise CodebookError(f"epsilon must lie in [0, 1], got {e}")
        if int(self.pinned_relay) < 1:
            raise CodebookError("pinned_relay is a 1-based relay index")
        object.__setattr__(self, "epsilon", e)
        object.__setattr__(self, "pinned_relay", int(self.pinned_relay))


@dataclass(frozen=True)
class FullCsiSpec:
    """Unconstrained short-term-power beamforming (epsilon = 0, no pinned relay)."""


@dataclass(frozen=True)
class PowerDependentSpec:
    """Constrained family whose bound tightens with power: epsilon = 1/log P."""

    pinned_relay: int

    def __post_init__(self):
        if int(self.pinned_relay) < 1:
            raise CodebookError("pinned_relay is a 1-based relay index")
        object.__setattr__(self, "pinned_relay", int(self.pinned_relay))


FiniteSpec = Union[FiniteCodebook, SrsSpec, UnitarySpec]
CodebookSpec = Union[FiniteSpec, ConstrainedSpec, FullCsiSpec, PowerDependentSpec]


def _unitary_deviation(mat: np.ndarray) -> float:
    if mat.ndim != 2 or mat.shape[0] != mat.shape[1]:
        return math.inf
    gram = mat @ mat.conj().T
    return float(np.abs(gram - np.eye(mat.shape[0])).max())


def make_srs(relay_count: int, theta) -> FiniteCodebook:
    """Build the single-relay selection codebook for the given per-relay phases."""
    theta = np.asarray(theta, dtype=float)
    if theta.shape != (relay_count,):
        raise CodebookError(
            f"theta must have length {relay_count}, got shape {theta.shape}")
    mat = np.zeros((relay_count, relay_count), dtype=np.complex128)
    for r in range(relay_count):
        mat[r, r] = np.exp(1j * theta[r])
    return FiniteCodebook(mat, label=f"srs({relay_count})")


def apply_unitary(cb: FiniteCodebook, matrix) -> FiniteCodebook:
    """Transform a codebook by a unitary matrix: each row vector x becomes x U."""
    mat = np.asarray(matrix, dtype=np.complex128)
    deviation = _unitary_deviation(mat)
    if deviation > UNITARY_TOL:
        raise CodebookError(f"matrix is not unitary: max |U U^H - I| = {deviation:.3e}")
    if mat.shape[0] != cb.relay_count:
        raise CodebookError("matrix size does not match codebook vector length")
    k, r = cb.vectors.shape
    out = np.zeros((k, r), dtype=np.complex128)
    for q in range(r):
        for rr in range(r):
            out[:, q] += cb.vectors[:, rr] * mat[rr, q]
    label = f"{cb.label}*U" if cb.label else "unitary"
    return FiniteCodebook(out, label=label)


def to_finite(spec: FiniteSpec) -> FiniteCodebook:
    """Materialize a power-independent finite spec into its vector list."""
    if isinstance(spec, FiniteCodebook):
        return spec
    if isinstance(spec, SrsSpec):
        return make_srs(len(spec.theta), spec.theta)
    if isinstance(spec, UnitarySpec):
        return apply_unitary(to_finite(spec.base), spec.matrix)
    raise CodebookError(f"not a finite codebook spec: {type(spec).__name__}")


def resolve_epsilon(spec, power: PowerLevel) -> float:
    """Constraint level of a continuous family at a given power."""
    if isinstance(spec, FullCsiSpec):
        return 0.0
    if isinstance(spec, ConstrainedSpec):
        return spec.epsilon
    if isinstance(spec, PowerDependentSpec):
        logp = math.log(power.linear)
        if logp < 1.0:
            raise CodebookError(
                f"power-dependent constraint needs P >= e, got P = {power.linear:g}")
        return 1.0 / logp
    raise CodebookError(f"not a constrained codebook spec: {type(spec).__name__}")


# ---------------------------------------------------------------------------
# Continuous-family inner maximizer
# ---------------------------------------------------------------------------

_REFINE_HALVINGS = 10
_MAX_GRID_CELLS = 8_000_000  # per slice of trials, keeps intermediates ~64 MB


def _axis_points(lo: float, grid: int) -> np.ndarray:
    pts = np.linspace(lo, 1.0, grid)
    return np.unique(pts)


def _magnitude_grid(relay_count: int, grid: int, pinned: Optional[int], lo: float):
    axes = []
    for r in range(relay_count):
        axes.append(_axis_points(lo if pinned is not None and r == pinned else 0.0, grid))
    mesh = np.meshgrid(*axes, indexing="ij")
    combos = np.stack([m.reshape(-1) for m in mesh], axis=1)
    spacing = np.array([(ax[-1] - ax[0]) / (len(ax) - 1) if len(ax) > 1 else 0.0
                        for ax in axes])
    return combos, spacing


def _refine(mag, us, ws, p0, spacing, lo_bounds):
    """Coordinate refinement: try +/- step on each axis, halving the step.

    Keeps running numerator/denominator sums so each probe is O(n), not O(nR).
    Returns the refined SNR values; `mag` is updated in place.
    """
    num = np.zeros(mag.shape[0])
    den = np.ones(mag.shape[0])
    for r in range(mag.shape[1]):
        num += us[:, r] * mag[:, r]
        den += ws[:, r] * mag[:, r] * mag[:, r]
    val = p0 * num * num / den
    step = spacing.copy()
    for _ in range(_REFINE_HALVINGS):
        for r in range(mag.shape[1]):
            if step[r] == 0.0:
                continue
            for sign in (1.0, -1.0):
                col = np.clip(mag[:, r] + sign * step[r], lo_bounds[r], 1.0)
                num_c = num + us[:, r] * (col - mag[:, r])
                den_c = den + ws[:, r] * (col * col - mag[:, r] * mag[:, r])
                cand = p0 * num_c * num_c / den_c
                gain = cand > val
                if np.any(gain):
                    mag[gain, r] = col[gain]
                    num[gain] = num_c[gain]
                    den[gain] = den_c[gain]
                    val[gain] = cand[gain]
        step *= 0.5
    return val


def constrained_best_snr(f: np.ndarray, g: np.ndarray, config: NetworkConfig,
                         power: PowerLevel, epsilon: float,
                         pinned_relay: Optional[int],
                         grid_resolution: Optional[int] = None):
    """Approximate per-state maximum SNR over a constrained family, vectorized.

    f, g: (n, R).  Returns (magnitudes (n, R), snr (n,)).  Phases are implied:
    the maximizer co-phases, arg(x_q) = -arg(f_q g_q).  The magnitude search
    runs a per-axis grid (pinned axis restricted to [sqrt(eps), 1], endpoints
    included) and then one coordinate refinement pass halving the step
    _REFINE_HALVINGS times.
    """
    n, r_count = f.shape
    grid = grid_resolution or default_grid_resolution(r_count)
    if grid < 2:
        raise CodebookError("grid_resolution must be at least 2")
    if not 0.0 <= epsilon <= 1.0:
        raise CodebookError(f"epsilon must lie in [0, 1], got {epsilon}")
    pinned0 = None
    if pinned_relay is not None:
        if not 1 <= pinned_relay <= r_count:
            raise CodebookError(f"pinned relay {pinned_relay} out of range 1..{r_count}")
        pinned0 = pinned_relay - 1

    p = power.linear
    p0 = config.power_scalers[0] * p
    rho = relay_gains(f, config, power)
    u = np.abs(f) * np.abs(g) * np.sqrt(rho)
    w = (g.real * g.real + g.imag * g.imag) * rho

    lo = math.sqrt(epsilon) if pinned0 is not None else 0.0
    combos, spacing = _magnitude_grid(r_count, grid, pinned0, lo)
    n_cells = combos.shape[0]
    lo_bounds = np.zeros(r_count)
    if pinned0 is not None:
        lo_bounds[pinned0] = lo

    # The grid stage only picks a refinement start, so it runs in float32 on
    # contiguous per-axis rows; the refinement recomputes values in float64.
    axis32 = np.ascontiguousarray(combos.T, dtype=np.float32)
    axis32sq = np.ascontiguousarray((combos * combos).T, dtype=np.float32)
    u32 = u.astype(np.float32)
    w32 = w.astype(np.float32)

    best_mag = np.empty((n, r_count))
    best_val = np.empty(n)
    slice_len = min(n, max(64, _MAX_GRID_CELLS // max(1, n_cells)))
    num = np.empty((slice_len, n_cells), dtype=np.float32)
    den = np.empty((slice_len, n_cells), dtype=np.float32)
    work = np.empty((slice_len, n_cells), dtype=np.float32)
    for start in range(0, n, slice_len):
        sl = slice(start, min(n, start + slice_len))
        us, ws = u32[sl], w32[sl]
        m = us.shape[0]
        numv, denv, workv = num[:m], den[:m], work[:m]
        np.multiply(us[:, 0, None], axis32[0][None, :], out=numv)
        np.multiply(ws[:, 0, None], axis32sq[0][None, :], out=denv)
        denv += 1.0
        for r in range(1, r_count):
            np.multiply(us[:, r, None], axis32[r][None, :], out=workv)
            numv += workv
            np.multiply(ws[:, r, None], axis32sq[r][None, :], out=workv)
            denv += workv
        numv *= numv
        numv /= denv
        pick = np.argmax(numv, axis=1)
        mag = combos[pick].copy()
        val = _refine(mag, u[sl], w[sl], p0, spacing, lo_bounds)
        best_mag[sl] = mag
        best_val[sl] = val
    return best_mag, best_val


def constrained_best_vector(spec, h: ChannelState, config: NetworkConfig,
                            power: PowerLevel,
                            grid_resolution: Optional[int] = None):
    """Approximate SNR maximizer over a constrained family at one channel state.

    Returns (BeamformingVector, snr).  The reported SNR is evaluated on the
    co-phased closed form, which equals received_snr of the returned vector
    up to roundoff.
    """
    epsilon = resolve_epsilon(spec, power)
    pinned = getattr(spec, "pinned_relay", None)
    f = h.f[None, :]
    g = h.g[None, :]
    mag, val = constrained_best_snr(f, g, config, power, epsilon, pinned, grid_resolution)
    phases = np.exp(-1j * np.angle(h.f * h.g))
    return BeamformingVector(mag[0] * phases), float(val[0])


# ---------------------------------------------------------------------------
# Evaluators: one per-channel-state "best vector" interface for all families
# ---------------------------------------------------------------------------


class FiniteEvaluator:
    """Brute-force argmax over an explicit vector list (canonical phases)."""

    def __init__(self, codebook: FiniteCodebook):
        self.codebook = codebook
        self._canonical = canonical_rows(codebook.vectors)

    def best_snr(self, f, g, config: NetworkConfig, power: PowerLevel) -> np.ndarray:
        return best_snr(self._canonical, f, g, config, power)

    def choose(self, h: ChannelState, config: NetworkConfig, power: PowerLevel):
        snrs = snr_per_vector(self._canonical, h.f[None, :], h.g[None, :], config, power)[0]
        idx = int(np.argmax(snrs))
        return idx, BeamformingVector(self.codebook.vectors[idx])


class ConstrainedEvaluator:
    """Inner-maximizer evaluation of a constrained continuous family."""

    def __init__(self, epsilon: float, pinned_relay: Optional[int],
                 grid_resolution: Optional[int] = None):
        if not 0.0 <= epsilon <= 1.0:
            raise CodebookError(f"epsilon must lie in [0, 1], got {epsilon}")
        self.epsilon = float(epsilon)
        self.pinned_relay = pinned_relay
        self.grid_resolution = grid_resolution

    def best_snr(self, f, g, config: NetworkConfig, power: PowerLevel) -> np.ndarray:
        _, val = constrained_best_snr(f, g, config, power, self.epsilon,
                                      self.pinned_relay, self.grid_resolution)
        return val

    def choose(self, h: ChannelState, config: NetworkConfig, power: PowerLevel):
        mag, val = constrained_best_snr(h.f[None, :], h.g[None, :], config, power,
                                        self.epsilon, self.pinned_relay,
                                        self.grid_resolution)
        phases = np.exp(-1j * np.angle(h.f * h.g))
        return BeamformingVector(mag[0] * phases), float(val[0])


def resolve_codebook(spec: CodebookSpec, power: PowerLevel,
                     grid_resolution: Optional[int] = None):
    """Bind a codebook spec to a power level, yielding a per-state evaluator.

    Finite specs ignore the power level; the power-dependent family resolves
    its constraint at P first.  This is the map "power level -> codebook"
    realized as something callable per channel state.
    """
    if isinstance(spec, (FiniteCodebook, SrsSpec, UnitarySpec)):
        return FiniteEvaluator(to_finite(spec))
    if isinstance(spec, (ConstrainedSpec, FullCsiSpec, PowerDependentSpec)):
        eps = resolve_epsilon(spec, power)
        return ConstrainedEvaluator(eps, getattr(spec, "pinned_relay", None),
                                    grid_resolution)
    raise CodebookError(f"unknown codebook spec: {type(spec).__name__}")


# ---------------------------------------------------------------------------
# Phase-class utilities (SNR is invariant under a global phase per vector)
# ---------------------------------------------------------------------------


def phase_classes(vectors: np.ndarray, tol: float = 1e-12) -> np.ndarray:
    """Distinct vectors up to a global phase, compared entrywise within tol."""
    canon = canonical_rows(np.asarray(vectors, dtype=np.complex128))
    kept: list[np.ndarray] = []
    for row in canon:
        if not any(np.abs(row - rep).max() <= tol for rep in kept):
            kept.append(row)
    return np.stack(kept) if kept else np.empty((0, canon.shape[1]), dtype=np.complex128)


def same_codebook(a, b, tol: float = 1e-12) -> bool:
    """Multiset equality of two vector lists up to global phases and tol."""
    av = canonical_rows(_vectors_of(a))
    bv = canonical_rows(_vectors_of(b))
    if av.shape != bv.shape:
        return False
    remaining = list(range(bv.shape[0]))
    for row in av:
        hit = next((j for j in remaining if np.abs(row - bv[j]).max() <= tol), None)
        if hit is None:
            return False
        remaining.remove(hit)
    return True


def _vectors_of(cb) -> np.ndarray:
    if isinstance(cb, FiniteCodebook):
        return cb.vectors
    mat = np.asarray(cb, dtype=np.complex128)
    return mat[None, :] if mat.ndim == 1 else mat


# ---------------------------------------------------------------------------
# JSON wire format: complex numbers are always [re, im] pairs
# ---------------------------------------------------------------------------


def _pairs_from_vector(v: np.ndarray) -> list[list[float]]:
    return [[float(z.real), float(z.imag)] for z in v]


def _vector_from_pairs(pairs, where: str) -> np.ndarray:
    try:
        return np.array([complex(float(p[0]), float(p[1])) for p in pairs],
                        dtype=np.complex128)
    except (TypeError, ValueError, IndexError) as exc:
        raise CodebookError(f"{where}: complex entries must be [re, im] pairs") from exc


def spec_to_json(spec: CodebookSpec) -> dict:
    if isinstance(spec, FiniteCodebook):
        return {"label": spec.label,
                "vectors": [_pairs_from_vector(v) for v in spec.vectors]}
    if isinstance(spec, SrsSpec):
        return {"type": "srs", "theta": list(spec.theta)}
    if isinstance(spec, UnitarySpec):
        return {"type": "unitary", "base": spec_to_json(spec.base),
                "matrix": [_pairs_from_vector(row) for row in spec.matrix]}
    if isinstance(spec, ConstrainedSpec):
        return {"type": "constrained", "epsilon": spec.epsilon,
                "pinned_relay": spec.pinned_relay}
    if isinstance(spec, FullCsiSpec):
        return {"type": "full_csi"}
    if isinstance(spec, PowerDependentSpec):
        return {"type": "power_dep_constrained", "pinned_relay": spec.pinned_relay}
    raise CodebookError(f"cannot serialize {type(spec).__name__}")


def spec_from_json(obj: dict, where: str = "codebook") -> CodebookSpec:
    if not isinstance(obj, dict):
        raise CodebookError(f"{where}: expected an object")
    kind = obj.get("type")
    if kind is None and "vectors" in obj:
        kind = "explicit"
    if kind == "explicit":
        vectors = obj.get("vectors")
        if not isinstance(vectors, list) or not vectors:
            raise CodebookError(f"{where}.vectors: need a non-empty list of vectors")
        rows = [_vector_from_pairs(v, f"{where}.vectors[{i}]") for i, v in enumerate(vectors)]
        lengths = {len(r) for r in rows}
        if len(lengths) != 1:
            raise CodebookError(f"{where}.vectors: vector length mismatch {sorted(lengths)}")
        return FiniteCodebook(np.stack(rows), label=str(obj.get("label", "")))
    if kind == "srs":
        return SrsSpec(tuple(obj.get("theta", ())))
    if kind == "unitary":
        base = spec_from_json(obj.get("base", {}), f"{where}.base")
        if not isinstance(base, (FiniteCodebook, SrsSpec, UnitarySpec)):
            raise CodebookError(f"{where}.base: must be a finite codebook spec")
        matrix = obj.get("matrix")
        if not isinstance(matrix, list):
            raise CodebookError(f"{where}.matrix: need a square complex matrix")
        rows = [_vector_from_pairs(r, f"{where}.matrix[{i}]") for i, r in enumerate(matrix)]
        return UnitarySpec(base, np.stack(rows))
    if kind == "constrained":
        return ConstrainedSpec(obj.get("epsilon", -1.0), obj.get("pinned_relay", 0))
    if kind == "full_csi":
        return FullCsiSpec()
    if kind == "power_dep_constrained":
        return PowerDependentSpec(obj.get("pinned_relay", 0))
    raise CodebookError(f"{where}: unknown codebook type {kind!r}")


def load_codebook_file(path) -> CodebookSpec:
    with open(path, "r", encoding="utf-8") as fh:
        try:
            obj = json.load(fh)
        except json.JSONDecodeError as exc:
            raise CodebookError(f"{path}: line {exc.lineno} column {exc.colno}: {exc.msg}") from exc
    return spec_from_json(obj, where=str(path))
