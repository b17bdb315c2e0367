"""Sato-Tate and p-adic Plancherel samplers, densities and Monte Carlo estimation.

Random streams
--------------
Every chunked computation derives the stream of chunk ``k`` as::

    np.random.default_rng(np.random.SeedSequence([seed, tag, k]))

where ``tag`` separates independent uses of one seed (see ``STREAM_TAGS``).
Chunk statistics are merged in chunk order, so the result depends only on
``(seed, samples, chunk_size)`` and never on the number of workers.
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from heckestat.hecke import TWO_PI, SatakePoint, angles_to_values, complete_angles
from heckestat.symfunc import KappaIndex, partition_from_kappa, schur_eval_tableaux

KINDS = ("sato-tate", "plancherel", "plancherel-local", "torus")
STREAM_TAGS = {"mc": 1, "form": 2, "sample": 3, "metropolis": 4}
DEFAULT_CHUNK = 1 << 16
MAX_REJECTION_ROUNDS = 10**6
#: Largest proposal batch drawn in one rejection round.
MAX_PROPOSALS = 1 << 16


@dataclass(frozen=True)
class MeasureSpec:
    """Which measure to sample.

    ``sato-tate`` and ``plancherel`` (at the fixed prime ``p``) live on the
    determinant-one torus.  ``plancherel-local`` is only meaningful for
    synthetic forms: the point at each prime ``p`` is drawn from the
    Plancherel measure at that same ``p``.  ``torus`` is the uniform measure on
    the full ``n``-torus with no determinant constraint.
    """

    kind: str
    n: int
    p: int | None = None

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown measure kind {self.kind!r}; expected one of {KINDS}")
        if self.n < 2:
            raise ValueError(f"rank must be >= 2, got {self.n}")
        if self.kind == "plancherel" and (self.p is None or self.p < 2):
            raise ValueError("the Plancherel measure needs a prime p >= 2")

    def to_dict(self) -> dict:
        return {"kind": self.kind, "n": self.n, "p": self.p}


@dataclass(frozen=True)
class MonteCarloEstimate:
    """Sample mean with ``stderr = sample std / sqrt(samples)``."""

    value: complex | float | np.ndarray
    stderr: float | np.ndarray
    samples: int

    def to_dict(self) -> dict:
        return {"value": _jsonable(self.value), "stderr": _jsonable(self.stderr), "samples": self.samples}


def _jsonable(x):
    if isinstance(x, np.ndarray):
        return [_jsonable(v) for v in x.tolist()]
    if isinstance(x, list):
        return [_jsonable(v) for v in x]
    if isinstance(x, complex) or np.iscomplexobj(x):
        x = complex(x)
        return {"re": x.real, "im": x.imag}
    if isinstance(x, (np.floating, np.integer)):
        return x.item()
    return x


def chunk_rng(seed: int, chunk: int, tag: str = "mc") -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence([int(seed) & (2**64 - 1), STREAM_TAGS[tag], int(chunk)]))


# -- samplers -----------------------------------------------------------------


def sato_tate_angles(n: int, size: int, rng: np.random.Generator) -> np.ndarray:
    """Eigenangles of ``size`` Haar-random special-unitary ``n x n`` matrices, shape ``(size, n)``.

    Gaussian matrix -> QR with the diagonal of R made positive (Haar on U(n))
    -> multiply by a random n-th root of the inverse determinant (Haar on
    SU(n)).  Eigenvalues are put in random order so every coordinate has the
    same marginal, and the last angle is recomputed so the product is 1.
    """
    if n < 2:
        raise ValueError(f"rank must be >= 2, got {n}")
    if size == 0:
        return np.zeros((0, n))
    z = rng.standard_normal((size, n, n)) + 1j * rng.standard_normal((size, n, n))
    q, r = np.linalg.qr(z)
    d = np.diagonal(r, axis1=1, axis2=2)
    bad = np.abs(d).min(axis=1) < 1e-12
    if np.any(bad):
        # rank-deficient draws have probability zero; replace them
        q[bad] = _haar_unitary_retry(n, int(bad.sum()), rng)
        d = np.where(bad[:, None], 1.0, d)
    q = q * (d / np.abs(d))[:, None, :]
    phase = np.angle(np.linalg.det(q))
    root = rng.integers(0, n, size=size)
    shift = (-phase + TWO_PI * root) / n
    theta = np.angle(np.linalg.eigvals(q)) + shift[:, None]
    theta = rng.permuted(theta, axis=1)
    return complete_angles(theta[:, :-1])


def _haar_unitary_retry(n: int, count: int, rng: np.random.Generator) -> np.ndarray:
    out = []
    while len(out) < count:
        z = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
        q, r = np.linalg.qr(z)
        d = np.diagonal(r)
        if np.abs(d).min() >= 1e-12:
            out.append(q * (d / np.abs(d))[None, :])
    return np.array(out)


def sample_sato_tate(n: int, rng: np.random.Generator) -> SatakePoint:
    return SatakePoint(tuple(sato_tate_angles(n, 1, rng)[0]))


def torus_angles(n: int, size: int, rng: np.random.Generator) -> np.ndarray:
    return rng.uniform(0.0, TWO_PI, size=(size, n))


def _pair_factors(angles: np.ndarray, scale: float) -> np.ndarray:
    vals = angles_to_values(np.atleast_2d(angles))
    i, j = np.triu_indices(vals.shape[1], k=1)
    return np.abs(vals[:, i] - scale * vals[:, j]) ** 2


def sato_tate_density(point: SatakePoint | np.ndarray):
    """Unnormalized Weyl density ``prod_{l<m} |e^{i theta_l} - e^{i theta_m}|^2``."""
    angles = point.angles if isinstance(point, SatakePoint) else point
    out = _pair_factors(np.asarray(angles, dtype=float), 1.0).prod(axis=1)
    return float(out[0]) if np.ndim(angles) == 1 else out


def plancherel_constant(n: int, p: float) -> float:
    """``prod_{j=2}^n (1 - p^-j) / (1 - p^-1)``."""
    return math.prod((1 - p**-j) / (1 - 1 / p) for j in range(2, n + 1))


def rejection_bound(n: int, p: float) -> float:
    """Upper bound of the Plancherel weight: constant times ``(1 - 1/p)^(-2 C(n,2))``."""
    return plancherel_constant(n, p) * (1 - 1 / p) ** (-2 * math.comb(n, 2))


def plancherel_weight(point: SatakePoint | np.ndarray, p):
    """Density of the Plancherel measure at ``p`` relative to the Sato-Tate measure.

    ``p`` may be a scalar or, for an angle array, one prime per row.
    """
    angles = point.angles if isinstance(point, SatakePoint) else point
    angles = np.asarray(angles, dtype=float)
    single = angles.ndim == 1
    angles = np.atleast_2d(angles)
    n = angles.shape[1]
    p_arr = np.asarray(p, dtype=float)
    inv = (1.0 / p_arr)[..., None] if p_arr.ndim else 1.0 / float(p_arr)
    vals = angles_to_values(angles)
    i, j = np.triu_indices(n, k=1)
    denom = (np.abs(vals[:, i] - inv * vals[:, j]) ** 2).prod(axis=1)
    const = np.prod([(1 - p_arr**-k) / (1 - 1 / p_arr) for k in range(2, n + 1)], axis=0)
    out = const / denom
    return float(out[0]) if single else out


def plancherel_angles(n: int, p, size: int, rng: np.random.Generator) -> np.ndarray:
    """Rejection sampling from the Plancherel measure using Sato-Tate proposals.

    ``p`` is a scalar prime or an array of ``size`` primes (one per output row).
    A proposal is accepted with probability ``w_p / M`` where ``M`` is
    :func:`rejection_bound`.
    """
    p_arr = np.broadcast_to(np.asarray(p, dtype=float), (size,))
    if np.any(p_arr < 2):
        raise ValueError("Plancherel primes must be >= 2")
    out = np.empty((size, n))
    for q in np.unique(p_arr):
        rows = np.nonzero(p_arr == q)[0]
        out[rows] = _rejection_draws(n, float(q), rows.size, rng)
    return out


def _rejection_draws(n: int, p: float, count: int, rng: np.random.Generator) -> np.ndarray:
    # accepted proposals are i.i.d. draws, so they fill the requested rows in order
    bound = rejection_bound(n, p)
    kept, have = [], 0
    for _ in range(MAX_REJECTION_ROUNDS):
        need = count - have
        if need == 0:
            return np.concatenate(kept)
        batch = int(min(max(math.ceil(1.1 * need * bound), need), MAX_PROPOSALS))
        cand = sato_tate_angles(n, batch, rng)
        ok = rng.random(batch) * bound < plancherel_weight(cand, p)
        accepted = cand[ok][:need]
        kept.append(accepted)
        have += len(accepted)
    raise RuntimeError("Plancherel rejection sampler exceeded its iteration cap")


def sample_plancherel(n: int, p: int, rng: np.random.Generator) -> SatakePoint:
    return SatakePoint(tuple(plancherel_angles(n, p, 1, rng)[0]))


def sample_angles(spec: MeasureSpec, size: int, rng: np.random.Generator, primes=None) -> np.ndarray:
    if spec.kind == "sato-tate":
        return sato_tate_angles(spec.n, size, rng)
    if spec.kind == "plancherel":
        return plancherel_angles(spec.n, spec.p, size, rng)
    if spec.kind == "plancherel-local":
        if primes is None or len(primes) != size:
            raise ValueError("plancherel-local sampling needs one prime per sample")
        return plancherel_angles(spec.n, primes, size, rng)
    return torus_angles(spec.n, size, rng)


def metropolis_sato_tate(
    n: int,
    samples: int,
    rng: np.random.Generator,
    *,
    walkers: int = 1000,
    burn_in: int = 300,
    thin: int = 20,
    step: float = 1.5,
) -> np.ndarray:
    """Random-walk Metropolis on the ``(n-1)``-subtorus targeting the Weyl density.

    Many independent walkers, thinned, so the output is close to i.i.d.  Used
    only as an oracle for :func:`sato_tate_angles`.
    """
    per = -(-samples // walkers)
    state = rng.uniform(0.0, TWO_PI, size=(walkers, n - 1))
    dens = sato_tate_density(complete_angles(state))
    kept = []
    for it in range(burn_in + per * thin):
        prop = np.mod(state + rng.uniform(-step, step, size=state.shape), TWO_PI)
        pd = sato_tate_density(complete_angles(prop))
        accept = rng.random(walkers) * dens < pd
        state = np.where(accept[:, None], prop, state)
        dens = np.where(accept, pd, dens)
        if it >= burn_in and (it - burn_in) % thin == thin - 1:
            kept.append(complete_angles(state))
    return np.concatenate(kept)[:samples]


# -- Monte Carlo ----------------------------------------------------------------


@dataclass(frozen=True)
class _ChunkStats:
    count: int
    mean: np.ndarray
    m2: np.ndarray


def _merge(a: _ChunkStats, b: _ChunkStats) -> _ChunkStats:
    total = a.count + b.count
    delta = b.mean - a.mean
    mean = a.mean + delta * (b.count / total)
    m2 = a.m2 + b.m2 + np.abs(delta) ** 2 * (a.count * b.count / total)
    return _ChunkStats(total, mean, m2)


def _mc_chunk(task) -> _ChunkStats:
    f, spec, seed, chunk, size = task
    rng = chunk_rng(seed, chunk, "mc")
    angles = sample_angles(spec, size, rng)
    vals = np.asarray(f(angles))
    vals = vals.reshape(size, -1)
    mean = vals.mean(axis=0)
    m2 = (np.abs(vals - mean) ** 2).sum(axis=0)
    return _ChunkStats(size, mean, m2)


def chunk_plan(samples: int, chunk_size: int = DEFAULT_CHUNK) -> list[int]:
    full, rest = divmod(samples, chunk_size)
    return [chunk_size] * full + ([rest] if rest else [])


def run_tasks(fn: Callable, tasks: Sequence, workers: int = 1) -> list:
    """Map ``fn`` over ``tasks`` in order, optionally across worker processes."""
    if workers <= 1 or len(tasks) <= 1:
        return [fn(t) for t in tasks]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, tasks))


def mc_integrate(
    f: Callable[[np.ndarray], np.ndarray],
    spec: MeasureSpec,
    samples: int,
    seed: int,
    *,
    chunk_size: int = DEFAULT_CHUNK,
    workers: int = 1,
) -> MonteCarloEstimate:
    """Estimate ``E[f]`` under ``spec`` from ``samples`` draws.

    ``f`` maps an ``(N, n)`` angle array to ``N`` values or an ``(N, k)``
    array; the estimate then has ``k`` components.  With ``workers > 1`` the
    integrand must be picklable.
    """
    if samples < 2:
        raise ValueError("need at least two samples")
    sizes = chunk_plan(samples, chunk_size)
    tasks = [(f, spec, seed, k, s) for k, s in enumerate(sizes)]
    stats = run_tasks(_mc_chunk, tasks, workers)
    acc = stats[0]
    for s in stats[1:]:
        acc = _merge(acc, s)
    std = np.sqrt(acc.m2 / (acc.count - 1))
    stderr = std / math.sqrt(acc.count)
    value = acc.mean
    if _is_real_integrand(stats):
        value = value.real
    if value.size == 1:
        return MonteCarloEstimate(value.item(), float(stderr[0]), acc.count)
    return MonteCarloEstimate(value, stderr, acc.count)


def _is_real_integrand(stats: list[_ChunkStats]) -> bool:
    return all(not np.iscomplexobj(s.mean) for s in stats)


class SchurValues:
    """Picklable integrand: ``S_kappa`` at each sample, one column per index."""

    def __init__(self, kappas: Sequence[KappaIndex]):
        self.kappas = tuple(kappas)

    def __call__(self, angles: np.ndarray) -> np.ndarray:
        vals = angles_to_values(angles)
        return np.column_stack([schur_eval_tableaux(partition_from_kappa(k), vals) for k in self.kappas])


class GramIntegrand:
    """Picklable integrand for ``S_a * conj(S_b)`` over all pairs, flattened row-major."""

    def __init__(self, kappas: Sequence[KappaIndex]):
        self.values = SchurValues(kappas)

    def __call__(self, angles: np.ndarray) -> np.ndarray:
        s = self.values(angles)
        return (s[:, :, None] * s.conj()[:, None, :]).reshape(len(s), -1)


class PlancherelWeight:
    """Picklable integrand ``w_p`` for each prime in ``primes`` (one column each)."""

    def __init__(self, primes: Sequence[int]):
        self.primes = tuple(primes)

    def __call__(self, angles: np.ndarray) -> np.ndarray:
        return np.column_stack([plancherel_weight(angles, p) for p in self.primes])


class SmallValueIndicator:
    """Picklable integrand ``1{|S_kappa| < delta}`` for each delta."""

    def __init__(self, kappa: KappaIndex, deltas: Sequence[float]):
        self.kappa = kappa
        self.deltas = np.asarray(deltas, dtype=float)

    def __call__(self, angles: np.ndarray) -> np.ndarray:
        s = np.abs(schur_eval_tableaux(partition_from_kappa(self.kappa), angles_to_values(angles)))
        return (s[:, None] < self.deltas[None, :]).astype(float)


def gram_matrix(kappas: Sequence[KappaIndex], samples: int, seed: int, **kw) -> tuple[np.ndarray, np.ndarray]:
    """Monte Carlo Gram matrix ``E_ST[S_a conj(S_b)]`` and entrywise stderr."""
    n = kappas[0].n
    est = mc_integrate(GramIntegrand(kappas), MeasureSpec("sato-tate", n), samples, seed, **kw)
    k = len(kappas)
    return np.asarray(est.value).reshape(k, k), np.asarray(est.stderr).reshape(k, k)


def small_value_measure(
    kappa: KappaIndex,
    delta: float | Sequence[float],
    samples: int,
    seed: int,
    *,
    constrained: bool = False,
    **kw,
) -> MonteCarloEstimate:
    """Fraction of the angle torus where ``|S_kappa(e^{i theta})| < delta``.

    By default the angles are independent and uniform on the full
    ``n``-torus; ``constrained=True`` uses the Haar (Sato-Tate) measure on the
    determinant-one subtorus instead.  A sequence of deltas is estimated from
    one shared sample set.
    """
    deltas = np.atleast_1d(np.asarray(delta, dtype=float))
    if np.any(deltas <= 0):
        raise ValueError("delta must be positive")
    spec = MeasureSpec("sato-tate" if constrained else "torus", kappa.n)
    est = mc_integrate(SmallValueIndicator(kappa, deltas), spec, samples, seed, **kw)
    if np.ndim(delta) == 0:
        return est
    return MonteCarloEstimate(np.atleast_1d(est.value), np.atleast_1d(est.stderr), est.samples)


def small_value_bound(delta: float, n: int) -> float:
    """``delta ** (1 / 2**n)``."""
    return float(delta) ** (1.0 / 2**n)
