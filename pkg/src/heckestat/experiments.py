"""Statistics of coefficient sequences on synthetic forms.

Synthetic forms stand in for a family of cusp forms: the Satake parameters at
each prime are drawn independently from the Sato-Tate or Plancherel measure,
and chosen primes can be forced to give zero coefficients.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass
from typing import Sequence

import numpy as np

from heckestat.hecke import (
    ZERO_THRESHOLD,
    ForcedZeros,
    SyntheticForm,
    angles_to_values,
    coefficient_bound,
    coefficient_table,
    multiplicative_fill,
    prime_power_table,
)
from heckestat.measures import MeasureSpec, chunk_rng, run_tasks, sample_angles
from heckestat.primes import primes_up_to, spf_table
from heckestat.symfunc import KappaIndex, partition_from_kappa, schur_eval_tableaux

#: Primes per random block when building a form; fixed so the point at ``p`` never depends on the bound.
FORM_BLOCK = 4096
#: Chunk length (in ``m``) for sign and sieve scans.
SCAN_CHUNK = 1 << 15


def build_form(
    spec: MeasureSpec,
    seed: int,
    prime_bound: int,
    forced_zeros: ForcedZeros | str | None = None,
) -> SyntheticForm:
    """Draw Satake parameters for every prime up to ``prime_bound``.

    The ``k``-th block of ``FORM_BLOCK`` consecutive primes is sampled from its
    own stream, so the point at ``p`` depends on ``(seed, p, spec)`` only.
    """
    if prime_bound < 2:
        raise ValueError("prime_bound must be >= 2")
    if spec.kind == "torus":
        raise ValueError("forms need tempered points with product 1; the torus measure does not qualify")
    if not isinstance(forced_zeros, ForcedZeros):
        forced_zeros = ForcedZeros.parse(forced_zeros)
    primes = primes_up_to(prime_bound)
    blocks = []
    local = spec.kind == "plancherel-local"
    all_primes_in_blocks = primes_up_to(_block_cover(len(primes), prime_bound)) if local else None
    for b in range(-(-len(primes) // FORM_BLOCK)):
        rng = chunk_rng(seed, b, "form")
        block_primes = all_primes_in_blocks[b * FORM_BLOCK : (b + 1) * FORM_BLOCK] if local else None
        angles = sample_angles(spec, FORM_BLOCK, rng, primes=block_primes)
        blocks.append(angles)
    angles = np.concatenate(blocks)[: len(primes)] if blocks else np.zeros((0, spec.n))
    angles.flags.writeable = False
    return SyntheticForm(spec.n, spec, int(seed), int(prime_bound), primes, angles, forced_zeros)


def _block_cover(count: int, bound: int) -> int:
    # a prime bound whose prime list fills the last block completely
    need = -(-count // FORM_BLOCK) * FORM_BLOCK
    limit = max(bound, 16)
    while len(primes_up_to(limit)) < need:
        limit *= 2
    return limit


# -- signs ----------------------------------------------------------------------


@dataclass(frozen=True)
class SignSummary:
    positives: int
    negatives: int
    zeros: int
    sign_changes: int
    X: int

    @property
    def nonzero(self) -> int:
        return self.positives + self.negatives

    @property
    def positive_fraction(self) -> float:
        return self.positives / self.nonzero if self.nonzero else float("nan")

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass(frozen=True)
class _SignChunk:
    positives: int
    negatives: int
    zeros: int
    changes: int
    first: int
    last: int


def _classify(values: np.ndarray) -> np.ndarray:
    values = np.asarray(values)
    re = values.real if np.iscomplexobj(values) else values
    signs = np.sign(re).astype(np.int8)
    signs[np.abs(values) < ZERO_THRESHOLD] = 0
    return signs


def _sign_chunk(signs: np.ndarray) -> _SignChunk:
    nz = signs[signs != 0]
    changes = int(np.count_nonzero(nz[1:] != nz[:-1])) if nz.size > 1 else 0
    return _SignChunk(
        int(np.count_nonzero(signs > 0)),
        int(np.count_nonzero(signs < 0)),
        int(np.count_nonzero(signs == 0)),
        changes,
        int(nz[0]) if nz.size else 0,
        int(nz[-1]) if nz.size else 0,
    )


def _merge_sign_chunks(chunks: Sequence[_SignChunk], X: int) -> SignSummary:
    pos = neg = zer = changes = 0
    prev = 0
    for c in chunks:
        pos, neg, zer = pos + c.positives, neg + c.negatives, zer + c.zeros
        changes += c.changes
        if prev and c.first and prev != c.first:
            changes += 1
        if c.last:
            prev = c.last
    return SignSummary(pos, neg, zer, changes, X)


def summarize_signs(values: Sequence[float]) -> SignSummary:
    """Sign counts of a real sequence indexed ``m = 1..len(values)``."""
    values = np.asarray(values)
    return _merge_sign_chunks([_sign_chunk(_classify(values))], len(values))


def _sign_task(task) -> _SignChunk:
    form, kappa, start, stop, X = task
    table = prime_power_table(form, kappa, X)
    return _sign_chunk(_classify(multiplicative_fill(table, start, stop)))


def sign_summary(
    form: SyntheticForm, kappa: KappaIndex, X: int, *, workers: int = 1, chunk: int = SCAN_CHUNK
) -> SignSummary:
    """Positive/negative/zero counts of ``A(m^kappa)``, ``m <= X``, and sign changes.

    Sign changes are counted between consecutive terms of the nonzero
    subsequence.  ``kappa`` must be palindromic so that the coefficients are real.
    """
    if not kappa.is_palindromic:
        raise ValueError(f"kappa {kappa} is not palindromic; coefficients need not be real")
    if X < 2:
        raise ValueError("X must be >= 2")
    tasks = [(form, kappa, s, min(s + chunk - 1, X), X) for s in range(1, X + 1, chunk)]
    return _merge_sign_chunks(run_tasks(_sign_task, tasks, workers), X)


# -- prime sums -----------------------------------------------------------------


def _prime_coefficients(form: SyntheticForm, kappa: KappaIndex, X: int) -> tuple[np.ndarray, np.ndarray]:
    primes = form.primes[form.primes <= X]
    if X > form.prime_bound and len(primes_up_to(X)) > len(primes):
        raise ValueError(f"X={X} exceeds the form's prime bound {form.prime_bound}")
    if kappa.is_zero:
        return primes, np.ones(len(primes), dtype=complex)
    vals = schur_eval_tableaux(partition_from_kappa(kappa), angles_to_values(form.angles[: len(primes)]))
    vals = np.where(form.forced_zeros.mask(primes), 0j, vals)
    return primes, vals


def negative_prime_reciprocal_sum(form: SyntheticForm, kappa: KappaIndex, X: int) -> float:
    """``sum 1/p`` over primes ``p <= X`` with ``Re A(p^kappa) < 0``."""
    if X < 2:
        return 0.0
    primes, vals = _prime_coefficients(form, kappa, X)
    neg = (vals.real < 0) & (np.abs(vals) >= ZERO_THRESHOLD)
    return math.fsum(1.0 / primes[neg])


def zero_prime_reciprocal_sum(form: SyntheticForm, kappa: KappaIndex, X: int) -> float:
    """``sum 1/p`` over primes ``p <= X`` with ``A(p^kappa) = 0``."""
    if X < 2:
        return 0.0
    primes, vals = _prime_coefficients(form, kappa, X)
    return math.fsum(1.0 / primes[np.abs(vals) < ZERO_THRESHOLD])


def prime_reciprocal_curve(
    form: SyntheticForm, kappa: KappaIndex, checkpoints: Sequence[int], which: str = "negative"
) -> list[tuple[int, float]]:
    """Running ``negative`` or ``zero`` prime sums at each checkpoint."""
    fn = negative_prime_reciprocal_sum if which == "negative" else zero_prime_reciprocal_sum
    return [(int(x), fn(form, kappa, int(x))) for x in checkpoints]


# -- sieve ------------------------------------------------------------------------


@dataclass(frozen=True)
class SieveReport:
    X: int
    nonzero_count: int
    sieve_product: float
    s1_count: int
    s2_count: int
    cover_holds: bool
    zero_primes: int
    hypothesis_flags: dict

    @property
    def ratio(self) -> float:
        return self.nonzero_count / self.sieve_product

    def to_dict(self) -> dict:
        out = asdict(self)
        out["ratio"] = self.ratio
        return out


def zero_primes(form: SyntheticForm, kappa: KappaIndex, X: int) -> np.ndarray:
    """The set of primes ``p <= X`` with ``A(p^kappa) = 0``, sorted."""
    primes, vals = _prime_coefficients(form, kappa, X)
    return primes[np.abs(vals) < ZERO_THRESHOLD]


def sieve_product(X: int, bad_primes: np.ndarray) -> float:
    """``X * prod_{p <= X, p bad} (1 - 1/p)``."""
    bad = np.asarray(bad_primes)
    bad = bad[bad <= X]
    return float(X * math.exp(math.fsum(np.log1p(-1.0 / bad))))


def cover_sets(X: int, bad_primes: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Membership masks (indexed by ``m - 1``) of the two covering sets.

    ``S1``: no prime factor ``p < X`` lies in the bad set.
    ``S2``: ``g = gcd(m, P_X) > 1`` and ``g^2 | m``, where ``P_X`` is the
    product of the bad primes ``p <= X``.
    """
    spf = spf_table(X)
    is_bad = np.zeros(X + 1, dtype=bool)
    bad = np.asarray(bad_primes, dtype=np.int64)
    is_bad[bad[bad <= X]] = True
    m = np.arange(1, X + 1, dtype=np.int64)
    cur = m.copy()
    g = np.ones(X, dtype=np.int64)
    hits_small = np.zeros(X, dtype=bool)
    active = cur > 1
    while np.any(active):
        idx = np.nonzero(active)[0]
        p = spf[cur[idx]]
        b = is_bad[p]
        g[idx[b]] *= p[b]
        hits_small[idx[b & (p < X)]] = True
        c = cur[idx]
        while True:
            div = c % p == 0
            if not np.any(div):
                break
            c = np.where(div, c // p, c)
        cur[idx] = c
        active[idx] = c > 1
    s1 = ~hits_small
    s2 = (g > 1) & (m % (g * g) == 0)
    return s1, s2


def hypothesis_checks(X: int, bad_primes: np.ndarray, A: float = 3.0) -> dict:
    """Sieve hypotheses for ``omega(p) = 1{p bad}``.

    ``omega1``: ``0 <= omega(p)/p <= 1 - 1/A``.
    ``omega2``: ``sum_{w<p<z} omega(p) log p / p <= A log(z/w) + A`` for all ``w < z <= X``
    (checked exactly through the worst prime window).
    ``R``: ``|floor(X/d) - X/d| <= omega(d)`` for every squarefree ``d <= X`` built from bad primes.
    """
    if A <= 2:
        raise ValueError("the sieve constant A must exceed 2")
    primes = primes_up_to(X)
    is_bad = np.isin(primes, np.asarray(bad_primes, dtype=np.int64))
    omega = is_bad.astype(float)
    ratio = omega / primes
    omega1 = bool(np.all(ratio >= 0) and np.all(ratio <= 1 - 1 / A))

    # worst window [p_a, p_b]: max_b (G_b - A log p_b) - min_{a<=b} (G_{a-1} - A log p_a)
    terms = omega * np.log(primes) / primes
    G = np.concatenate([[0.0], np.cumsum(terms)])
    logp = np.log(primes)
    right = G[1:] - A * logp
    left = np.minimum.accumulate(G[:-1] - A * logp) if len(primes) else np.zeros(0)
    excess = float(np.max(right - left)) if len(primes) else 0.0
    omega2 = excess <= A

    d_values = _bad_squarefree(X, primes[is_bad])
    remainders = X % d_values  # |R_d| * d
    r_ok = bool(np.all(remainders <= d_values))
    return {
        "A": A,
        "omega1": omega1,
        "omega2": bool(omega2),
        "omega2_worst_excess": excess,
        "R": r_ok,
        "R_checked": int(len(d_values)),
    }


def _bad_squarefree(X: int, bad: np.ndarray) -> np.ndarray:
    # squarefree d <= X whose prime factors are all bad (d = 1 included)
    spf = spf_table(X)
    is_bad = np.zeros(X + 1, dtype=bool)
    is_bad[bad] = True
    d = np.arange(1, X + 1, dtype=np.int64)
    cur = d.copy()
    ok = np.ones(X, dtype=bool)
    active = cur > 1
    while np.any(active):
        idx = np.nonzero(active)[0]
        p = spf[cur[idx]]
        c = cur[idx] // p
        ok[idx] &= is_bad[p] & (c % p != 0)
        cur[idx] = c
        active[idx] = (c > 1) & ok[idx]
    return d[ok]


def sieve_report(form: SyntheticForm, kappa: KappaIndex, X: int, *, A: float = 3.0) -> SieveReport:
    """Nonvanishing count of ``A(m^kappa)`` for ``m <= X`` against the sieve prediction."""
    if X < 2:
        raise ValueError("X must be >= 2")
    coeffs = coefficient_table(form, kappa, X)
    nonzero = np.abs(coeffs) >= ZERO_THRESHOLD
    bad = zero_primes(form, kappa, X)
    s1, s2 = cover_sets(X, bad)
    return SieveReport(
        X=X,
        nonzero_count=int(nonzero.sum()),
        sieve_product=sieve_product(X, bad),
        s1_count=int(s1.sum()),
        s2_count=int(s2.sum()),
        cover_holds=bool(np.all(~nonzero | s1 | s2)),
        zero_primes=int(len(bad)),
        hypothesis_flags=hypothesis_checks(X, bad, A),
    )


def nonvanishing_density_curve(
    form: SyntheticForm, kappa: KappaIndex, X: int, checkpoints: Sequence[int]
) -> list[dict]:
    """Rows ``(X_i, nonzero_count_i, sieve_product_i, ratio_i)`` at each checkpoint."""
    if any(c > X or c < 1 for c in checkpoints):
        raise ValueError("checkpoints must lie in [1, X]")
    coeffs = coefficient_table(form, kappa, X)
    running = np.cumsum(np.abs(coeffs) >= ZERO_THRESHOLD)
    bad = zero_primes(form, kappa, X)
    rows = []
    for c in sorted(int(c) for c in checkpoints):
        count = int(running[c - 1])
        prod = sieve_product(c, bad)
        rows.append({"X": c, "nonzero_count": count, "sieve_product": prod, "ratio": count / prod})
    return rows


# -- vertical distribution ----------------------------------------------------------


@dataclass(frozen=True)
class Histogram:
    edges: np.ndarray
    mass: np.ndarray
    statistic: str
    samples: int

    def to_dict(self) -> dict:
        return {
            "edges": self.edges.tolist(),
            "mass": self.mass.tolist(),
            "statistic": self.statistic,
            "samples": self.samples,
        }


def coefficient_statistic(kappa: KappaIndex, angles: np.ndarray) -> tuple[np.ndarray, str]:
    vals = schur_eval_tableaux(partition_from_kappa(kappa), angles_to_values(angles))
    if kappa.is_palindromic:
        return vals.real, "real"
    return np.abs(vals), "abs"


def vertical_distribution_histogram(
    spec: MeasureSpec,
    kappa: KappaIndex,
    bins: int,
    samples: int,
    seed: int,
    value_range: tuple[float, float] | None = None,
) -> Histogram:
    """Histogram (total mass 1) of ``Re S_kappa`` (palindromic) or ``|S_kappa|`` under ``spec``."""
    if bins < 2:
        raise ValueError("need at least two bins")
    angles = sample_angles(spec, samples, chunk_rng(seed, 0, "sample"))
    stat, name = coefficient_statistic(kappa, angles)
    if value_range is None:
        b = float(coefficient_bound(kappa))
        value_range = (-b, b) if name == "real" else (0.0, b)
    counts, edges = np.histogram(stat, bins=bins, range=value_range)
    return Histogram(edges, counts / samples, name, samples)


def total_variation(a: Histogram, b: Histogram) -> float:
    if not np.array_equal(a.edges, b.edges):
        raise ValueError("histograms have different bins")
    return 0.5 * float(np.abs(a.mass - b.mass).sum())
