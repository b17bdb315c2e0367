"""Fourier coefficients of synthetic forms and Hecke structure constants."""

from __future__ import annotations

import io
import csv
import math
from dataclasses import dataclass, field
from typing import TYPE_CHECKING, Sequence

import numpy as np

from heckestat.primes import factorize, is_prime, spf_table
from heckestat.symfunc import (
    KappaIndex,
    dimension,
    partition_from_kappa,
    partition_to_kappa,
    schur_eval_tableaux,
    schur_multiply,
)

if TYPE_CHECKING:
    from heckestat.measures import MeasureSpec

TWO_PI = 2.0 * math.pi
#: Coefficients with modulus below this count as zero (forced zeros are exact).
ZERO_THRESHOLD = 1e-12


def complete_angles(partial: np.ndarray) -> np.ndarray:
    """Append ``theta_n = -(theta_1 + ... + theta_{n-1}) mod 2pi`` to each row."""
    partial = np.mod(np.atleast_2d(np.asarray(partial, dtype=float)), TWO_PI)
    last = np.mod(-partial.sum(axis=1), TWO_PI)
    return np.column_stack([partial, last])


def angles_to_values(angles: np.ndarray) -> np.ndarray:
    return np.exp(1j * np.asarray(angles, dtype=float))


@dataclass(frozen=True)
class SatakePoint:
    """Tempered Satake parameters ``e^{i theta_j}`` at one prime, with product 1.

    The last angle is always recomputed from the others, so the determinant
    constraint holds by construction.
    """

    angles: tuple[float, ...]

    def __post_init__(self):
        if len(self.angles) < 2:
            raise ValueError("a SatakePoint needs at least two angles")
        full = complete_angles(np.asarray(self.angles[:-1], dtype=float))[0]
        object.__setattr__(self, "angles", tuple(float(a) for a in full))

    @classmethod
    def from_partial(cls, angles: Sequence[float]) -> SatakePoint:
        """Build from the first ``n - 1`` angles."""
        return cls(tuple(angles) + (0.0,))

    @property
    def n(self) -> int:
        return len(self.angles)

    @property
    def values(self) -> np.ndarray:
        return angles_to_values(self.angles)


@dataclass(frozen=True)
class ForcedZeros:
    """Set of primes whose coefficients are overridden to exactly zero.

    By default only ``A(p^kappa)`` itself is zeroed; ``all_powers`` also zeroes
    every ``A(p^{e kappa})`` with ``e >= 1``.
    """

    primes: frozenset[int] = frozenset()
    residue: tuple[int, int] | None = None
    above: int | None = None
    everything: bool = False
    all_powers: bool = False

    @classmethod
    def parse(cls, text: str | None) -> ForcedZeros:
        """Parse ``none``, ``all``, ``2,3,5``, ``3mod4`` or ``>1000``; ``+powers`` suffix sets ``all_powers``."""
        if text is None:
            return cls()
        text = text.strip().lower()
        all_powers = text.endswith("+powers")
        if all_powers:
            text = text[: -len("+powers")]
        if text in ("", "none", "empty"):
            return cls(all_powers=all_powers)
        if text == "all":
            return cls(everything=True, all_powers=all_powers)
        if text.startswith(">"):
            return cls(above=int(text[1:]), all_powers=all_powers)
        if "mod" in text:
            r, q = text.split("mod")
            r, q = int(r), int(q)
            if q < 1:
                raise ValueError(f"bad modulus in {text!r}")
            return cls(residue=(r % q, q), all_powers=all_powers)
        primes = frozenset(int(t) for t in text.split(","))
        bad = [p for p in primes if not is_prime(p)]
        if bad:
            raise ValueError(f"not prime: {sorted(bad)}")
        return cls(primes=primes, all_powers=all_powers)

    def mask(self, primes: np.ndarray) -> np.ndarray:
        primes = np.asarray(primes, dtype=np.int64)
        out = np.isin(primes, np.fromiter(self.primes, dtype=np.int64, count=len(self.primes)))
        if self.everything:
            out[:] = True
        if self.residue is not None:
            r, q = self.residue
            out |= primes % q == r
        if self.above is not None:
            out |= primes > self.above
        return out

    def __contains__(self, p: int) -> bool:
        return bool(self.mask(np.array([p]))[0])

    @property
    def is_empty(self) -> bool:
        return not (self.primes or self.residue or self.above is not None or self.everything)

    def describe(self) -> str:
        parts = []
        if self.everything:
            parts.append("all")
        if self.primes:
            parts.append(",".join(map(str, sorted(self.primes))))
        if self.residue is not None:
            parts.append(f"{self.residue[0]}mod{self.residue[1]}")
        if self.above is not None:
            parts.append(f">{self.above}")
        text = "|".join(parts) or "none"
        return text + ("+powers" if self.all_powers else "")


@dataclass(frozen=True, eq=False)
class SyntheticForm:
    """Seeded assignment ``p -> SatakePoint`` for every prime up to ``prime_bound``.

    Built by :func:`heckestat.experiments.build_form`; ``angles[i]`` belongs to
    ``primes[i]``.
    """

    n: int
    measure: MeasureSpec
    seed: int
    prime_bound: int
    primes: np.ndarray
    angles: np.ndarray
    forced_zeros: ForcedZeros = field(default_factory=ForcedZeros)

    def index_of(self, p: int) -> int:
        i = int(np.searchsorted(self.primes, p))
        if p > self.prime_bound or i >= len(self.primes) or self.primes[i] != p:
            raise ValueError(f"{p} is not a prime <= {self.prime_bound}")
        return i

    def satake_point(self, p: int) -> SatakePoint:
        return SatakePoint(tuple(self.angles[self.index_of(p)]))

    def with_forced_zeros(self, forced: ForcedZeros) -> SyntheticForm:
        return SyntheticForm(self.n, self.measure, self.seed, self.prime_bound, self.primes, self.angles, forced)


def _check_rank(form: SyntheticForm, kappa: KappaIndex) -> None:
    if kappa.n != form.n:
        raise ValueError(f"kappa rank {kappa.n} does not match form rank {form.n}")


def coefficient_at_prime(form: SyntheticForm, p: int, kappa: KappaIndex) -> complex:
    """``A(p^kappa)``: the Schur polynomial of ``kappa`` at the Satake parameters of ``p``."""
    _check_rank(form, kappa)
    i = form.index_of(p)
    if kappa.is_zero:
        return 1.0 + 0j
    if p in form.forced_zeros:
        return 0j
    return complex(schur_eval_tableaux(partition_from_kappa(kappa), angles_to_values(form.angles[i])))


def _prime_power_coefficient(form: SyntheticForm, p: int, e: int, kappa: KappaIndex) -> complex:
    if kappa.is_zero:
        return 1.0 + 0j
    if (e == 1 or form.forced_zeros.all_powers) and p in form.forced_zeros:
        return 0j
    lam = partition_from_kappa(kappa.scaled(e))
    return complex(schur_eval_tableaux(lam, angles_to_values(form.angles[form.index_of(p)])))


def coefficient_at_m(form: SyntheticForm, m: int, kappa: KappaIndex) -> complex:
    """``A(m^kappa) = prod_{p^e || m} A(p^{e kappa})``."""
    _check_rank(form, kappa)
    if m < 1:
        raise ValueError(f"m must be positive, got {m}")
    out = 1.0 + 0j
    for p, e in factorize(m).items():
        if p > form.prime_bound:
            raise ValueError(f"prime factor {p} of {m} exceeds prime bound {form.prime_bound}")
        out *= _prime_power_coefficient(form, p, e, kappa)
    return out


def prime_power_table(form: SyntheticForm, kappa: KappaIndex, limit: int) -> np.ndarray:
    """Array ``t`` of length ``limit + 1`` with ``t[p^e] = A(p^{e kappa})`` (zero elsewhere)."""
    _check_rank(form, kappa)
    if _largest_prime_upto(limit) > form.prime_bound:
        raise ValueError(f"limit {limit} needs primes beyond the form's bound {form.prime_bound}")
    table = np.zeros(limit + 1, dtype=complex)
    primes = form.primes[form.primes <= limit]
    values = angles_to_values(form.angles[: len(primes)])
    forced = form.forced_zeros.mask(primes)
    e = 1
    powers = primes.copy()
    while len(powers):
        rows = values[: len(powers)]
        if kappa.is_zero:
            vals = np.ones(len(powers), dtype=complex)
        else:
            vals = schur_eval_tableaux(partition_from_kappa(kappa.scaled(e)), rows)
            if e == 1 or form.forced_zeros.all_powers:
                vals = np.where(forced[: len(powers)], 0j, vals)
        table[powers] = vals
        e += 1
        keep = powers <= limit // primes[: len(powers)]
        powers = powers[keep] * primes[: len(powers)][keep]
    return table


def _largest_prime_upto(limit: int) -> int:
    m = limit
    while m >= 2 and not is_prime(m):
        m -= 1
    return m


def multiplicative_fill(
    table: np.ndarray, start: int, stop: int, *, marker: np.ndarray | None = None
) -> np.ndarray:
    """Values ``prod_{p^e || m} table[p^e]`` for ``m`` in ``[start, stop]``.

    ``table`` is indexed by prime powers, as returned by :func:`prime_power_table`.
    """
    spf = spf_table(len(table) - 1)
    cur = np.arange(start, stop + 1, dtype=np.int64)
    out = np.ones(cur.shape, dtype=table.dtype)
    active = cur > 1
    while np.any(active):
        idx = np.nonzero(active)[0]
        c = cur[idx]
        p = spf[c]
        q = p.copy()
        more = (c // q) % p == 0
        while np.any(more):
            q[more] *= p[more]
            more = (c // q) % p == 0
        out[idx] *= table[q]
        cur[idx] = c // q
        active[idx] = cur[idx] > 1
    return out


def coefficient_table(form: SyntheticForm, kappa: KappaIndex, stop: int, start: int = 1) -> np.ndarray:
    """``A(m^kappa)`` for every ``m`` in ``[start, stop]`` (vectorized sieve walk)."""
    table = prime_power_table(form, kappa, stop)
    return multiplicative_fill(table, start, stop)


def hecke_product_expansion(kappa: KappaIndex, other: KappaIndex) -> dict[KappaIndex, int]:
    """Structure constants ``d^xi`` with ``S_kappa S_other = sum_xi d^xi S_xi``.

    The ``xi = 0`` term is included.  Keys come in descending graded-lex order
    (by ``|xi|``, then the tuple).
    """
    if kappa.n != other.n:
        raise ValueError(f"rank mismatch: {kappa.n} vs {other.n}")
    n = kappa.n
    product = schur_multiply(partition_from_kappa(kappa), partition_from_kappa(other), n)
    terms = {partition_to_kappa(lam, n): c for lam, c in product.items()}
    return dict(sorted(terms.items(), key=lambda kv: graded_lex_key(kv[0]), reverse=True))


def graded_lex_key(kappa: KappaIndex) -> tuple:
    return (kappa.size, kappa.kappa)


def expansion_rhs(expansion: dict[KappaIndex, int], values) -> np.ndarray | complex:
    total = 0
    for xi, d in expansion.items():
        total = total + d * schur_eval_tableaux(partition_from_kappa(xi), values)
    return total


def hecke_square_identity_check(kappa: KappaIndex, point: SatakePoint | np.ndarray):
    """``|S_kappa(x)^2 - sum_xi d^xi S_xi(x)|`` at a point (or an ``(N, n)`` angle array)."""
    values = point.values if isinstance(point, SatakePoint) else angles_to_values(point)
    if not isinstance(point, SatakePoint):
        values = np.atleast_2d(values)
    lhs = schur_eval_tableaux(partition_from_kappa(kappa), values) ** 2
    rhs = expansion_rhs(hecke_product_expansion(kappa, kappa), values)
    res = np.abs(lhs - rhs)
    return float(res) if np.ndim(res) == 0 else res


def expansion_csv(expansion: dict[KappaIndex, int]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["xi", "coefficient"])
    for xi, d in sorted(expansion.items(), key=lambda kv: graded_lex_key(kv[0]), reverse=True):
        writer.writerow([xi.label(), d])
    return buf.getvalue()


def coefficient_bound(kappa: KappaIndex) -> int:
    """Upper bound ``dim(lambda(kappa))`` for ``|A(p^kappa)|`` at tempered points."""
    return dimension(partition_from_kappa(kappa), kappa.n)


def boundedness_scan(kappa: KappaIndex, angles: np.ndarray) -> dict[str, float]:
    """Observed range of ``|S_kappa|`` over sample points, next to the tempered bound."""
    vals = np.abs(schur_eval_tableaux(partition_from_kappa(kappa), angles_to_values(angles)))
    return {"min_abs": float(vals.min()), "max_abs": float(vals.max()), "bound": coefficient_bound(kappa)}
