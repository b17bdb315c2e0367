"""Exact symmetric-function algebra for degenerate Schur polynomials.

A Fourier coefficient index ``kappa = (k_1, ..., k_{n-1})`` corresponds to the
partition ``lam_i = k_1 + ... + k_{n-i}``; the determinant ratio defining
``S_kappa`` is then the classical Schur polynomial ``s_lam`` in ``n``
variables.  Products are expanded with the Littlewood-Richardson rule and
reduced modulo ``x_1 x_2 ... x_n = 1``.

All coefficients are Python integers, so nothing here can overflow.
"""

from __future__ import annotations

import itertools
from collections import Counter
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from types import MappingProxyType
from typing import Iterable, Iterator, Mapping, Sequence

import numpy as np

#: Pairwise separation below which the determinant ratio is refused.
DEGENERACY_THRESHOLD = 1e-6


class DegeneratePointError(ValueError):
    """The Vandermonde denominator is (numerically) zero at the requested point."""


@dataclass(frozen=True, order=True)
class Partition:
    """Weakly decreasing tuple of non-negative integers, trailing zeros removed."""

    parts: tuple[int, ...] = ()

    def __post_init__(self):
        parts = tuple(int(x) for x in self.parts)
        if any(x < 0 for x in parts):
            raise ValueError(f"negative part in {parts}")
        if any(a < b for a, b in zip(parts, parts[1:])):
            raise ValueError(f"parts not weakly decreasing: {parts}")
        while parts and parts[-1] == 0:
            parts = parts[:-1]
        object.__setattr__(self, "parts", parts)

    @property
    def weight(self) -> int:
        return sum(self.parts)

    def __len__(self) -> int:
        return len(self.parts)

    def __iter__(self) -> Iterator[int]:
        return iter(self.parts)

    def padded(self, n: int) -> tuple[int, ...]:
        if len(self.parts) > n:
            raise ValueError(f"{self} has more than {n} parts")
        return self.parts + (0,) * (n - len(self.parts))

    def __str__(self) -> str:
        return "(" + ",".join(map(str, self.parts)) + ")"


def as_partition(lam: Partition | Sequence[int]) -> Partition:
    return lam if isinstance(lam, Partition) else Partition(tuple(lam))


@dataclass(frozen=True, order=True)
class KappaIndex:
    """Index ``(k_1, ..., k_{n-1})`` of a coefficient ``A(p^k_1, ..., p^k_{n-1})``."""

    kappa: tuple[int, ...]
    n: int

    def __post_init__(self):
        kappa = tuple(int(k) for k in self.kappa)
        if self.n < 2:
            raise ValueError(f"rank must be >= 2, got {self.n}")
        if len(kappa) != self.n - 1:
            raise ValueError(f"kappa {kappa} must have n-1 = {self.n - 1} entries")
        if any(k < 0 for k in kappa):
            raise ValueError(f"negative entry in kappa {kappa}")
        object.__setattr__(self, "kappa", kappa)

    @classmethod
    def zero(cls, n: int) -> KappaIndex:
        return cls((0,) * (n - 1), n)

    @property
    def norm(self) -> int:
        """Weighted norm ``sum_j (n - j) k_j``."""
        return sum((self.n - j) * k for j, k in enumerate(self.kappa, start=1))

    @property
    def size(self) -> int:
        return sum(self.kappa)

    @property
    def is_zero(self) -> bool:
        return not any(self.kappa)

    @property
    def is_palindromic(self) -> bool:
        return self.kappa == self.kappa[::-1]

    def dual(self) -> KappaIndex:
        return KappaIndex(self.kappa[::-1], self.n)

    def scaled(self, e: int) -> KappaIndex:
        return KappaIndex(tuple(e * k for k in self.kappa), self.n)

    def label(self) -> str:
        """Dash-separated form used in CSV dumps, e.g. ``2-0``."""
        return "-".join(map(str, self.kappa))

    def __str__(self) -> str:
        return "(" + ",".join(map(str, self.kappa)) + ")"


def partition_from_kappa(kappa: KappaIndex) -> Partition:
    """``lam_i = k_1 + ... + k_{n-i}``; the weight equals ``kappa.norm``."""
    n = kappa.n
    return Partition(tuple(sum(kappa.kappa[: n - i]) for i in range(1, n + 1)))


def partition_to_kappa(lam: Partition | Sequence[int], n: int) -> KappaIndex:
    """Inverse of :func:`partition_from_kappa` after stripping height-``n`` columns."""
    lam = as_partition(lam)
    if len(lam) > n:
        raise ValueError(f"partition {lam} has more than n={n} parts")
    parts = lam.padded(n)
    parts = tuple(x - parts[-1] for x in parts)
    # kappa_j = lam_{n-j} - lam_{n-j+1}, 1-based
    return KappaIndex(tuple(parts[n - j - 1] - parts[n - j] for j in range(1, n)), n)


def kappa_dual(kappa: KappaIndex) -> KappaIndex:
    return kappa.dual()


def dimension(lam: Partition | Sequence[int], n: int) -> int:
    """Number of SSYT of shape ``lam`` with entries ``<= n`` (Weyl dimension formula)."""
    lam = as_partition(lam)
    if len(lam) > n:
        return 0
    parts = lam.padded(n)
    out = Fraction(1)
    for i, j in itertools.combinations(range(n), 2):
        out *= Fraction(parts[i] - parts[j] + j - i, j - i)
    return int(out)


# -- monomial expansion -------------------------------------------------------


@lru_cache(maxsize=4096)
def _monomials(parts: tuple[int, ...], n: int) -> tuple[tuple[tuple[int, ...], int], ...]:
    # branching s_lam(x_1..x_n) = sum_{mu interlacing lam} x_n^{|lam|-|mu|} s_mu(x_1..x_{n-1})
    if len(parts) > n:
        return ()
    if n == 0:
        return (((), 1),)
    lam = parts + (0,) * (n - len(parts))
    if n == 1:
        return (((lam[0],), 1),)
    total = sum(lam)
    acc: Counter = Counter()
    ranges = [range(lam[i + 1], lam[i] + 1) for i in range(n - 1)]
    for mu in itertools.product(*ranges):
        e = total - sum(mu)
        trimmed = tuple(mu)
        while trimmed and trimmed[-1] == 0:
            trimmed = trimmed[:-1]
        for exps, c in _monomials(trimmed, n - 1):
            acc[exps + (e,)] += c
    return tuple(sorted(acc.items(), reverse=True))


def monomial_expansion(lam: Partition | Sequence[int], n: int) -> dict[tuple[int, ...], int]:
    """``{exponent vector: Kostka number}`` for ``s_lam`` in ``n`` variables."""
    return dict(_monomials(as_partition(lam).parts, n))


def ssyt(lam: Partition | Sequence[int], n: int) -> Iterator[tuple[tuple[int, ...], ...]]:
    """Semistandard Young tableaux of shape ``lam`` with entries in ``1..n``.

    Filled row by row, left to right; tableaux come out in lexicographic order
    of their row-reading words.
    """
    lam = as_partition(lam)
    if len(lam) > n:
        return
    shape = lam.parts
    cells = [(r, c) for r, w in enumerate(shape) for c in range(w)]
    grid: dict[tuple[int, int], int] = {}

    def fill(k: int) -> Iterator[tuple[tuple[int, ...], ...]]:
        if k == len(cells):
            yield tuple(tuple(grid[(r, c)] for c in range(w)) for r, w in enumerate(shape))
            return
        r, c = cells[k]
        lo = 1
        if c > 0:
            lo = max(lo, grid[(r, c - 1)])
        if r > 0:
            lo = max(lo, grid[(r - 1, c)] + 1)
        # entries in column c below row r still need room: value <= n - (rows below in column)
        below = sum(1 for rr in range(r + 1, len(shape)) if shape[rr] > c)
        for v in range(lo, n - below + 1):
            grid[(r, c)] = v
            yield from fill(k + 1)
        grid.pop((r, c), None)

    yield from fill(0)


def _is_numpy_batch(xs) -> bool:
    return isinstance(xs, np.ndarray) and xs.ndim == 2


def schur_eval_tableaux(lam: Partition | Sequence[int], xs):
    """Evaluate ``s_lam`` as a sum of SSYT monomials.

    ``xs`` is either a sequence of ``n`` scalars (any numeric type; exact
    inputs give exact results) or a 2-d array of shape ``(N, n)``, in which
    case an array of ``N`` values is returned.
    """
    lam = as_partition(lam)
    if _is_numpy_batch(xs):
        return _eval_batch(lam, xs)
    xs = list(xs)
    n = len(xs)
    if len(lam) > n:
        raise ValueError(f"partition {lam} has more than n={n} parts")
    total = 0
    for exps, c in _monomials(lam.parts, n):
        term = c
        for x, e in zip(xs, exps):
            if e:
                term = term * x**e
        total = total + term
    return total


def _eval_batch(lam: Partition, xs: np.ndarray) -> np.ndarray:
    N, n = xs.shape
    if len(lam) > n:
        raise ValueError(f"partition {lam} has more than n={n} parts")
    top = lam.parts[0] if lam.parts else 0
    xs = np.asarray(xs, dtype=complex)
    powers = np.empty((n, top + 1, N), dtype=complex)
    powers[:, 0] = 1.0
    for k in range(1, top + 1):
        powers[:, k] = powers[:, k - 1] * xs.T
    out = np.zeros(N, dtype=complex)
    cols = np.arange(n)
    for exps, c in _monomials(lam.parts, n):
        out += float(c) * np.prod(powers[cols, list(exps)], axis=0)
    return out


def _min_separation(xs: np.ndarray) -> np.ndarray:
    n = xs.shape[-1]
    if n < 2:
        return np.full(xs.shape[:-1], np.inf)
    i, j = np.triu_indices(n, k=1)
    return np.abs(xs[..., i] - xs[..., j]).min(axis=-1)


def schur_eval_determinant(lam: Partition | Sequence[int], xs, threshold: float = DEGENERACY_THRESHOLD):
    """Evaluate ``s_lam`` as the literal ratio ``det(x_j^(lam_i+n-i)) / det(x_j^(n-i))``.

    Raises :class:`DegeneratePointError` when two arguments are closer than
    ``threshold``; use :func:`schur_eval_tableaux` there instead.
    """
    lam = as_partition(lam)
    batch = _is_numpy_batch(xs)
    arr = np.atleast_2d(np.asarray(xs, dtype=complex))
    n = arr.shape[1]
    parts = np.array(lam.padded(n))
    if np.any(_min_separation(arr) < threshold):
        raise DegeneratePointError(f"arguments closer than {threshold}; determinant ratio is 0/0")
    stair = np.arange(n - 1, -1, -1)
    num = np.linalg.det(arr[:, None, :] ** (parts + stair)[None, :, None])
    den = np.linalg.det(arr[:, None, :] ** stair[None, :, None])
    out = num / den
    return out if batch else complex(out[0])


# -- expansions ---------------------------------------------------------------


@dataclass(frozen=True)
class SchurExpansion:
    """Finite Schur-basis expansion ``{partition: positive integer}`` in rank ``n``."""

    terms: Mapping[Partition, int] = field(default_factory=dict)
    n: int = 0

    def __post_init__(self):
        clean = {}
        for lam, c in self.terms.items():
            c = int(c)
            if c < 0:
                raise ValueError(f"negative coefficient {c} for {lam}")
            if c:
                clean[as_partition(lam)] = c
        object.__setattr__(self, "terms", MappingProxyType(clean))

    def __reduce__(self):
        return (SchurExpansion, (dict(self.terms), self.n))

    def __getitem__(self, lam) -> int:
        return self.terms.get(as_partition(lam), 0)

    def __len__(self) -> int:
        return len(self.terms)

    def __iter__(self):
        return iter(self.terms)

    def items(self):
        return self.terms.items()

    def __eq__(self, other) -> bool:
        if isinstance(other, SchurExpansion):
            return dict(self.terms) == dict(other.terms)
        if isinstance(other, Mapping):
            return dict(self.terms) == {as_partition(k): v for k, v in other.items()}
        return NotImplemented

    @property
    def is_reduced(self) -> bool:
        return all(len(lam) < self.n for lam in self.terms)

    def by_kappa(self) -> dict[KappaIndex, int]:
        return {partition_to_kappa(lam, self.n): c for lam, c in self.terms.items()}

    def __repr__(self) -> str:
        body = ", ".join(f"{lam}: {c}" for lam, c in sorted(self.terms.items(), reverse=True))
        return f"SchurExpansion({{{body}}}, n={self.n})"


def reduce_mod_determinant(expansion: SchurExpansion | Mapping, n: int) -> SchurExpansion:
    """Drop partitions with more than ``n`` rows and strip height-``n`` columns."""
    items = expansion.items()
    acc: Counter = Counter()
    for lam, c in items:
        lam = as_partition(lam)
        if len(lam) > n:
            continue
        parts = lam.padded(n)
        acc[Partition(tuple(x - parts[-1] for x in parts))] += c
    return SchurExpansion(dict(acc), n)


def _horizontal_strips(shape: tuple[int, ...], k: int, max_rows: int) -> Iterator[tuple[int, ...]]:
    rows = min(len(shape) + 1, max_rows)
    base = shape + (0,) * (rows - len(shape))

    def grow(i: int, left: int, acc: tuple[int, ...]) -> Iterator[tuple[int, ...]]:
        if i == rows:
            if left == 0:
                yield acc
            return
        cap = left if i == 0 else min(left, base[i - 1] - base[i])
        for a in range(cap, -1, -1):
            yield from grow(i + 1, left - a, acc + (base[i] + a,))

    for new in grow(0, k, ()):
        while new and new[-1] == 0:
            new = new[:-1]
        yield new


def _lattice_ok(filling: dict[tuple[int, int], int], letter: int) -> bool:
    # reverse reading word: rows top to bottom, each row right to left
    seen_prev = seen_cur = 0
    for cell in sorted(filling, key=lambda rc: (rc[0], -rc[1])):
        v = filling[cell]
        if v == letter - 1:
            seen_prev += 1
        elif v == letter:
            seen_cur += 1
            if seen_cur > seen_prev:
                return False
    return True


def littlewood_richardson(lam: Partition, mu: Partition, max_rows: int) -> dict[Partition, int]:
    """``{nu: c^nu_{lam,mu}}`` restricted to ``nu`` with at most ``max_rows`` rows."""
    out: Counter = Counter()
    if len(lam) > max_rows or len(mu) > max_rows:
        return {}

    def place(shape: tuple[int, ...], letter: int, filling: dict) -> None:
        if letter > len(mu):
            out[Partition(shape)] += 1
            return
        k = mu.parts[letter - 1]
        padded = shape + (0,)
        for new in _horizontal_strips(shape, k, max_rows):
            cells = {
                (r, c): letter
                for r, w in enumerate(new)
                for c in range(padded[r] if r < len(shape) else 0, w)
            }
            # letter i never sits above row i in an LR tableau
            if any(r < letter - 1 for r, _ in cells):
                continue
            nxt = {**filling, **cells}
            if letter > 1 and not _lattice_ok(nxt, letter):
                continue
            place(new, letter + 1, nxt)

    place(lam.parts, 1, {})
    return dict(out)


@lru_cache(maxsize=4096)
def _multiply_cached(lam: Partition, mu: Partition, n: int) -> SchurExpansion:
    raw = littlewood_richardson(lam, mu, n)
    return reduce_mod_determinant(SchurExpansion(raw, n), n)


def schur_multiply(lam, mu, n: int) -> SchurExpansion:
    """Littlewood-Richardson expansion of ``s_lam * s_mu`` in ``n`` variables, reduced."""
    lam, mu = as_partition(lam), as_partition(mu)
    for p in (lam, mu):
        if len(p) > n:
            raise ValueError(f"partition {p} has more than n={n} parts")
    return _multiply_cached(lam, mu, n)


def lr_bruteforce_oracle(lam, mu, n: int, max_weight: int = 12, reduce: bool = True) -> SchurExpansion:
    """Independent check of :func:`schur_multiply` by explicit monomial arithmetic.

    Both factors are expanded by enumerating their tableaux, the monomial lists
    are multiplied, and the product is rewritten in the Schur basis by
    repeatedly subtracting the Schur polynomial of the lex-leading exponent.
    With ``reduce=False`` the raw GL(n) product is returned, before height-n
    columns are stripped.
    """
    lam, mu = as_partition(lam), as_partition(mu)
    if lam.weight + mu.weight > max_weight:
        raise ValueError(f"combined weight {lam.weight + mu.weight} exceeds guard {max_weight}")

    def content(shape: Partition) -> Counter:
        acc: Counter = Counter()
        for t in ssyt(shape, n):
            exps = [0] * n
            for row in t:
                for v in row:
                    exps[v - 1] += 1
            acc[tuple(exps)] += 1
        return acc

    a, b = content(lam), content(mu)
    poly: Counter = Counter()
    for ea, ca in a.items():
        for eb, cb in b.items():
            poly[tuple(x + y for x, y in zip(ea, eb))] += ca * cb
    result: Counter = Counter()
    while True:
        poly = Counter({k: v for k, v in poly.items() if v})
        if not poly:
            break
        lead = max(poly)
        c = poly[lead]
        nu = Partition(lead)
        result[nu] += c
        for e, k in content(nu).items():
            poly[e] -= c * k
    expansion = SchurExpansion(dict(result), n)
    return reduce_mod_determinant(expansion, n) if reduce else expansion


def partitions_of(weight: int, max_parts: int | None = None, max_part: int | None = None) -> Iterator[Partition]:
    """All partitions of ``weight`` (reverse lexicographic order)."""
    max_part = weight if max_part is None else max_part
    if weight == 0:
        yield Partition(())
        return
    if max_parts == 0:
        return
    for first in range(min(weight, max_part), 0, -1):
        for rest in partitions_of(weight - first, None if max_parts is None else max_parts - 1, first):
            yield Partition((first,) + rest.parts)


def kappas_up_to(n: int, max_size: int) -> Iterable[KappaIndex]:
    """All ``KappaIndex`` of rank ``n`` with ``|kappa| <= max_size``."""
    for kappa in itertools.product(range(max_size + 1), repeat=n - 1):
        if sum(kappa) <= max_size:
            yield KappaIndex(kappa, n)
