"""Truncated free-algebra engine for products of exponentials in two symbols.

Everything in this module lives in the free associative algebra on two
symbols A and B, truncated at a fixed word degree ``truncation`` (at most
:data:`MAX_TRUNCATION`).  A series is stored densely, one coefficient vector
per degree; the word with letters ``(g_0, ..., g_{j-1})`` sits at index
``sum(g_i << (j-1-i))`` inside the degree-``j`` vector, i.e. words are packed
bit strings with A = 0, B = 1 and the first letter in the most significant
position.  Concatenation of words is then exactly the row-major ravel of an
outer product, which keeps the Cauchy product (:func:`series_mul`) short.

Logarithms of products of exponentials are Lie elements (sums of nested
commutators); :func:`lie_project` rewrites them in the right-nested
commutator basis built by :func:`basis_build` (dimensions 2, 1, 2, 3, 6, 9
for degrees 1..6) and flags non-Lie inputs through the least-squares
residual.  Degree 7 has no basis here; callers fall back to raw word-
coefficient norms for that degree.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Iterable, Iterator, Mapping

import numpy as np

#: Hard ceiling for the word-degree truncation of the engine.
MAX_TRUNCATION = 7

#: Highest degree covered by the nested-commutator basis.
MAX_BASIS_DEGREE = 6

#: Dimension of the commutator subspace at degrees 1..6.
LIE_DIMS = (2, 1, 2, 3, 6, 9)

#: Default scaled tolerance for the Lie-membership (Friedrichs) residual test.
DEFAULT_LIE_TOL = 1e-10


class LieMembershipError(ValueError):
    """Raised when a series fails the Lie-membership residual test."""


class Generator(enum.IntEnum):
    """The two formal symbols.  The integer value is the packed bit."""

    A = 0
    B = 1

    def __str__(self) -> str:  # pragma: no cover - cosmetic
        return self.name


def as_generator(g) -> Generator:
    """Coerce ``g`` ('A'/'B', 0/1 or Generator) into a :class:`Generator`."""
    if isinstance(g, Generator):
        return g
    if isinstance(g, str):
        try:
            return Generator[g]
        except KeyError:
            raise ValueError(f"unknown generator {g!r}") from None
    return Generator(g)


@dataclass(frozen=True)
class Word:
    """A word in the two symbols; ``letters`` may be empty (the unit word)."""

    letters: tuple[Generator, ...]

    def __post_init__(self) -> None:
        object.__setattr__(
            self, "letters", tuple(as_generator(g) for g in self.letters)
        )
        if len(self.letters) > MAX_TRUNCATION:
            raise ValueError(f"word degree {len(self.letters)} exceeds {MAX_TRUNCATION}")

    @classmethod
    def from_string(cls, text: str) -> "Word":
        """Parse e.g. ``"AAB"``; ``""`` or ``"1"`` gives the unit word."""
        if text in ("", "1"):
            return cls(())
        return cls(tuple(Generator[ch] for ch in text))

    @classmethod
    def from_index(cls, degree: int, index: int) -> "Word":
        """Inverse of :attr:`index` at the given degree."""
        if not 0 <= index < (1 << degree):
            raise ValueError(f"index {index} out of range for degree {degree}")
        letters = tuple(
            Generator((index >> (degree - 1 - i)) & 1) for i in range(degree)
        )
        return cls(letters)

    @property
    def degree(self) -> int:
        return len(self.letters)

    @property
    def index(self) -> int:
        """Packed-bit position of this word inside its degree block."""
        idx = 0
        for g in self.letters:
            idx = (idx << 1) | int(g)
        return idx

    def __str__(self) -> str:
        return "".join(g.name for g in self.letters) if self.letters else "1"


class TruncatedSeries:
    """Dense degree-truncated series; one numpy vector per word degree."""

    __slots__ = ("truncation", "_deg")

    def __init__(self, truncation: int, blocks: list[np.ndarray]):
        if not 1 <= truncation <= MAX_TRUNCATION:
            raise ValueError(
                f"truncation must lie in 1..{MAX_TRUNCATION}, got {truncation}"
            )
        self.truncation = truncation
        self._deg = blocks  # blocks[j] has length 2**j, j = 0..truncation

    # -- constructors -------------------------------------------------

    @classmethod
    def zero(cls, truncation: int, *, complex_: bool = False) -> "TruncatedSeries":
        dtype = np.complex128 if complex_ else np.float64
        return cls(truncation, [np.zeros(1 << j, dtype=dtype) for j in range(truncation + 1)])

    @classmethod
    def unit(cls, truncation: int, *, complex_: bool = False) -> "TruncatedSeries":
        s = cls.zero(truncation, complex_=complex_)
        s._deg[0][0] = 1.0
        return s

    @classmethod
    def from_terms(
        cls, truncation: int, terms: Mapping[Word | str, complex]
    ) -> "TruncatedSeries":
        complex_ = any(isinstance(c, complex) and c.imag != 0.0 for c in terms.values())
        s = cls.zero(truncation, complex_=complex_)
        for word, coeff in terms.items():
            if isinstance(word, str):
                word = Word.from_string(word)
            if word.degree > truncation:
                raise ValueError(f"word {word} exceeds truncation {truncation}")
            s._deg[word.degree][word.index] += coeff
        return s

    # -- inspection ----------------------------------------------------

    @property
    def is_complex(self) -> bool:
        return any(np.iscomplexobj(b) for b in self._deg)

    def coefficient(self, word: Word | str) -> complex:
        if isinstance(word, str):
            word = Word.from_string(word)
        if word.degree > self.truncation:
            raise ValueError(f"word {word} exceeds truncation {self.truncation}")
        value = self._deg[word.degree][word.index]
        return complex(value) if self.is_complex else float(value)

    def degree_coefficients(self, degree: int) -> np.ndarray:
        """Copy of the full coefficient vector at one degree."""
        if not 0 <= degree <= self.truncation:
            raise ValueError(f"degree {degree} outside 0..{self.truncation}")
        return self._deg[degree].copy()

    def terms(self, *, tol: float = 0.0) -> dict[Word, complex]:
        """Nonzero coefficients as an explicit word -> scalar map."""
        out: dict[Word, complex] = {}
        for j, block in enumerate(self._deg):
            for idx in np.flatnonzero(np.abs(block) > tol):
                out[Word.from_index(j, int(idx))] = self.coefficient(
                    Word.from_index(j, int(idx))
                )
        return out

    def norm(self) -> float:
        """Euclidean norm over all word coefficients (all degrees)."""
        return math.sqrt(sum(float(np.sum(np.abs(b) ** 2)) for b in self._deg))

    # -- structural helpers --------------------------------------------

    def copy(self) -> "TruncatedSeries":
        return TruncatedSeries(self.truncation, [b.copy() for b in self._deg])

    def extended(self, truncation: int) -> "TruncatedSeries":
        """Same series viewed at a higher (or equal) truncation."""
        if truncation < self.truncation:
            raise ValueError("use truncated() to lower the truncation")
        dtype = self._deg[0].dtype
        blocks = [b.copy() for b in self._deg]
        blocks += [
            np.zeros(1 << j, dtype=dtype) for j in range(self.truncation + 1, truncation + 1)
        ]
        return TruncatedSeries(truncation, blocks)

    def truncated(self, truncation: int) -> "TruncatedSeries":
        """Drop all degrees above ``truncation``."""
        if truncation >= self.truncation:
            return self.copy()
        return TruncatedSeries(truncation, [self._deg[j].copy() for j in range(truncation + 1)])

    # -- linear arithmetic ----------------------------------------------

    def _check_compatible(self, other: "TruncatedSeries") -> None:
        if self.truncation != other.truncation:
            raise ValueError(
                f"truncation mismatch: {self.truncation} vs {other.truncation}"
            )

    def __add__(self, other: "TruncatedSeries") -> "TruncatedSeries":
        self._check_compatible(other)
        return TruncatedSeries(
            self.truncation, [x + y for x, y in zip(self._deg, other._deg)]
        )

    def __sub__(self, other: "TruncatedSeries") -> "TruncatedSeries":
        self._check_compatible(other)
        return TruncatedSeries(
            self.truncation, [x - y for x, y in zip(self._deg, other._deg)]
        )

    def __neg__(self) -> "TruncatedSeries":
        return TruncatedSeries(self.truncation, [-x for x in self._deg])

    def __mul__(self, scalar) -> "TruncatedSeries":
        return TruncatedSeries(self.truncation, [x * scalar for x in self._deg])

    __rmul__ = __mul__

    def __matmul__(self, other: "TruncatedSeries") -> "TruncatedSeries":
        return series_mul(self, other)

    def allclose(self, other: "TruncatedSeries", *, tol: float = 1e-12) -> bool:
        self._check_compatible(other)
        return all(
            np.allclose(x, y, rtol=0.0, atol=tol) for x, y in zip(self._deg, other._deg)
        )

    def __repr__(self) -> str:  # pragma: no cover - debugging aid
        shown = ", ".join(f"{w}: {c:+.6g}" for w, c in list(self.terms().items())[:8])
        return f"TruncatedSeries(N={self.truncation}, {{{shown}}})"


# ---------------------------------------------------------------------------
# Ring operations
# ---------------------------------------------------------------------------


def series_mul(a: TruncatedSeries, b: TruncatedSeries) -> TruncatedSeries:
    """Cauchy product in the truncated word algebra.

    Concatenating the degree-p word ``u`` with the degree-q word ``v`` lands
    at packed index ``(u << q) | v``, which is precisely the row-major ravel
    of ``outer(a_p, b_q)``; each result degree is a sum of such blocks.
    """
    a._check_compatible(b)
    n = a.truncation
    complex_ = a.is_complex or b.is_complex
    out = TruncatedSeries.zero(n, complex_=complex_)
    for j in range(n + 1):
        acc = out._deg[j]
        for p in range(j + 1):
            ap = a._deg[p]
            bq = b._deg[j - p]
            if not ap.any() or not bq.any():
                continue
            acc += np.outer(ap, bq).ravel()
    return out


def exp_slot(generator, coefficient, truncation: int) -> TruncatedSeries:
    """Exponential of ``coefficient * generator`` as a truncated series."""
    g = as_generator(generator)
    complex_ = isinstance(coefficient, (complex, np.complexfloating))
    s = TruncatedSeries.zero(truncation, complex_=complex_)
    s._deg[0][0] = 1.0
    for k in range(1, truncation + 1):
        # the word g^k is all-zero bits for A, all-one bits for B
        idx = 0 if g is Generator.A else (1 << k) - 1
        s._deg[k][idx] = coefficient**k / math.factorial(k)
    return s


def series_log(s: TruncatedSeries) -> TruncatedSeries:
    """log of a series whose empty-word coefficient is exactly 1."""
    lead = complex(s._deg[0][0])
    if abs(lead - 1.0) > 1e-12:
        raise ValueError(f"series_log needs leading coefficient 1, got {lead}")
    n = s.truncation
    z = s - TruncatedSeries.unit(n, complex_=s.is_complex)
    z._deg[0][0] = 0.0  # scrub round-off in the constant term
    out = TruncatedSeries.zero(n, complex_=s.is_complex)
    power = z.copy()
    for k in range(1, n + 1):
        out = out + ((-1.0) ** (k + 1) / k) * power
        if k < n:
            power = series_mul(power, z)
    return out


def series_exp(s: TruncatedSeries) -> TruncatedSeries:
    """exp of a series with no constant term (inverse of :func:`series_log`)."""
    if abs(complex(s._deg[0][0])) > 1e-12:
        raise ValueError("series_exp needs a vanishing empty-word coefficient")
    n = s.truncation
    out = TruncatedSeries.unit(n, complex_=s.is_complex)
    power = s.copy()
    power._deg[0][0] = 0.0
    term = power.copy()
    for k in range(1, n + 1):
        out = out + (1.0 / math.factorial(k)) * term
        if k < n:
            term = series_mul(term, power)
    return out


def scheme_log(slots: Iterable, truncation: int) -> TruncatedSeries:
    """log of the left-to-right product of exponentials ``exp(c_i * g_i)``.

    ``slots`` yields ``(generator, coefficient)`` pairs; the first pair is the
    leftmost factor of the product.
    """
    slots = list(slots)
    if not slots:
        raise ValueError("scheme_log needs at least one slot")
    product: TruncatedSeries | None = None
    for g, c in slots:
        factor = exp_slot(g, c, truncation)
        product = factor if product is None else series_mul(product, factor)
    return series_log(product)


# ---------------------------------------------------------------------------
# Nested-commutator basis
# ---------------------------------------------------------------------------

# Each entry maps (degree, position) -> (sign, bracketing letter, child), with
# the two degree-1 atoms spelled out explicitly.  Positions are 1-based.
_BASIS_RECIPES: dict[tuple[int, int], tuple[int, Generator, tuple[int, int]]] = {
    (2, 1): (+1, Generator.A, (1, 2)),
    (3, 1): (+1, Generator.A, (2, 1)),
    (3, 2): (+1, Generator.B, (2, 1)),
    (4, 1): (+1, Generator.A, (3, 1)),
    (4, 2): (+1, Generator.B, (3, 1)),
    (4, 3): (-1, Generator.B, (3, 2)),
    (5, 1): (+1, Generator.A, (4, 1)),
    (5, 2): (+1, Generator.B, (4, 1)),
    (5, 3): (+1, Generator.A, (4, 2)),
    (5, 4): (+1, Generator.B, (4, 2)),
    (5, 5): (+1, Generator.A, (4, 3)),
    (5, 6): (+1, Generator.B, (4, 3)),
    (6, 1): (+1, Generator.A, (5, 1)),
    (6, 2): (+1, Generator.B, (5, 1)),
    (6, 3): (+1, Generator.A, (5, 2)),
    (6, 4): (+1, Generator.A, (5, 4)),
    (6, 5): (+1, Generator.B, (5, 2)),
    (6, 6): (+1, Generator.A, (5, 5)),
    (6, 7): (+1, Generator.B, (5, 5)),
    (6, 8): (+1, Generator.A, (5, 6)),
    (6, 9): (+1, Generator.B, (5, 6)),
}


@dataclass(frozen=True)
class BasisElement:
    """One nested commutator E_{j,l}; ``series`` is its word expansion."""

    degree: int
    position: int  # 1-based within the degree
    sign: int
    letter: Generator | None  # bracketing letter; None for the two atoms
    child: tuple[int, int] | None
    series: TruncatedSeries = field(repr=False)
    a_count: int  # multidegree in the symbol A (B count = degree - a_count)

    @property
    def label(self) -> str:
        return f"E{self.degree},{self.position}"


@dataclass(frozen=True)
class LieBasis:
    """Nested-commutator basis with per-degree word matrices and pseudoinverses."""

    truncation: int
    elements: dict[tuple[int, int], BasisElement] = field(repr=False)
    matrices: dict[int, np.ndarray] = field(repr=False)
    pinvs: dict[int, np.ndarray] = field(repr=False)

    def dims(self) -> tuple[int, ...]:
        return LIE_DIMS[: self.truncation]

    def dim(self, degree: int) -> int:
        return LIE_DIMS[degree - 1]

    def element(self, degree: int, position: int) -> BasisElement:
        return self.elements[(degree, position)]

    def degree_elements(self, degree: int) -> list[BasisElement]:
        return [self.elements[(degree, l)] for l in range(1, self.dim(degree) + 1)]


def _commutator(x: TruncatedSeries, y: TruncatedSeries) -> TruncatedSeries:
    return series_mul(x, y) - series_mul(y, x)


@lru_cache(maxsize=None)
def basis_build(truncation: int = MAX_BASIS_DEGREE) -> LieBasis:
    """Build the nested-commutator basis up to ``truncation`` (1..6).

    The construction raises if any per-degree word matrix loses full column
    rank, which would mean the recipes fail to span independent directions.
    """
    if not 1 <= truncation <= MAX_BASIS_DEGREE:
        raise ValueError(f"basis truncation must lie in 1..{MAX_BASIS_DEGREE}")

    elements: dict[tuple[int, int], BasisElement] = {}
    letter_series = {
        Generator.A: TruncatedSeries.from_terms(truncation, {"A": 1.0}),
        Generator.B: TruncatedSeries.from_terms(truncation, {"B": 1.0}),
    }
    elements[(1, 1)] = BasisElement(1, 1, +1, None, None, letter_series[Generator.A], 1)
    elements[(1, 2)] = BasisElement(1, 2, +1, None, None, letter_series[Generator.B], 0)

    for (j, l), (sign, letter, child) in sorted(_BASIS_RECIPES.items()):
        if j > truncation:
            break
        child_elt = elements[child]
        series = sign * _commutator(letter_series[letter], child_elt.series)
        a_count = child_elt.a_count + (1 if letter is Generator.A else 0)
        elements[(j, l)] = BasisElement(j, l, sign, letter, child, series, a_count)

    matrices: dict[int, np.ndarray] = {}
    pinvs: dict[int, np.ndarray] = {}
    for j in range(1, truncation + 1):
        dim = LIE_DIMS[j - 1]
        m = np.column_stack(
            [elements[(j, l)].series.degree_coefficients(j).real for l in range(1, dim + 1)]
        )
        if np.linalg.matrix_rank(m) != dim:
            raise RuntimeError(f"basis matrix at degree {j} is rank deficient")
        matrices[j] = m
        pinvs[j] = np.linalg.pinv(m)
    return LieBasis(truncation, elements, matrices, pinvs)


# ---------------------------------------------------------------------------
# Projection
# ---------------------------------------------------------------------------


@dataclass
class LieCoefficients:
    """Per-degree coefficients of a Lie element in the nested-commutator basis.

    ``vectors[j]`` holds the coefficients at degree j (up to the basis range);
    degrees beyond the basis keep only the raw word-coefficient norm in
    ``word_norms``.  ``residuals[j]`` is the absolute least-squares residual
    of the projection at degree j.
    """

    truncation: int
    vectors: dict[int, np.ndarray]
    residuals: dict[int, float]
    word_norms: dict[int, float]

    def w(self, degree: int, position: int) -> complex:
        """Coefficient w_{degree,position} with the customary 1-based position."""
        value = self.vectors[degree][position - 1]
        return complex(value) if np.iscomplexobj(self.vectors[degree]) else float(value)

    def vector(self, degree: int) -> np.ndarray:
        return self.vectors[degree].copy()

    def degree_norm(self, degree: int) -> float:
        """Euclidean size of degree ``degree``: basis norm, or word norm past the basis."""
        if degree in self.vectors:
            return float(np.linalg.norm(self.vectors[degree]))
        return self.word_norms[degree]


def lie_project(
    series: TruncatedSeries,
    basis: LieBasis | None = None,
    *,
    tol: float = DEFAULT_LIE_TOL,
    require_lie: bool = True,
) -> LieCoefficients:
    """Project a series onto the nested-commutator basis, degree by degree.

    The least-squares residual at each degree is compared against
    ``tol * max(1, |coefficients at that degree|)``; a violation means the
    input is not a Lie element (Friedrichs criterion) and raises
    :class:`LieMembershipError` unless ``require_lie`` is False.  Degrees
    beyond the basis range (i.e. degree 7) only record the raw word norm.
    """
    if basis is None:
        basis = basis_build(min(series.truncation, MAX_BASIS_DEGREE))

    const = complex(series._deg[0][0])
    if abs(const) > 1e-9:
        raise ValueError("series has a constant term; logs of products never do")

    vectors: dict[int, np.ndarray] = {}
    residuals: dict[int, float] = {}
    word_norms: dict[int, float] = {}
    for j in range(1, series.truncation + 1):
        y = series.degree_coefficients(j)
        if j <= basis.truncation:
            w = basis.pinvs[j] @ y
            residual = float(np.linalg.norm(basis.matrices[j] @ w - y))
            scale = max(1.0, float(np.linalg.norm(y)))
            if require_lie and residual > tol * scale:
                raise LieMembershipError(
                    f"degree-{j} word coefficients are not a commutator polynomial "
                    f"(residual {residual:.3e} > {tol:.1e} * {scale:.3e})"
                )
            vectors[j] = w
            residuals[j] = residual
        else:
            word_norms[j] = float(np.linalg.norm(y))
    return LieCoefficients(series.truncation, vectors, residuals, word_norms)
