"""Hamiltonian data model: parsing, validation and generator structure.

An operator on n qubits is a sum of X words (coefficients ``alpha``, overall
sign -), Y words (``beta``, sign -, even support size only) and Z words
(``kappa``, sign +), each keyed by the support bitmask of the word.  Bit i of
a mask is qubit i; the leftmost character of a support string is qubit 0.
Coefficients are exact rationals so that color comparisons downstream are
crisp; floats appear only inside eigensolvers.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Iterator

from .errors import HamiltonianSyntaxError
from . import gf2

Mask = int


def hw(mask: Mask) -> int:
    """Hamming weight (support size)."""
    return mask.bit_count()


def dot(a: Mask, b: Mask) -> int:
    """Bitwise dot product sum_i a_i b_i."""
    return (a & b).bit_count()


def parse_support(text: str, n: int, line: int = 0) -> Mask:
    if len(text) != n or any(ch not in "01" for ch in text):
        raise HamiltonianSyntaxError(line, f"support {text!r} is not an n={n} bit string")
    mask = 0
    for i, ch in enumerate(text):
        if ch == "1":
            mask |= 1 << i
    return mask


def render_support(mask: Mask, n: int) -> str:
    return "".join("1" if (mask >> i) & 1 else "0" for i in range(n))


def parse_coefficient(text: str, line: int = 0) -> Fraction:
    """Exact rational from a signed decimal or p/q literal."""
    try:
        return Fraction(text)
    except (ValueError, ZeroDivisionError):
        raise HamiltonianSyntaxError(line, f"bad coefficient {text!r}") from None


def render_coefficient(value: Fraction) -> str:
    """Decimal when the denominator allows it exactly, else p/q."""
    den = value.denominator
    d2 = d5 = 0
    while den % 2 == 0:
        den //= 2
        d2 += 1
    while den % 5 == 0:
        den //= 5
        d5 += 1
    if den != 1:
        return f"{value.numerator}/{value.denominator}"
    digits = max(d2, d5)
    if digits == 0:
        return str(value.numerator)
    scaled = value.numerator * 10**digits // value.denominator
    sign = "-" if scaled < 0 else ""
    text = str(abs(scaled)).rjust(digits + 1, "0")
    return f"{sign}{text[:-digits]}.{text[-digits:]}"


@dataclass
class Hamiltonian:
    """Coefficient maps of one operator; immutable by convention after parse."""

    n: int
    alpha: dict[Mask, Fraction] = field(default_factory=dict)
    beta: dict[Mask, Fraction] = field(default_factory=dict)
    kappa: dict[Mask, Fraction] = field(default_factory=dict)

    @property
    def k(self) -> int:
        """Locality bound: largest stored support size (0 when empty)."""
        supports = [*self.alpha, *self.beta, *self.kappa]
        return max((hw(b) for b in supports), default=0)

    def max_alpha(self) -> Fraction:
        return max(self.alpha.values(), default=Fraction(0))

    def max_abs_beta(self) -> Fraction:
        return max((abs(v) for v in self.beta.values()), default=Fraction(0))

    def terms(self) -> Iterator[tuple[str, Mask, Fraction]]:
        for kind, table in (("X", self.alpha), ("Y", self.beta), ("Z", self.kappa)):
            for mask in sorted(table):
                yield kind, mask, table[mask]

    def __eq__(self, other) -> bool:
        if not isinstance(other, Hamiltonian):
            return NotImplemented
        return (
            self.n == other.n
            and _nonzero(self.alpha) == _nonzero(other.alpha)
            and _nonzero(self.beta) == _nonzero(other.beta)
            and _nonzero(self.kappa) == _nonzero(other.kappa)
        )


def _nonzero(table: dict[Mask, Fraction]) -> dict[Mask, Fraction]:
    return {b: v for b, v in table.items() if v != 0}


@dataclass
class ValidationReport:
    violations: list[tuple[str, str, str]] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.violations


def parse_hamiltonian(text: str) -> Hamiltonian:
    """Parse the one-directive-per-line format ('#' starts a comment).

    ``n <int>`` must come first; then ``X|Y|Z <support> <coeff>`` lines.
    Duplicate (type, support) pairs, identity supports, wrong-length supports
    and odd-weight Y terms are rejected with the line number.
    """
    ham: Hamiltonian | None = None
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        tokens = line.split()
        if ham is None:
            if tokens[0] != "n" or len(tokens) != 2:
                raise HamiltonianSyntaxError(lineno, "expected 'n <int>' before any term")
            try:
                n = int(tokens[1])
            except ValueError:
                raise HamiltonianSyntaxError(lineno, f"bad qubit count {tokens[1]!r}") from None
            if n < 1:
                raise HamiltonianSyntaxError(lineno, "qubit count must be positive")
            ham = Hamiltonian(n=n)
            continue
        if tokens[0] == "n":
            raise HamiltonianSyntaxError(lineno, "duplicate 'n' directive")
        if len(tokens) != 3 or tokens[0] not in ("X", "Y", "Z"):
            raise HamiltonianSyntaxError(lineno, f"expected 'X|Y|Z <support> <coeff>', got {line!r}")
        kind = tokens[0]
        mask = parse_support(tokens[1], ham.n, lineno)
        value = parse_coefficient(tokens[2], lineno)
        if mask == 0:
            raise HamiltonianSyntaxError(
                lineno, "identity support (all zeros) only shifts the spectrum; not allowed"
            )
        if kind == "Y" and hw(mask) % 2 != 0:
            raise HamiltonianSyntaxError(lineno, f"Y term on odd-size support {tokens[1]}")
        table = {"X": ham.alpha, "Y": ham.beta, "Z": ham.kappa}[kind]
        if mask in table:
            raise HamiltonianSyntaxError(lineno, f"duplicate term {kind} {tokens[1]}")
        table[mask] = value
    if ham is None:
        raise HamiltonianSyntaxError(0, "empty document: missing 'n' directive")
    return ham


def serialize_hamiltonian(ham: Hamiltonian) -> str:
    """Canonical text form: 'n' first, terms sorted by (type, support string)."""
    lines = [f"n {ham.n}"]
    entries = []
    for kind, mask, value in ham.terms():
        entries.append((kind, render_support(mask, ham.n), render_coefficient(value)))
    entries.sort()
    lines.extend(f"{kind} {support} {coeff}" for kind, support, coeff in entries)
    return "\n".join(lines) + "\n"


def validate_stoquastic(ham: Hamiltonian) -> ValidationReport:
    """Check every model invariant; violations are data, not exceptions."""
    report = ValidationReport()
    bad = report.violations.append
    n = ham.n
    full = (1 << n) - 1
    for name, table in (("X", ham.alpha), ("Y", ham.beta), ("Z", ham.kappa)):
        for mask in table:
            if mask == 0:
                bad(("identity-support", "0" * n, f"{name} term on the identity support"))
            elif mask & ~full:
                bad(("support-range", bin(mask), f"{name} support exceeds n={n} bits"))
    for mask, value in ham.alpha.items():
        if value < 0:
            s = render_support(mask, n)
            bad(("alpha-negative", s, f"alpha[{s}]={value} < 0"))
    for mask, value in ham.beta.items():
        if value == 0:
            continue
        s = render_support(mask, n)
        if hw(mask) % 2 != 0:
            bad(("odd-weight-Y", s, f"beta[{s}] on odd-size support"))
        if abs(value) > ham.alpha.get(mask, Fraction(0)):
            bad(("beta-bound", s, f"|beta[{s}]|={abs(value)} exceeds alpha[{s}]"))
    return report


def edge_generators(ham: Hamiltonian) -> list[Mask]:
    """Supports with nonzero X coefficient, ascending; XOR by any of these
    is one hop on the hypercube."""
    return sorted(b for b, v in ham.alpha.items() if v != 0)


def generator_rank(generators: Iterable[Mask]) -> int:
    """Rank of the generator set over GF(2); a fully reachable XOR component
    has exactly 2**rank vertices."""
    return gf2.rank(generators)
