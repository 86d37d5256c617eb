"""Exact exponent calculus for mixed-norm Strichartz estimates.

Every quantity here is a :class:`fractions.Fraction` or the sentinel
:data:`INF`. Nothing in this module returns a float; admissibility is an
equality constraint and rounding would misclassify boundary triples.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import total_ordering
from typing import Callable, Union

__all__ = [
    "INF",
    "Exponent",
    "ExponentError",
    "EmptyWindowError",
    "ExponentTriple",
    "EquationParams",
    "SelectionResult",
    "as_exponent",
    "recip",
    "dual",
    "to_float",
    "critical_index",
    "scaling_exponent",
    "in_class_S",
    "in_class_W",
    "dispersive_beta",
    "check_thm1_conditions",
    "select_schrodinger_exponents",
    "select_wave_exponents",
    "admissible_enumerate",
    "midpoint",
]


class ExponentError(ValueError):
    """Invalid exponent or parameter input."""


class EmptyWindowError(ExponentError):
    """The epsilon window of a selection lemma is empty."""


@total_ordering
class _Infinity:
    """Positive infinity as an exponent value; ``recip(INF) == 0``."""

    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self):
        return "INF"

    def __str__(self):
        return "inf"

    def __eq__(self, other):
        return other is self

    def __hash__(self):
        return hash("dispersive_lab.INF")

    def __lt__(self, other):
        return False

    def __gt__(self, other):
        return other is not self

    def __reduce__(self):
        return (_Infinity, ())


INF = _Infinity()

Exponent = Union[Fraction, _Infinity]


def as_exponent(value) -> Exponent:
    """Coerce ``value`` to an exact exponent.

    Accepts ints, Fractions, ``INF``, strings such as ``"16/3"`` or
    ``"inf"``, and floats only when they are ``math.inf``. Finite floats are
    refused so that no rounding can leak into the exact arithmetic.
    """
    if value is INF:
        return INF
    if isinstance(value, Fraction):
        return value
    if isinstance(value, bool):
        raise ExponentError(f"not an exponent: {value!r}")
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, float):
        if value == float("inf"):
            return INF
        raise ExponentError(
            f"finite float {value!r} is not exact; pass a Fraction or a string like '16/3'"
        )
    if isinstance(value, str):
        text = value.strip().lower()
        if text in ("inf", "infinity", "+inf", "∞"):
            return INF
        try:
            return Fraction(text)
        except ValueError as exc:
            raise ExponentError(f"cannot parse exponent {value!r}") from exc
    raise ExponentError(f"not an exponent: {value!r}")


def recip(x: Exponent) -> Fraction:
    """Return ``1/x`` exactly, with ``1/INF == 0``."""
    if x is INF:
        return Fraction(0)
    x = as_exponent(x)
    if x == 0:
        raise ExponentError("reciprocal of zero exponent")
    return 1 / x


def _from_recip(value: Fraction) -> Exponent:
    return INF if value == 0 else 1 / value


def dual(x: Exponent) -> Exponent:
    """Hölder conjugate: ``1/x + 1/x' = 1``."""
    x = as_exponent(x)
    if x is not INF and x < 1:
        raise ExponentError(f"no Hölder dual for exponent {x} < 1")
    return _from_recip(1 - recip(x))


def to_float(x: Exponent) -> float:
    """Floating-point view for numerical modules (the only float exit)."""
    return float("inf") if x is INF else float(x)


def _fmt(x: Exponent) -> str:
    return "inf" if x is INF else str(x)


@dataclass(frozen=True)
class ExponentTriple:
    """Mixed-norm exponents ``(q, r, r_tilde)`` for ``L^q_t L^r_x L^r~_y``."""

    q: Exponent
    r: Exponent
    r_tilde: Exponent

    def __post_init__(self):
        for name in ("q", "r", "r_tilde"):
            val = as_exponent(getattr(self, name))
            if val is not INF and val < 1:
                raise ExponentError(f"{name} = {val} is below 1")
            object.__setattr__(self, name, val)

    @classmethod
    def parse(cls, values) -> "ExponentTriple":
        q, r, rt = values
        return cls(as_exponent(q), as_exponent(r), as_exponent(rt))

    def recips(self) -> tuple[Fraction, Fraction, Fraction]:
        return recip(self.q), recip(self.r), recip(self.r_tilde)

    def dual(self) -> "ExponentTriple":
        return ExponentTriple(dual(self.q), dual(self.r), dual(self.r_tilde))

    def as_floats(self) -> tuple[float, float, float]:
        return to_float(self.q), to_float(self.r), to_float(self.r_tilde)

    def as_strings(self) -> list[str]:
        return [_fmt(self.q), _fmt(self.r), _fmt(self.r_tilde)]

    def __str__(self):
        return "(" + ", ".join(self.as_strings()) + ")"


@dataclass(frozen=True)
class EquationParams:
    """Dimension ``N``, y-dimension ``k``, flow order ``sigma``, regularity ``s``, power ``p``."""

    N: int
    k: int
    sigma: int
    s: Fraction
    p: Fraction

    def __post_init__(self):
        object.__setattr__(self, "s", as_exponent(self.s))
        object.__setattr__(self, "p", as_exponent(self.p))
        if self.N < 1 or not 1 <= self.k <= self.N:
            raise ExponentError(f"need N >= 1 and 1 <= k <= N, got N={self.N}, k={self.k}")
        if self.sigma not in (1, 2):
            raise ExponentError(f"sigma must be 1 or 2, got {self.sigma}")
        if self.p is INF or self.p <= 1:
            raise ExponentError(f"p must satisfy 1 < p < inf, got {self.p}")


@dataclass(frozen=True)
class SelectionResult:
    epsilon: Fraction
    window: tuple[Fraction, Fraction]
    triple: ExponentTriple
    beta: Fraction

    def __post_init__(self):
        lo, hi = self.window
        if not lo < self.epsilon < hi:
            raise ExponentError(f"epsilon {self.epsilon} outside open window ({lo}, {hi})")
        if self.beta <= 0:
            raise ExponentError(f"beta = {self.beta} is not positive")

    def to_dict(self) -> dict:
        return {
            "epsilon": str(self.epsilon),
            "window": [str(self.window[0]), str(self.window[1])],
            "triple": self.triple.as_strings(),
            "beta": str(self.beta),
        }


def _check_power(p: Fraction) -> Fraction:
    p = as_exponent(p)
    if p is INF or p <= 1:
        raise ExponentError(f"p must satisfy 1 < p < inf, got {p}")
    return p


def critical_index(N: int, p) -> Fraction:
    """``s_c = N/2 - 2/(p-1)``."""
    p = _check_power(p)
    return Fraction(N, 2) - 2 / (p - 1)


def scaling_exponent(N: int, p, s) -> Fraction:
    """Power of ``delta`` in ``||f_delta||_{H^s} = delta^e ||f||_{H^s}``."""
    p = _check_power(p)
    return 2 / (p - 1) + as_exponent(s) - Fraction(N, 2)


def _basic_ranges(t: ExponentTriple) -> bool:
    # 2 < q <= inf, 2 <= r~ <= r < inf
    return (
        t.q > 2
        and t.r is not INF
        and t.r_tilde is not INF
        and 2 <= t.r_tilde <= t.r
    )


def in_class_S(N: int, k: int, t: ExponentTriple) -> bool:
    """Membership in the Schrödinger class ``A_S(N, k)``."""
    if not 1 <= k < N:
        raise ExponentError(f"need 1 <= k < N, got N={N}, k={k}")
    if not _basic_ranges(t):
        return False
    iq, ir, irt = t.recips()
    return 2 * iq + (N - k) * ir + k * irt == Fraction(N, 2)


def in_class_W(N: int, k: int, t: ExponentTriple) -> bool:
    """Membership in the wave class ``A_W(N, k)``."""
    if not 1 <= k < N:
        raise ExponentError(f"need 1 <= k < N, got N={N}, k={k}")
    if not _basic_ranges(t):
        return False
    iq, ir, irt = t.recips()
    half = Fraction(N - 1, 2)
    return iq + (N - k) * ir + k * irt == half and 2 * iq + (N - k - 1) * ir + k * irt <= half


def dispersive_beta(N: int, k: int, sigma: int, r, r_tilde) -> Fraction:
    """Fixed-time decay rate ``(N-k-2+sigma)(1/2-1/r) + k(1/2-1/r~)``."""
    r, r_tilde = as_exponent(r), as_exponent(r_tilde)
    if not 1 <= k <= N or sigma not in (1, 2):
        raise ExponentError(f"invalid (N, k, sigma) = ({N}, {k}, {sigma})")
    if r < 2 or r_tilde < 2:
        raise ExponentError(f"exponents must be >= 2, got r={r}, r_tilde={r_tilde}")
    half = Fraction(1, 2)
    return (N - k - 2 + sigma) * (half - recip(r)) + k * (half - recip(r_tilde))


def check_thm1_conditions(params: EquationParams, t: ExponentTriple) -> dict:
    """Evaluate the dispersion condition and the scaling-implied regularity.

    Returns a dict with ``condition_sc2`` (``2/q <= beta_sigma(r, r~)``),
    ``implied_s`` (solving ``sigma/q = (N-k)(1/2-1/r) + k(1/2-1/r~) - s``)
    and ``strict`` (the dispersion inequality holds strictly).
    """
    N, k, sigma = params.N, params.k, params.sigma
    iq, ir, irt = t.recips()
    half = Fraction(1, 2)
    rhs = dispersive_beta(N, k, sigma, t.r, t.r_tilde)
    lhs = 2 * iq
    implied_s = (N - k) * (half - ir) + k * (half - irt) - sigma * iq
    return {
        "condition_sc2": lhs <= rhs,
        "implied_s": implied_s,
        "strict": lhs < rhs,
    }


def midpoint(lo: Fraction, hi: Fraction) -> Fraction:
    return (lo + hi) / 2


PickRule = Union[Callable[[Fraction, Fraction], Fraction], Fraction, int, str, None]


def _pick(pick: PickRule, lo: Fraction, hi: Fraction) -> Fraction:
    if pick is None:
        eps = midpoint(lo, hi)
    elif callable(pick):
        eps = as_exponent(pick(lo, hi))
    else:
        eps = as_exponent(pick)
    if eps is INF or not lo < eps < hi:
        raise ExponentError(f"epsilon {eps} is not inside the open window ({lo}, {hi})")
    return eps


def select_schrodinger_exponents(N: int, s, p, pick: PickRule = None) -> SelectionResult:
    """Choose ``eps_0`` and the Hölder triple used in the NLS nonlinear estimate.

    Parameters
    ----------
    N : int
        Total dimension, ``N >= 3``; the y-block has dimension 2.
    s, p : Fraction-like
        Regularity ``0 < s <= 1`` and power ``1 < p < 1 + 4/(N - 2s)``.
    pick : callable, Fraction or None
        Rule ``(lo, hi) -> eps`` or an explicit ``eps``. Default: midpoint.

    Raises
    ------
    EmptyWindowError
        If the open epsilon window is empty.
    """
    s, p = as_exponent(s), _check_power(p)
    if N < 3:
        raise ExponentError(f"Schrödinger selection needs N >= 3, got {N}")
    if not 0 < s <= 1:
        raise ExponentError(f"need 0 < s <= 1, got {s}")
    lo = (1 - s) * (p - 1) / 2
    upper_sub = Fraction(N - 2, 4) * (1 + Fraction(4, N - 2) - p)
    hi = min(upper_sub, (p - 1) / 2)
    if not lo < hi:
        raise EmptyWindowError(f"empty eps_0 window ({lo}, {hi}) for N={N}, s={s}, p={p}")
    if p >= 1 + Fraction(4) / (N - 2 * s):
        raise ExponentError(f"p = {p} is not subcritical for N={N}, s={s}")
    eps = _pick(pick, lo, hi)
    inv_r = 1 / (p + 1)
    inv_rt = Fraction(1, 2) - eps / (p + 1)
    inv_q = Fraction(N - 2, 4) - Fraction(N - 2, 2) / (p + 1) + eps / (p + 1)
    if inv_q < 0:
        raise ExponentError(f"selected 1/q_0 = {inv_q} is negative")
    triple = ExponentTriple(_from_recip(inv_q), _from_recip(inv_r), _from_recip(inv_rt))
    beta = 1 - (p + 1) * inv_q
    if not in_class_S(N, 2, triple):
        raise ExponentError(f"selected triple {triple} is not in A_S({N}, 2)")
    assert beta == upper_sub - eps
    return SelectionResult(eps, (lo, hi), triple, beta)


def select_wave_exponents(N: int, s, p, pick: PickRule = None) -> SelectionResult:
    """Choose ``eps_1`` and the Hölder triple used in the NLW nonlinear estimate.

    ``s`` is the shifted regularity in ``(0, 1/2]``; the y-block is one-dimensional.
    """
    s, p = as_exponent(s), _check_power(p)
    if N < 2:
        raise ExponentError(f"wave selection needs N >= 2, got {N}")
    if not 0 < s <= Fraction(1, 2):
        raise ExponentError(f"need 0 < s <= 1/2, got {s}")
    if p <= 1 + Fraction(2, N - 1):
        raise ExponentError(f"p = {p} must exceed 1 + 2/(N-1) = {1 + Fraction(2, N - 1)}")
    gap = N - 1 - 2 * s
    if gap > 0 and p >= 1 + 4 / gap:
        raise ExponentError(f"p = {p} must be below 1 + 4/(N-1-2s) = {1 + 4 / gap}")
    lo = max((1 - 2 * s) * (p - 1) / 2, 1 - (N - 2) * (p - 1) / 2)
    hi = min((p - 1) / 2, 2 - (N - 2) * (p - 1) / 2)
    if not lo < hi:
        raise EmptyWindowError(f"empty eps_1 window ({lo}, {hi}) for N={N}, s={s}, p={p}")
    eps = _pick(pick, lo, hi)
    inv_r = 1 / (p + 1)
    inv_rt = Fraction(1, 2) - eps / (p + 1)
    inv_q = Fraction(N - 2, 2) - Fraction(N - 1) / (p + 1) + eps / (p + 1)
    if inv_q < 0:
        raise ExponentError(f"selected 1/q_1 = {inv_q} is negative")
    triple = ExponentTriple(_from_recip(inv_q), _from_recip(inv_r), _from_recip(inv_rt))
    beta = 1 - (p + 1) * inv_q
    if not in_class_W(N, 1, triple):
        raise ExponentError(f"selected triple {triple} is not in A_W({N}, 1)")
    return SelectionResult(eps, (lo, hi), triple, beta)


def _farey(bound: int, hi: Fraction) -> list[Fraction]:
    vals = {Fraction(a, b) for b in range(1, bound + 1) for a in range(0, b + 1)}
    return sorted(v for v in vals if v <= hi)


def admissible_enumerate(N: int, k: int, flavor: str, denom_bound: int) -> list[ExponentTriple]:
    """All admissible triples whose reciprocal exponents have denominators <= ``denom_bound``.

    The enumeration runs over ``1/q, 1/r, 1/r~`` (so ``q = inf`` appears as
    ``1/q = 0``) and is returned sorted by those reciprocals.
    """
    if denom_bound < 2:
        raise ExponentError("denom_bound must be >= 2")
    member = {"S": in_class_S, "W": in_class_W}[flavor.upper()]
    grid = _farey(denom_bound, Fraction(1, 2))
    out = []
    for iq in grid:
        if iq >= Fraction(1, 2):
            continue
        for ir in grid:
            if ir == 0:
                continue
            for irt in grid:
                if irt < ir:
                    continue
                t = ExponentTriple(_from_recip(iq), _from_recip(ir), _from_recip(irt))
                if member(N, k, t):
                    out.append(t)
    return out
