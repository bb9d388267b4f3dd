"""Closed-form evaluators for the 1D 2-kappa oscillator family.

For V = (1/2) m w^2 x^2 + g x^(2 kappa), the leading action S_0 and (for
kappa = 2) the corrections S_1, S_2 and the excited-state factors
phi_0, u_1, u_2 have closed forms in the variable

    u = 2 g x^2 / (m w^2),        R = sqrt(1 + u).

The printed rational-in-R formulas suffer catastrophic cancellation near the
origin (S_2 carries 1/x^2, u_2 carries 1/x^4), so each evaluator switches to
an exact rational Laurent/Taylor expansion in u for small u.  The expansion
coefficients depend only on the excitation number n and are computed exactly
with Fraction arithmetic; only the evaluation is double precision.

One transcription note: the overall prefactor of the printed u_2 formula is
dimensionally inconsistent with its own Laurent expansion and harmonic
limit; the mass power used here (1/(48 m^2 w^6 x^4 Q^5)) is the one fixed by
those two independent checks.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

from scipy.integrate import quad

from .errors import DomainExceeded, UnsupportedKappa, UnsupportedOrder

_SERIES_LEN = 24
_U_SWITCH = 0.25


@dataclass(frozen=True)
class Kappa1DModel:
    """1D oscillator V = (1/2) m w0^2 x^2 + g x^(2 kappa), float parameters."""
    mass: float = 1.0
    omega0: float = 1.0
    g: float = 1.0
    kappa: int = 2

    def __post_init__(self):
        if self.mass <= 0 or self.omega0 <= 0 or self.g <= 0:
            raise ValueError("mass, omega0 and g must be positive")
        if self.kappa not in (2, 3, 4, 5):
            raise UnsupportedKappa(f"kappa must be in {{2,3,4,5}}, got {self.kappa}")

    def u_of(self, x: float) -> float:
        p = self.kappa - 1
        return 2.0 * self.g * x ** (2 * p) / (self.mass * self.omega0 ** 2)

    def potential(self, x: float) -> float:
        return (0.5 * self.mass * self.omega0 ** 2 * x * x
                + self.g * x ** (2 * self.kappa))


# -- exact series data ------------------------------------------------------

def binomial_series(alpha: Fraction, length: int = _SERIES_LEN) -> list[Fraction]:
    """Coefficients of (1 + u)^alpha through u^(length-1), exactly."""
    alpha = Fraction(alpha)
    out = [Fraction(1)]
    c = Fraction(1)
    for k in range(1, length):
        c = c * (alpha - (k - 1)) / k
        out.append(c)
    return out


def _series_mul(a: list[Fraction], b: list[Fraction]) -> list[Fraction]:
    n = min(len(a), len(b))
    out = [Fraction(0)] * n
    for i, ai in enumerate(a[:n]):
        if ai == 0:
            continue
        for j, bj in enumerate(b[:n - i]):
            out[i + j] += ai * bj
    return out


@lru_cache(maxsize=None)
def s2_u_series() -> tuple[Fraction, ...]:
    """S_2 = (g / 3 m^2 w^3) sum_j c_j u^j; returns the c_j exactly.

    Derived from the closed form {3 m^2 w^2 (1-R) + 20 g m x^2
    + 18 g^2 x^4 / w^2} / {6 x^2 (m w)^3 R^3} rewritten in u.
    """
    R = binomial_series(Fraction(1, 2))
    P = [Fraction(0)] * _SERIES_LEN
    for j in range(_SERIES_LEN):
        P[j] = -3 * R[j]
    P[0] += 3
    P[1] += 10
    P[2] += Fraction(9, 2)
    assert P[0] == 0
    shifted = P[1:] + [Fraction(0)]
    return tuple(_series_mul(shifted, binomial_series(Fraction(-3, 2))))


@lru_cache(maxsize=None)
def u1_u_series(n: int) -> tuple[Fraction, ...]:
    """u_1 = (g / 2 m^2 w^3) [T_0/u + sum_j T_{j+1} u^j]; returns T exactly."""
    R = binomial_series(Fraction(1, 2))
    N = [Fraction(0)] * _SERIES_LEN
    nn = Fraction(n)
    for j in range(_SERIES_LEN):
        # -(1 + 3u) R (n + n^2)
        N[j] -= R[j] * (nn + nn * nn)
        if j >= 1:
            N[j] -= 3 * R[j - 1] * (nn + nn * nn)
    N[0] += 2 * nn
    N[1] += Fraction(1, 2) * (9 * nn + 5 * nn * nn)
    N[2] += Fraction(1, 4) * (18 * nn + 10 * nn * nn)
    return tuple(_series_mul(N, binomial_series(Fraction(-1))))


@lru_cache(maxsize=None)
def u2_u_series(n: int) -> tuple[Fraction, ...]:
    """u_2 = (n g^2 / 12 m^4 w^6) [W_0/u^2 + W_1/u + sum_j W_{j+2} u^j]."""
    nn = Fraction(n)
    p1 = [3 * (11 + 5 * nn + 4 * nn ** 2),
          Fraction(3, 2) * (35 + 28 * nn + 32 * nn ** 2 + 5 * nn ** 3),
          Fraction(1, 2) * (-257 - 42 * nn + 104 * nn ** 2 + 75 * nn ** 3),
          Fraction(28, 8) * (-59 - 24 * nn + 8 * nn ** 2 + 15 * nn ** 3),
          Fraction(24, 16) * (-59 - 24 * nn + 8 * nn ** 2 + 15 * nn ** 3)]
    p2 = [3 * (16 + 21 * nn + 2 * nn ** 2 + nn ** 3),
          3 * (12 + 37 * nn + 24 * nn ** 2 + 7 * nn ** 3),
          Fraction(1, 4) * (-1211 - 351 * nn + 380 * nn ** 2 + 282 * nn ** 3),
          Fraction(1, 2) * (-1355 - 837 * nn + 8 * nn ** 2 + 156 * nn ** 3),
          Fraction(1, 4) * (-1355 - 891 * nn - 100 * nn ** 2 + 102 * nn ** 3)]
    p1 += [Fraction(0)] * (_SERIES_LEN - len(p1))
    p2 += [Fraction(0)] * (_SERIES_LEN - len(p2))
    R = binomial_series(Fraction(1, 2))
    braces = [-2 * a + b for a, b in zip(p1, _series_mul(R, p2))]
    return tuple(_series_mul(braces, binomial_series(Fraction(-5, 2))))


# -- evaluators -------------------------------------------------------------

def _require_quartic(model: Kappa1DModel, what: str):
    if model.kappa != 2:
        raise UnsupportedKappa(f"{what} is available for kappa = 2 only, "
                               f"got kappa = {model.kappa}")


def s0_closed(model: Kappa1DModel, x: float) -> float:
    """Leading action: closed form for kappa = 2, quadrature otherwise."""
    m, w, g = model.mass, model.omega0, model.g
    if model.kappa == 2:
        u = model.u_of(x)
        # (1+u)^(3/2) - 1 without cancellation
        core = math.expm1(1.5 * math.log1p(u))
        return m * m * w ** 3 / (6.0 * g) * core
    val, _err = quad(lambda s: math.sqrt(2.0 * model.mass * model.potential(s)),
                     0.0, abs(x), epsabs=1e-14, epsrel=1e-12, limit=200)
    return val


def q_closed(model: Kappa1DModel, x: float) -> float:
    """Q(x) = S_0'(x)/x = m w sqrt(1 + u) (kappa = 2)."""
    _require_quartic(model, "Q")
    return model.mass * model.omega0 * math.sqrt(1.0 + model.u_of(x))


def s1_closed(model: Kappa1DModel, x: float) -> float:
    """First correction (kappa = 2), normalized so S_1(0) = 0."""
    _require_quartic(model, "S_1")
    u = model.u_of(x)
    half_log_r = 0.5 * math.log1p(u)
    r_minus_1 = math.expm1(half_log_r)
    return 0.5 * (half_log_r + math.log1p(0.5 * r_minus_1))


def _horner(coeffs, u: float, start: int = 0) -> float:
    total = 0.0
    for c in reversed(coeffs[start:]):
        total = total * u + float(c)
    return total


def s2_closed(model: Kappa1DModel, x: float) -> float:
    """Second correction (kappa = 2), normalized to vanish as |x| -> inf.

    Its value at the origin is 17 g / (6 m^2 w^3), not zero; the formal
    engine's normalization S_2(0) = 0 differs by exactly that constant.
    """
    _require_quartic(model, "S_2")
    m, w, g = model.mass, model.omega0, model.g
    u = model.u_of(x)
    if u <= _U_SWITCH:
        return g / (3.0 * m * m * w ** 3) * _horner(s2_u_series(), u)
    r = math.sqrt(1.0 + u)
    num = 3.0 * m * m * w * w * (1.0 - r) + 20.0 * g * m * x * x \
        + 18.0 * g * g * x ** 4 / (w * w)
    den = 6.0 * x * x * (m * w) ** 3 * (1.0 + u) ** 1.5
    return num / den


def phi0_closed(model: Kappa1DModel, n: int, x: float) -> float:
    """Zeroth excited factor [x / (1 + R)^(1/(kappa-1))]^n, unit leading
    constant."""
    if n < 0:
        raise UnsupportedOrder(f"excitation n must be >= 0, got {n}")
    if n == 0:
        return 1.0
    p = model.kappa - 1
    r = math.sqrt(1.0 + model.u_of(x))
    return (x / (1.0 + r) ** (1.0 / p)) ** n


def u1_closed(model: Kappa1DModel, n: int, x: float) -> float:
    """Variation-of-parameters factor u_1 (kappa = 2).

    Carries a -n(n-1)/(4 m w x^2) singularity at the origin for n >= 2; the
    product u_1 phi_0 stays smooth (see evaluate_wavefunction).
    """
    _require_quartic(model, "u_1")
    m, w, g = model.mass, model.omega0, model.g
    u = model.u_of(x)
    pref = g / (2.0 * m * m * w ** 3)
    T = u1_u_series(n)
    if u <= _U_SWITCH:
        if T[0] == 0:
            head = 0.0
        elif u == 0.0:
            return math.inf if T[0] > 0 else -math.inf
        else:
            head = float(T[0]) / u
        return pref * (head + _horner(T, u, start=1))
    q = m * w * math.sqrt(1.0 + u)
    num = (2.0 * m * m * w ** 4 * n
           + g * m * w * w * x * x * (9 * n + 5 * n * n)
           + g * g * x ** 4 * (18 * n + 10 * n * n)
           - (m * w ** 3 + 6.0 * g * w * x * x) * q * (n + n * n))
    return num / (4.0 * m * w ** 3 * (x * q) ** 2)


def u2_closed(model: Kappa1DModel, n: int, x: float) -> float:
    """Variation-of-parameters factor u_2 (kappa = 2); singular like 1/x^4
    at the origin for n >= 4."""
    _require_quartic(model, "u_2")
    m, w, g = model.mass, model.omega0, model.g
    u = model.u_of(x)
    pref = n * g * g / (12.0 * m ** 4 * w ** 6)
    W = u2_u_series(n)
    if u <= _U_SWITCH:
        head = 0.0
        for power, coeff in ((2, W[0]), (1, W[1])):
            if coeff == 0:
                continue
            if u == 0.0:
                return math.copysign(math.inf, float(coeff) * pref)
            head += float(coeff) / u ** power
        return pref * (head + _horner(W, u, start=2))
    q = m * w * math.sqrt(1.0 + u)
    x2, x4, x6, x8 = x * x, x ** 4, x ** 6, x ** 8
    p1 = (3 * m ** 4 * w ** 8 * (11 + 5 * n + 4 * n ** 2)
          + 3 * g * m ** 3 * w ** 6 * x2 * (35 + 28 * n + 32 * n ** 2 + 5 * n ** 3)
          + 2 * g * g * m * m * w ** 4 * x4 * (-257 - 42 * n + 104 * n ** 2 + 75 * n ** 3)
          + 28 * g ** 3 * m * w * w * x6 * (-59 - 24 * n + 8 * n ** 2 + 15 * n ** 3)
          + 24 * g ** 4 * x8 * (-59 - 24 * n + 8 * n ** 2 + 15 * n ** 3))
    p2 = (3 * m ** 4 * w ** 8 * (16 + 21 * n + 2 * n ** 2 + n ** 3)
          + 6 * g * m ** 3 * w ** 6 * x2 * (12 + 37 * n + 24 * n ** 2 + 7 * n ** 3)
          + g * g * m * m * w ** 4 * x4 * (-1211 - 351 * n + 380 * n ** 2 + 282 * n ** 3)
          + 4 * g ** 3 * m * w * w * x6 * (-1355 - 837 * n + 8 * n ** 2 + 156 * n ** 3)
          + 4 * g ** 4 * x8 * (-1355 - 891 * n - 100 * n ** 2 + 102 * n ** 3))
    return n * (-2.0 * m * w * p1 + q * p2) / (48.0 * m * m * w ** 6 * x4 * q ** 5)


def sternberg_1d(model: Kappa1DModel, x: float) -> float:
    """Linearizing coordinate y(x) = 2^(1/(kappa-1)) x / (1+R)^(1/(kappa-1)),
    normalized so y = x + O(x^3)."""
    p = model.kappa - 1
    r = math.sqrt(1.0 + model.u_of(x))
    return 2.0 ** (1.0 / p) * x / (1.0 + r) ** (1.0 / p)


def sternberg_1d_inverse(model: Kappa1DModel, y: float) -> float:
    """Inverse map x(y) = y / (1 - (g/2 m w^2) y^(2(kappa-1)))^(1/(kappa-1)).

    Defined for |y| < (2 m w^2 / g)^(1/(2(kappa-1))).
    """
    p = model.kappa - 1
    bound = (2.0 * model.mass * model.omega0 ** 2 / model.g) ** (1.0 / (2 * p))
    if abs(y) >= bound:
        raise DomainExceeded(
            f"|y| = {abs(y)} outside the inversion interval |y| < {bound}",
            bound=bound)
    t = model.g * y ** (2 * p) / (2.0 * model.mass * model.omega0 ** 2)
    return y / (1.0 - t) ** (1.0 / p)


def _phi_factor(model: Kappa1DModel, n: int, hbar: float, order: int,
                x: float) -> float:
    """phi_0 + hbar phi_1 + (hbar^2/2) phi_2 with smooth near-origin forms."""
    if n == 0:
        return 1.0
    m, w, g = model.mass, model.omega0, model.g
    phi0 = phi0_closed(model, n, x)
    total = phi0
    if order == 0:
        return total
    u = model.u_of(x)
    r = math.sqrt(1.0 + u)
    # x^(n-j) / (1+R)^n for the Laurent heads, smooth across x = 0
    def head_piece(j: int) -> float:
        return x ** (n - j) / (1.0 + r) ** n
    u_to_x2 = m * w * w / (2.0 * g)  # 1/u = this / x^2
    if u <= _U_SWITCH:
        T = u1_u_series(n)
        # T[0] carries n(n-1): skip the x^(n-2) head when it vanishes so
        # x = 0 with n = 1 never evaluates a negative power
        head1 = 0.0 if T[0] == 0 else float(T[0]) * u_to_x2 * head_piece(2)
        phi1 = g / (2.0 * m * m * w ** 3) * (
            head1 + _horner(T, u, start=1) * phi0)
    else:
        phi1 = u1_closed(model, n, x) * phi0
    total += hbar * phi1
    if order == 1:
        return total
    if u <= _U_SWITCH:
        W = u2_u_series(n)
        pref = n * g * g / (12.0 * m ** 4 * w ** 6)
        head4 = 0.0 if W[0] == 0 else float(W[0]) * u_to_x2 ** 2 * head_piece(4)
        head2 = 0.0 if W[1] == 0 else float(W[1]) * u_to_x2 * head_piece(2)
        phi2 = pref * (head4 + head2 + _horner(W, u, start=2) * phi0)
    else:
        phi2 = u2_closed(model, n, x) * phi0
    return total + 0.5 * hbar * hbar * phi2


def evaluate_wavefunction(model: Kappa1DModel, hbar: float, n: int,
                          order: int, x: float) -> float:
    """Unnormalized semiclassical wavefunction
    (phi_0 + hbar phi_1 + (hbar^2/2) phi_2) exp(-S_0/hbar - S_1 - (hbar/2) S_2)
    truncated at the requested order."""
    if order not in (0, 1, 2):
        raise UnsupportedOrder(f"order must be 0, 1 or 2, got {order}")
    if n < 0:
        raise UnsupportedOrder(f"excitation n must be >= 0, got {n}")
    if order >= 1 and model.kappa != 2:
        raise UnsupportedKappa(
            f"corrections beyond leading order need kappa = 2, "
            f"got kappa = {model.kappa}")
    exponent = -s0_closed(model, x) / hbar
    if order >= 1:
        exponent -= s1_closed(model, x)
    if order >= 2:
        exponent -= 0.5 * hbar * s2_closed(model, x)
    return _phi_factor(model, n, hbar, order, x) * math.exp(exponent)


def wavefunction_factors(model: Kappa1DModel, n: int, hbar: float,
                         xs) -> dict:
    """Grid evaluation of every closed-form factor, for CSV emission."""
    rows = {
        "x": [], "S0": [], "S1": [], "S2": [], "Q": [],
        "phi0": [], "u1": [], "u2": [], "psi": [],
    }
    quartic = model.kappa == 2
    order = 2 if quartic else 0
    for x in xs:
        rows["x"].append(float(x))
        rows["S0"].append(s0_closed(model, x))
        rows["S1"].append(s1_closed(model, x) if quartic else math.nan)
        rows["S2"].append(s2_closed(model, x) if quartic else math.nan)
        rows["Q"].append(q_closed(model, x) if quartic else math.nan)
        rows["phi0"].append(phi0_closed(model, n, x))
        rows["u1"].append(u1_closed(model, n, x)
                          if quartic and n >= 1 else math.nan)
        rows["u2"].append(u2_closed(model, n, x)
                          if quartic and n >= 1 else math.nan)
        rows["psi"].append(evaluate_wavefunction(model, hbar, n, order, x))
    return rows
