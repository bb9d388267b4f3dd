"""Formal solution of the inverted-potential zero-energy Hamilton-Jacobi
equation and formal linearization of its gradient flow field.

The equation (1/2m)|grad S0|^2 - V = 0 is solved degree by degree with the
ansatz S0 = (1/2) m sum_i omega_i x_i^2 + sum_{d>=3} s_d, where each s_d is
homogeneous of degree d.  At degree d the unknown enters only through the
Euler-type operator sum_i omega_i x_i d/dx_i, which is diagonal on monomials
with eigenvalue sum_i k_i omega_i > 0, so the recursion never divides by zero.

The linearizing map mu (one series per coordinate) conjugates the field
grad S0 / m to its linear part: D mu . (grad S0 / m) = (omega_i mu^i)_i.
Its degree-d coefficients are obtained from the shifted divisor
sum_j k_j omega_j - omega_i, which can vanish (resonance) for unlucky
frequency combinations; that is reported, not worked around.
"""

from __future__ import annotations

from fractions import Fraction

from .errors import BadTruncation, ResonantDivisor, TruncationTooSmall
from .model import OscillatorModel
from .series import PolySeries, dot_gradients


class FormalAction:
    """The formal action series S0 together with its model."""

    __slots__ = ("model", "S0")

    def __init__(self, model: OscillatorModel, S0: PolySeries):
        self.model = model
        self.S0 = S0

    @property
    def trunc(self) -> int:
        return self.S0.trunc


class SternbergMap:
    """Formal linearizing coordinates: mu^i(x) = x_i + O(|x|^2)."""

    __slots__ = ("model", "mu", "trunc")

    def __init__(self, model: OscillatorModel, mu: list[PolySeries], trunc: int):
        self.model = model
        self.mu = list(mu)
        self.trunc = trunc


def _solve_euler(residual: PolySeries, model: OscillatorModel) -> PolySeries:
    """Solve (sum_i omega_i x_i d_i) s = -residual monomial-wise.

    Every multi-index here has positive total degree, so the divisor
    sum_i k_i omega_i is strictly positive.
    """
    terms = {}
    for k, c in residual.items():
        divisor = sum(e * w for e, w in zip(k, model.omega))
        terms[k] = -c / divisor
    return PolySeries(residual.dim, residual.trunc, terms)


def solve_hj_formal(model: OscillatorModel, trunc: int) -> FormalAction:
    """Solve the zero-energy inverted-potential Hamilton-Jacobi equation
    formally through total degree ``trunc``."""
    if trunc < 2:
        raise BadTruncation(f"truncation degree must be >= 2, got {trunc}")
    V = model.potential_series(trunc)
    S = model.quadratic_action(trunc)
    inv_2m = Fraction(1, 2) / model.mass
    for d in range(3, trunc + 1):
        # the gradient label is trunc - 1, but |grad S|^2 is still complete
        # at degree trunc (every contributing factor has degree <= trunc - 1
        # since both have valuation 1), so relabel up before multiplying
        grad = [p.with_truncation(trunc) for p in S.gradient()]
        residual = dot_gradients(grad, grad).scale(inv_2m).with_truncation(d) \
            - V.with_truncation(d)
        r_d = residual.homogeneous_component(d)
        if r_d.is_zero():
            continue
        # Adding s_d changes the degree-d residual by exactly the Euler term
        # (1/m) grad(quadratic part) . grad(s_d) = (sum omega_i x_i d_i) s_d.
        S = S + _solve_euler(r_d, model).with_truncation(trunc)
    return FormalAction(model, S)


def hj_residual(action: FormalAction) -> PolySeries:
    """(1/2m)|grad S0|^2 - V, reliable through degree trunc - 1."""
    grad = action.S0.gradient()
    inv_2m = Fraction(1, 2) / action.model.mass
    V = action.model.potential_series(max(action.trunc - 1, 0))
    return dot_gradients(grad, grad).scale(inv_2m) - V


def flow_field(action: FormalAction) -> list[PolySeries]:
    """The gradient semi-flow field grad S0 / m as a list of series."""
    inv_m = Fraction(1) / action.model.mass
    return [p.scale(inv_m) for p in action.S0.gradient()]


def sternberg_linearize(action: FormalAction, trunc: int) -> SternbergMap:
    """Compute the formal linearizing map mu through degree ``trunc``.

    Requires the action to be known one degree further (the field loses one
    degree under differentiation).
    """
    if trunc < 1:
        raise BadTruncation(f"truncation degree must be >= 1, got {trunc}")
    if action.trunc < trunc + 1:
        raise TruncationTooSmall(
            f"linearization through degree {trunc} needs action truncation "
            f">= {trunc + 1}, got {action.trunc}",
            required=trunc + 1, available=action.trunc)
    model = action.model
    field = [f.with_truncation(trunc) for f in flow_field(action)]
    mu: list[PolySeries] = []
    for axis in range(model.dim):
        unit = tuple(1 if j == axis else 0 for j in range(model.dim))
        comp = PolySeries.monomial(unit, 1, trunc)
        for d in range(2, trunc + 1):
            # The product D mu . field is complete through degree `trunc`
            # even though its factors carry lower truncation labels: the
            # field has no constant term, so the degree-d slice only uses
            # derivative components of degree <= d - 1.
            pushed = dot_gradients(comp.gradient(), field).with_truncation(trunc)
            residual = (pushed - comp.scale(model.omega[axis])) \
                .homogeneous_component(d)
            if residual.is_zero():
                continue
            terms = {}
            for k, c in residual.items():
                divisor = sum(e * w for e, w in zip(k, model.omega)) \
                    - model.omega[axis]
                if divisor == 0:
                    raise ResonantDivisor(
                        f"resonant divisor for monomial {list(k)} on axis "
                        f"{axis}: sum k_j omega_j = omega_{axis}",
                        monomial=list(k), axis=axis)
                terms[k] = -c / divisor
            comp = comp + PolySeries(model.dim, trunc, terms)
        mu.append(comp)
    return SternbergMap(model, mu, trunc)


def sternberg_residual(smap: SternbergMap, action: FormalAction) -> list[PolySeries]:
    """Pushforward defect D mu . (grad S0 / m) - (omega_i mu^i)_i per axis."""
    field = [f.with_truncation(smap.trunc) for f in flow_field(action)]
    out = []
    for axis, comp in enumerate(smap.mu):
        pushed = dot_gradients(comp.gradient(), field).with_truncation(smap.trunc)
        out.append(pushed - comp.scale(smap.model.omega[axis]))
    return out
