"""Ground-state and excited-state transport hierarchies in formal series.

Conventions (all exact rationals):

* Energies are graded as E = hbar (E_0 + hbar E_1 + hbar^2/2! E_2 + ...);
  the list entry ``energies[k]`` stores E_k in that hbar^k/k! convention.
  ``energy_series`` converts to plain power-series coefficients e_k = E_k/k!.
* Ground corrections satisfy, for k >= 1,
      -(1/m) grad S_0 . grad S_k
      - (1/2m) sum_{j=1}^{k-1} C(k,j) grad S_j . grad S_{k-j}
      + (k/2m) lap S_{k-1}  =  k E_{k-1},
  with S_k(0) = 0 and E_{k-1} fixed by the degree-zero obstruction.
* Excited states for quantum numbers m (|m| >= 1) are built from the gap
  operator L = (1/m) grad S_0 . grad - dE_0 with dE_0 = sum m_i omega_i;
  L is diagonal on monomials x^k with eigenvalue sum (k_i - m_i) omega_i.
  For k >= 1,
      L phi_k = (k/2m) lap phi_{k-1}
                + sum_{j=1}^{k} C(k,j) [dE_j phi_{k-j}
                                        - (1/m) grad S_j . grad phi_{k-j}],
  where dE_k is the unique constant removing the x^m obstruction and phi_k
  carries a zero x^m coefficient for k >= 1.

Truncation bookkeeping: with the action known through degree D, the k-th
ground correction is reliable through D - 2k (each order consumes a
Laplacian) and the k-th excited correction through D - 2k - 1.  The
constructors enforce these bounds and fail loudly when D is too small.
"""

from __future__ import annotations

from fractions import Fraction
from math import comb

from .errors import (
    DegenerateEigenvalue,
    IndexOutOfRange,
    TruncationTooSmall,
)
from .hjformal import FormalAction
from .model import OscillatorModel
from .series import PolySeries, dot_gradients, format_rational


class GroundExpansion:
    """Corrections [S_0..S_K] and energy coefficients [E_0..E_{K-1}]."""

    __slots__ = ("model", "order", "corrections", "energies")

    def __init__(self, model: OscillatorModel, order: int,
                 corrections: list[PolySeries], energies: list[Fraction]):
        self.model = model
        self.order = order
        self.corrections = list(corrections)
        self.energies = list(energies)


class ExcitedExpansion:
    """Corrections [phi_0..phi_K] and gap coefficients [dE_0..dE_K]."""

    __slots__ = ("model", "quantum_numbers", "order", "corrections", "gaps")

    def __init__(self, model: OscillatorModel, quantum_numbers: tuple,
                 order: int, corrections: list[PolySeries],
                 gaps: list[Fraction]):
        self.model = model
        self.quantum_numbers = tuple(int(q) for q in quantum_numbers)
        self.order = order
        self.corrections = list(corrections)
        self.gaps = list(gaps)


def _euler_minus(residual: PolySeries, model: OscillatorModel,
                 shift: Fraction, seed_index: tuple | None):
    """Solve (sum_i omega_i x_i d_i - shift) s = -residual monomial-wise.

    Returns (series, obstruction) where ``obstruction`` is the residual
    coefficient at ``seed_index`` (whose divisor vanishes by construction).
    Raises DegenerateEigenvalue when any other divisor vanishes on a nonzero
    coefficient.
    """
    terms = {}
    obstruction = Fraction(0)
    for k, c in residual.items():
        divisor = sum(e * w for e, w in zip(k, model.omega)) - shift
        if divisor == 0:
            if seed_index is not None and k == seed_index:
                obstruction = c
                continue
            raise DegenerateEigenvalue(
                f"vanishing divisor on monomial {list(k)}: "
                f"sum k_i omega_i = {format_rational(shift)}",
                monomial=list(k))
        terms[k] = -c / divisor
    return PolySeries(residual.dim, residual.trunc, terms), obstruction


def ground_expansion(action: FormalAction, order: int) -> GroundExpansion:
    """Solve the ground-state transport hierarchy through ``order``."""
    if order < 1:
        raise IndexOutOfRange(f"order must be >= 1, got {order}")
    model = action.model
    D = action.trunc
    if D < 2 * order:
        raise TruncationTooSmall(
            f"order {order} needs action truncation >= {2 * order}, got {D} "
            f"(order k consumes two degrees of reliable data)",
            required=2 * order, available=D)
    inv_m = Fraction(1) / model.mass
    inv_2m = inv_m / 2
    corrections = [action.S0]
    grads = [action.S0.gradient()]
    energies: list[Fraction] = []
    for k in range(1, order + 1):
        rhs = corrections[k - 1].laplacian().scale(Fraction(k) * inv_2m)
        for j in range(1, k):
            rhs = rhs - dot_gradients(grads[j], grads[k - j]) \
                .scale(Fraction(comb(k, j)) * inv_2m)
        energy = rhs.constant_term / k
        energies.append(energy)
        rhs = rhs - PolySeries.constant(energy * k, model.dim, rhs.trunc)
        # Solve (1/m) grad S_0 . grad S_k = rhs degree by degree: the
        # degree-d residual moves by exactly the Euler term when the
        # homogeneous degree-d piece is added.
        sk = PolySeries.zero(model.dim, rhs.trunc)
        # relabel both gradient factors to the target truncation before
        # multiplying: their product is still complete there because every
        # factor has valuation 1, and multiplying at the lower gradient
        # label would silently drop the top-degree products
        grad0_full = [p.with_truncation(rhs.trunc) for p in grads[0]]
        for d in range(1, rhs.trunc + 1):
            grad_sk = [p.with_truncation(rhs.trunc) for p in sk.gradient()]
            lhs = dot_gradients(grad0_full, grad_sk) \
                .scale(inv_m).with_truncation(d)
            res_d = (lhs - rhs.with_truncation(d)).homogeneous_component(d)
            if res_d.is_zero():
                continue
            piece, _ = _euler_minus(res_d, model, Fraction(0), None)
            sk = sk + piece.with_truncation(rhs.trunc)
        corrections.append(sk)
        grads.append(sk.gradient())
    return GroundExpansion(model, order, corrections, energies)


def transport_residual(ground: GroundExpansion, k: int) -> PolySeries:
    """LHS - RHS of the k-th ground transport equation (zero if valid)."""
    if not (1 <= k <= ground.order):
        raise IndexOutOfRange(
            f"transport order {k} outside [1, {ground.order}]")
    model = ground.model
    inv_m = Fraction(1) / model.mass
    inv_2m = inv_m / 2
    S = ground.corrections
    lhs = dot_gradients(S[0].gradient(), S[k].gradient()).scale(-inv_m)
    for j in range(1, k):
        lhs = lhs - dot_gradients(S[j].gradient(), S[k - j].gradient()) \
            .scale(Fraction(comb(k, j)) * inv_2m)
    lhs = lhs + S[k - 1].laplacian().scale(Fraction(k) * inv_2m)
    rhs = PolySeries.constant(Fraction(k) * ground.energies[k - 1],
                              model.dim, lhs.trunc)
    return lhs - rhs


def excited_expansion(ground: GroundExpansion, quantum_numbers,
                      order: int) -> ExcitedExpansion:
    """Solve the excited-state hierarchy for quantum numbers ``m``."""
    model = ground.model
    m_idx = tuple(int(q) for q in quantum_numbers)
    if len(m_idx) != model.dim:
        raise IndexOutOfRange(
            f"quantum numbers {list(m_idx)} have length {len(m_idx)}, "
            f"expected {model.dim}")
    if any(q < 0 for q in m_idx) or sum(m_idx) < 1:
        raise IndexOutOfRange(
            f"quantum numbers must be non-negative with |m| >= 1, "
            f"got {list(m_idx)}")
    if order < 0:
        raise IndexOutOfRange(f"order must be >= 0, got {order}")
    if order > ground.order:
        raise IndexOutOfRange(
            f"excited order {order} exceeds ground order {ground.order}")
    D = ground.corrections[0].trunc
    need = 2 * order + sum(m_idx) + 1
    if D < need:
        raise TruncationTooSmall(
            f"excited order {order} with |m| = {sum(m_idx)} needs action "
            f"truncation >= {need}, got {D}",
            required=need, available=D)
    inv_m = Fraction(1) / model.mass
    inv_2m = inv_m / 2
    gap0 = sum(Fraction(q) * w for q, w in zip(m_idx, model.omega))
    S = ground.corrections
    grads = [s.gradient() for s in S]
    phi0 = _solve_gap_equation(
        model, grads[0], gap0, m_idx,
        rhs=PolySeries.zero(model.dim, D),
        seed=PolySeries.monomial(m_idx, 1, D))
    corrections = [phi0]
    gaps = [gap0]
    for k in range(1, order + 1):
        rhs = corrections[k - 1].laplacian().scale(Fraction(k) * inv_2m)
        for j in range(1, k + 1):
            c_kj = Fraction(comb(k, j))
            if j < k:
                rhs = rhs + corrections[k - j].scale(c_kj * gaps[j])
            rhs = rhs - dot_gradients(grads[j], corrections[k - j].gradient()) \
                .scale(c_kj * inv_m)
        phik, gap_k = _solve_gap_equation(
            model, grads[0], gap0, m_idx, rhs=rhs, seed=None, phi0=phi0)
        corrections.append(phik)
        gaps.append(gap_k)
    return ExcitedExpansion(model, m_idx, order, corrections, gaps)


def _solve_gap_equation(model, grad0, gap0, m_idx, rhs, seed, phi0=None):
    """Solve L phi = rhs (+ dE phi0) with L = (1/m) grad S0 . grad - gap0.

    With ``seed`` given (order zero) the seed monomial is imposed and the
    series is returned alone.  Otherwise the unknown constant dE multiplying
    ``phi0`` is fixed by the x^m obstruction and (phi, dE) is returned.
    """
    inv_m = Fraction(1) / model.mass
    trunc = rhs.trunc if seed is None else seed.trunc
    phi = seed if seed is not None else PolySeries.zero(model.dim, trunc)
    gap_k = None
    start = sum(m_idx) + 1 if seed is not None else 0
    # see ground_expansion: relabel the valuation-1 gradient factors to the
    # target truncation so top-degree products are not dropped
    grad0_full = [p.with_truncation(trunc) for p in grad0]
    for d in range(start, trunc + 1):
        grad_phi = [p.with_truncation(trunc) for p in phi.gradient()]
        lhs = dot_gradients(grad0_full, grad_phi).scale(inv_m) \
            .with_truncation(d) - phi.scale(gap0).with_truncation(d)
        res = lhs - rhs.with_truncation(d)
        if gap_k is not None and phi0 is not None:
            res = res - phi0.scale(gap_k).with_truncation(d)
        res_d = res.homogeneous_component(d)
        if seed is None and d == sum(m_idx):
            piece, obstruction = _euler_minus(res_d, model, gap0, m_idx)
            gap_k = obstruction
            phi = phi + piece.with_truncation(trunc)
            continue
        if res_d.is_zero():
            continue
        piece, _ = _euler_minus(res_d, model, gap0,
                                m_idx if seed is not None else m_idx)
        phi = phi + piece.with_truncation(trunc)
    if seed is not None:
        return phi
    return phi, gap_k if gap_k is not None else Fraction(0)


def energy_series(ground: GroundExpansion) -> list[Fraction]:
    """Plain power-series energy coefficients e_k = E_k / k!."""
    out = []
    fact = 1
    for k, e in enumerate(ground.energies):
        if k > 1:
            fact *= k
        out.append(e / fact)
    return out


def gap_series(excited: ExcitedExpansion) -> list[Fraction]:
    """Plain power-series gap coefficients dE_k / k!."""
    out = []
    fact = 1
    for k, e in enumerate(excited.gaps):
        if k > 1:
            fact *= k
        out.append(e / fact)
    return out


def total_energy_series(ground: GroundExpansion,
                        excited: ExcitedExpansion) -> list[Fraction]:
    """Total excited-level coefficients e_k + (dE_k / k!), overlap orders."""
    g = energy_series(ground)
    x = gap_series(excited)
    n = min(len(g), len(x))
    return [g[k] + x[k] for k in range(n)]


def ground_report(ground: GroundExpansion) -> dict:
    """JSON-serializable expansion report."""
    return {
        "model": ground.model.to_json(),
        "order": ground.order,
        "convention": "hbar^k/k!",
        "energies": [format_rational(e) for e in ground.energies],
        "series": [format_rational(e) for e in energy_series(ground)],
        "corrections": [s.to_json() for s in ground.corrections],
    }


def excited_report(ground: GroundExpansion,
                   excited: ExcitedExpansion) -> dict:
    return {
        "model": excited.model.to_json(),
        "quantum_numbers": list(excited.quantum_numbers),
        "order": excited.order,
        "convention": "hbar^k/k!",
        "gaps": [format_rational(e) for e in excited.gaps],
        "gap_series": [format_rational(e) for e in gap_series(excited)],
        "total_series": [format_rational(e)
                         for e in total_energy_series(ground, excited)],
        "corrections": [s.to_json() for s in excited.corrections],
    }
