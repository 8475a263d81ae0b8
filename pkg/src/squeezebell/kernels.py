"""Closed-form output states of the squeezing-enhanced Bell-measurement networks.

Every output considered here has the shape::

    scalar * poly(a†) * exp(sum_{i<=j} q_ij a_i† a_j†) |0>

which :class:`GaussianKernelState` stores directly. :func:`kernel_amplitudes`
turns it into Fock amplitudes; it accepts array-valued coefficients so the
sweep can expand a whole batch of circuits in one call.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np
from scipy.optimize import bisect

from .errors import InvalidInputError
from .fock import BellState, Encoding, StateVector, _canonical

SQRT2 = math.sqrt(2.0)


# --------------------------------------------------------------------------- #
# Kernel states and their Fock expansion


@dataclass(frozen=True)
class GaussianKernelState:
    """``scalar * poly * exp(quad)`` acting on the vacuum.

    ``quad`` maps a mode pair ``(i, j)`` with ``i <= j`` to the coefficient of
    ``a_i† a_j†``; ``poly`` lists ``(exponents, coefficient)`` monomials in the
    creation operators (so the ket ``|0,2>`` is the monomial ``(0, 2)`` with an
    extra ``1/√2``).
    """

    mode_count: int
    scalar: complex
    quad: Mapping[tuple[int, int], complex] = field(default_factory=dict)
    poly: tuple[tuple[tuple[int, ...], complex], ...] | None = None

    def __post_init__(self):
        raw = ((((0,) * self.mode_count), 1.0),) if self.poly is None else self.poly
        poly = tuple((tuple(int(e) for e in exps), c) for exps, c in raw)
        if not poly:
            raise InvalidInputError("kernel polynomial must have at least one term")
        for exps, _ in poly:
            if len(exps) != self.mode_count or min(exps) < 0:
                raise InvalidInputError(f"bad monomial exponents {exps}")
        quad = {}
        for (i, j), q in dict(self.quad).items():
            i, j = min(i, j), max(i, j)
            quad[(i, j)] = quad.get((i, j), 0) + q
        object.__setattr__(self, "poly", poly)
        object.__setattr__(self, "quad", quad)


def _shift(t: np.ndarray, axis: int, by: int) -> np.ndarray:
    out = np.zeros_like(t)
    n = t.shape[axis]
    if by < n:
        src = [slice(None)] * t.ndim
        dst = [slice(None)] * t.ndim
        src[axis] = slice(0, n - by)
        dst[axis] = slice(by, n)
        out[tuple(dst)] = t[tuple(src)]
    return out


def exp_quadratic_tensor(quad: Mapping[tuple[int, int], object], mode_count: int, cap: int) -> np.ndarray:
    """Monomial coefficients of ``exp(sum q_ij a_i† a_j†)`` up to ``cap`` per mode.

    Coefficients may be arrays; the result has shape ``batch + (cap+1,)*mode_count``.
    """
    values = [np.asarray(q) for q in quad.values()]
    batch = np.broadcast_shapes(*(v.shape for v in values)) if values else ()
    dtype = np.result_type(float, *values)
    nb = len(batch)
    tensor = np.zeros(batch + (cap + 1,) * mode_count, dtype=dtype)
    tensor[(Ellipsis,) + (0,) * mode_count] = 1.0
    for (i, j), q in quad.items():
        q = np.asarray(q).reshape(np.shape(q) + (1,) * mode_count)
        term = tensor
        k = 0
        while True:
            k += 1
            term = _shift(term, nb + i, 2) if i == j else _shift(_shift(term, nb + i, 1), nb + j, 1)
            if (i == j and 2 * k > cap) or (i != j and k > cap):
                break
            term = term * (q / k)
            tensor = tensor + term
    return tensor


def apply_poly(tensor: np.ndarray, poly: Sequence[tuple[tuple[int, ...], object]], mode_count: int) -> np.ndarray:
    """Multiply a monomial-coefficient tensor by a polynomial in the creation operators."""
    nb = tensor.ndim - mode_count
    out = None
    for exps, c in poly:
        term = tensor
        for mode, e in enumerate(exps):
            if e:
                term = _shift(term, nb + mode, e)
        c = np.asarray(c)
        term = term * c.reshape(c.shape + (1,) * mode_count)
        out = term if out is None else out + term
    return out


def fock_scale(mode_count: int, cap: int) -> np.ndarray:
    """``sqrt(n_1! ... n_M!)`` on the ``(cap+1,)*mode_count`` grid; monomial -> ket amplitude."""
    f = np.sqrt([float(math.factorial(n)) for n in range(cap + 1)])
    out = np.ones((cap + 1,) * mode_count)
    for mode in range(mode_count):
        shape = [1] * mode_count
        shape[mode] = cap + 1
        out = out * f.reshape(shape)
    return out


def kernel_amplitudes(state: GaussianKernelState, cap: int) -> np.ndarray:
    """Dense Fock amplitude tensor of ``state`` truncated at ``cap`` photons per mode."""
    if cap < 0:
        raise InvalidInputError("cap must be non-negative")
    e = exp_quadratic_tensor(state.quad, state.mode_count, cap)
    t = apply_poly(e, state.poly, state.mode_count)
    return state.scalar * t * fock_scale(state.mode_count, cap)


def expand_kernel(state: GaussianKernelState, cap: int) -> StateVector:
    amps = kernel_amplitudes(state, cap).astype(complex)
    idx = np.nonzero(amps)
    patterns = np.stack(idx, axis=1).astype(np.int64).reshape(-1, state.mode_count)
    if not len(patterns):
        patterns = np.zeros((1, state.mode_count), np.int64)
        return _canonical(state.mode_count, cap, patterns, np.zeros(1, complex))
    return _canonical(state.mode_count, cap, patterns, amps[idx])


# --------------------------------------------------------------------------- #
# Single rail


class Constraint(str, enum.Enum):
    """Coefficient that the second beam splitter angle is chosen to zero."""

    OMEGA_PLUS = "Omega+"
    OMEGA_MINUS = "Omega-"
    SMALL_OMEGA_PLUS = "omega+"
    SMALL_OMEGA_MINUS = "omega-"


@dataclass(frozen=True)
class SRCoefficients:
    """Single-rail output coefficients.

    ``rho20_*`` is the ``|20>`` coefficient of the φ outputs. The common
    antisymmetric form ``rho|02> - rho|20>`` only holds for equal squeezing
    (or ``sin 2θ1 = 0``), so the two are kept separately.
    """

    x: object
    y: object
    z: object
    Omega_plus: object
    Omega_minus: object
    omega_plus: object
    omega_minus: object
    gamma_plus: object
    gamma_minus: object
    rho_plus: object
    rho_minus: object
    rho20_plus: object
    rho20_minus: object
    zeta_plus: object
    zeta_minus: object
    prefactor: object

    def constraint_value(self, c: Constraint):
        return {
            Constraint.OMEGA_PLUS: self.Omega_plus,
            Constraint.OMEGA_MINUS: self.Omega_minus,
            Constraint.SMALL_OMEGA_PLUS: self.omega_plus,
            Constraint.SMALL_OMEGA_MINUS: self.omega_minus,
        }[Constraint(c)]


def sr_coefficients(theta1, theta2, r1, r2) -> SRCoefficients:
    """All single-rail output coefficients; arguments broadcast as numpy arrays."""
    c1, s1 = np.cos(theta1), np.sin(theta1)
    c2, s2 = np.cos(theta2), np.sin(theta2)
    t1, t2 = np.tanh(r1), np.tanh(r2)
    h1, h2 = 1 / np.cosh(r1), 1 / np.cosh(r2)
    x = -t1 * c2**2 / 2 - t2 * s2**2 / 2
    y = -t1 * s2**2 / 2 - t2 * c2**2 / 2
    z = c2 * s2 * (-t1 + t2)

    def big(sg):
        return h1 * c2 * (c1 - sg * s1) - h2 * s2 * (s1 + sg * c1)

    def small(sg):
        return h1 * s2 * (c1 - sg * s1) + h2 * c2 * (s1 + sg * c1)

    sin2a, cos2a = np.sin(2 * theta1), np.cos(2 * theta1)
    sin2b, cos2b = np.sin(2 * theta2), np.cos(2 * theta2)
    rho = (cos2a * sin2b * h1 * h2 - sin2a * (s2**2 * h1**2 - c2**2 * h2**2)) / SQRT2
    # |20> coefficient; collapses to -rho only when r1 == r2 or sin 2θ1 == 0
    rho20 = -(cos2a * sin2b * h1 * h2 + sin2a * (c2**2 * h1**2 - s2**2 * h2**2)) / SQRT2
    zeta = cos2a * cos2b * h1 * h2 - sin2a * sin2b * (h1**2 + h2**2) / 2
    gamma_shift = sin2a * (t1 - t2) / 2
    return SRCoefficients(
        x=x, y=y, z=z,
        Omega_plus=big(1), Omega_minus=big(-1),
        omega_plus=small(1), omega_minus=small(-1),
        gamma_plus=1 - gamma_shift, gamma_minus=1 + gamma_shift,
        rho_plus=rho, rho_minus=-rho,
        rho20_plus=rho20, rho20_minus=-rho20,
        zeta_plus=zeta, zeta_minus=-zeta,
        prefactor=np.sqrt(h1 * h2 / 2),
    )


def sr_polys(co: SRCoefficients) -> dict[BellState, tuple]:
    """Monomial polynomials multiplying the exponential, one per Bell input."""
    return {
        BellState.PSI_PLUS: (((1, 0), co.Omega_plus), ((0, 1), co.omega_plus)),
        BellState.PSI_MINUS: (((1, 0), co.Omega_minus), ((0, 1), co.omega_minus)),
        BellState.PHI_PLUS: (
            ((0, 0), co.gamma_plus),
            ((0, 2), co.rho_plus / SQRT2),
            ((2, 0), co.rho20_plus / SQRT2),
            ((1, 1), co.zeta_plus),
        ),
        BellState.PHI_MINUS: (
            ((0, 0), co.gamma_minus),
            ((0, 2), co.rho_minus / SQRT2),
            ((2, 0), co.rho20_minus / SQRT2),
            ((1, 1), co.zeta_minus),
        ),
    }


def sr_output(theta1: float, theta2: float, r1: float, r2: float, state: BellState) -> GaussianKernelState:
    co = sr_coefficients(theta1, theta2, r1, r2)
    return GaussianKernelState(
        2,
        float(co.prefactor),
        {(0, 0): float(co.x), (1, 1): float(co.y), (0, 1): float(co.z)},
        tuple((e, float(c)) for e, c in sr_polys(co)[BellState(state)]),
    )


def solve_theta2(theta1, r1, r2, condition: Constraint | str):
    """Second splitter angle in ``[0, 2π)`` that zeroes the chosen ψ coefficient.

    Each coefficient is ``A cos θ2 + B sin θ2``, so ``θ2 = atan2(-A, B)``.
    Works elementwise on arrays.
    """
    c1, s1 = np.cos(theta1), np.sin(theta1)
    h1, h2 = 1 / np.cosh(r1), 1 / np.cosh(r2)
    condition = Constraint(condition)
    sg = 1 if condition in (Constraint.OMEGA_PLUS, Constraint.SMALL_OMEGA_PLUS) else -1
    if condition in (Constraint.OMEGA_PLUS, Constraint.OMEGA_MINUS):
        a, b = h1 * (c1 - sg * s1), -h2 * (s1 + sg * c1)
    else:
        a, b = h2 * (s1 + sg * c1), h1 * (c1 - sg * s1)
    theta2 = np.mod(np.arctan2(-a, b), 2 * np.pi)
    theta2 = np.where(theta2 >= 2 * np.pi, 0.0, theta2)
    return float(theta2) if np.ndim(theta2) == 0 else theta2


# --------------------------------------------------------------------------- #
# Dual rail


def dr_output(r: float, state: BellState) -> GaussianKernelState:
    """Dual-rail output after the 50:50 splitter, PBS routing and four equal squeezers.

    Built from the post-PBS patterns (global phases dropped) and the squeezer
    action ``S|n> = sqrt(sech r) exp(-tanh r a†²/2) P_n(a†)|0>`` with
    ``P_0 = 1``, ``P_1 = sech r a†``, ``P_2 = (tanh r + sech² r a†²)/√2``.
    """
    state = BellState(state)
    t, sech = math.tanh(r), 1 / math.cosh(r)
    h = 1 / SQRT2
    s = state.sign
    if state is BellState.PSI_PLUS:
        front = {(1, 1, 0, 0): h, (0, 0, 1, 1): h}
    elif state is BellState.PSI_MINUS:
        front = {(1, 0, 1, 0): h, (0, 1, 0, 1): -h}
    else:
        front = {(2, 0, 0, 0): 0.5, (0, 0, 0, 2): 0.5, (0, 2, 0, 0): 0.5 * s, (0, 0, 2, 0): 0.5 * s}
    column = {0: {0: 1.0}, 1: {1: sech}, 2: {0: t * h, 2: sech**2 * h}}
    poly: dict[tuple[int, ...], float] = {}
    for pattern, amp in front.items():
        terms = {(): amp}
        for n in pattern:
            terms = {e + (k,): c * ck for e, c in terms.items() for k, ck in column[n].items()}
        for e, c in terms.items():
            poly[e] = poly.get(e, 0.0) + c
    return GaussianKernelState(
        4, sech**2, {(m, m): -t / 2 for m in range(4)}, tuple((e, c) for e, c in poly.items() if c != 0)
    )


def _dr_compact(r: float, phi_sign: int, idx: Sequence[int], ops: Sequence[int]) -> float:
    """``sech²r/2 · Π sqrt((2k)!)/k! · (-tanh r/2)^K · (α ± kβ ...)`` evaluated without 1/tanh r.

    α = √2 tanh r (1 ± 1) and β = -√2 sech² r / tanh r; multiplying through by
    tanh^K keeps the expression finite at r = 0.
    """
    t, sech2 = math.tanh(r), 1 / math.cosh(r) ** 2
    big_k = sum(idx)
    mult = math.prod(math.sqrt(math.factorial(2 * k)) / math.factorial(k) for k in idx)
    signed = sum(o * k for o, k in zip(ops, idx))
    alpha_term = SQRT2 * t * (1 + phi_sign) * t**big_k
    beta_term = -SQRT2 * sech2 * t ** (big_k - 1) * signed if big_k >= 1 and signed else 0.0
    return sech2 / 2 * mult * (-0.5) ** big_k * (alpha_term + beta_term)


def g(r, phi_sign, m, op1):
    return _dr_compact(r, phi_sign, (m,), (op1,))


def h(r, phi_sign, m, n, op1, op2):
    return _dr_compact(r, phi_sign, (m, n), (op1, op2))


def j(r, phi_sign, m, n, p, op1, op2, op3):
    return _dr_compact(r, phi_sign, (m, n, p), (op1, op2, op3))


def k(r, phi_sign, m, n, p, q, op1, op2, op3, op4):
    return _dr_compact(r, phi_sign, (m, n, p, q), (op1, op2, op3, op4))


def dr_sign_ops(pattern: Sequence[int], phi_sign: int) -> tuple[int, ...]:
    """Generic signs for the nonzero entries of ``|2m,2n,2p,2q>``; modes carry ``(+, ±, ±, +)``."""
    mode_signs = (1, phi_sign, phi_sign, 1)
    return tuple(s for s, v in zip(mode_signs, pattern) if v)


@dataclass(frozen=True)
class DRCoefficientQuery:
    """Amplitude request for ``|2m,2n,2p,2q>`` given the half-photon indices ``pattern``."""

    r: float
    pattern: tuple[int, int, int, int]
    phi_sign: int = 1
    sign_ops: tuple[int, ...] | None = None

    def __post_init__(self):
        if len(self.pattern) != 4 or min(self.pattern) < 0:
            raise InvalidInputError(f"pattern must be four non-negative indices, got {self.pattern}")
        if self.phi_sign not in (1, -1):
            raise InvalidInputError("phi_sign must be +1 or -1")


def dr_phi_coefficient(query: DRCoefficientQuery) -> float:
    """Amplitude of ``|2m,2n,2p,2q>`` in the dual-rail φ± output (global phase dropped)."""
    expected = dr_sign_ops(query.pattern, query.phi_sign)
    ops = expected if query.sign_ops is None else tuple(query.sign_ops)
    if ops != expected:
        raise InvalidInputError(f"sign ops {ops} do not match pattern {query.pattern} (expected {expected})")
    idx = [v for v in query.pattern if v]
    return _dr_compact(query.r, query.phi_sign, idx, ops)


class DRVerdict(str, enum.Enum):
    PHI_PLUS = "phi+"
    PHI_MINUS = "phi-"
    AMBIGUOUS = "ambiguous"


def dr_unambiguous_conditions(pattern: Sequence[int]) -> DRVerdict:
    """Which φ input ``|2m,2n,2p,2q>`` identifies at the critical squeezing, by the condition table.

    φ⁻ has no α term, so its amplitude vanishes whenever the signed index sum
    does; those patterns are unique to φ⁺ at every r > 0. At the critical r
    only the two-photon patterns vanish for φ⁺.
    """
    m, n, p, q = (int(v) for v in pattern)
    nz = frozenset(i for i, v in enumerate((m, n, p, q)) if v)
    vals = [v for v in (m, n, p, q) if v]
    if not nz:
        return DRVerdict.PHI_PLUS
    if sum(vals) == 1:
        return DRVerdict.PHI_MINUS
    if nz in ({0, 1}, {0, 2}, {1, 3}, {2, 3}):
        ok = vals[0] == vals[1]
    elif nz in ({0, 2, 3}, {0, 1, 3}):
        ok = vals[0] - vals[1] + vals[2] == 0
    elif nz == {0, 1, 2}:
        ok = vals[0] - vals[1] - vals[2] == 0
    elif nz == {1, 2, 3}:
        # mirror image of the {0, 1, 2} row under mode reversal
        ok = -vals[0] - vals[1] + vals[2] == 0
    elif len(nz) == 4:
        ok = m - n - p + q == 0
    else:
        ok = False
    return DRVerdict.PHI_PLUS if ok else DRVerdict.AMBIGUOUS


# --------------------------------------------------------------------------- #
# Squeezing values


def db_from_r(r: float) -> float:
    if r < 0:
        raise InvalidInputError(f"squeezing parameter must be non-negative, got {r}")
    return -10 * math.log10(math.exp(-2 * r))


def r_from_db(db: float) -> float:
    if db < 0:
        raise InvalidInputError(f"squeezing in dB must be non-negative, got {db}")
    return db * math.log(10) / 20


def critical_residual(encoding: Encoding | str, r: float) -> float:
    """Defining equation of the critical squeezing: ``2tanh²r - sech²r`` (DR), ``tanh r - sech²r`` (SR)."""
    t, sech2 = math.tanh(r), 1 / math.cosh(r) ** 2
    return 2 * t * t - sech2 if Encoding(encoding) is Encoding.DR else t - sech2


def solve_critical_squeezing(encoding: Encoding | str) -> float:
    """Squeezing at which the two-photon φ⁺ terms vanish, by bisection on [1e-6, 2]."""
    encoding = Encoding(encoding)
    return bisect(lambda r: critical_residual(encoding, r), 1e-6, 2.0, xtol=1e-15, rtol=1e-15, maxiter=200)
