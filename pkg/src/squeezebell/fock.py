"""Brute-force evolution of few-mode photonic states in a truncated Fock basis.

States are stored sparsely: an integer array of occupation patterns plus a
complex amplitude per pattern. Beam splitters act exactly on each fixed
photon-number sector; squeezers use the closed-form Fock columns for zero,
one and two input photons, which is all the Bell-measurement circuits need.

Dual-rail mode order before the polarizing beam splitters is
``(port1-H, port1-V, port2-H, port2-V)``. The polarizing beam splitters then
route the modes to ``(port1-H, port1-V, port2-V, port2-H)``, which is the
order in which the front end reproduces the textbook output patterns
``|1100> + |0011>``, ``|1010> - |0101>`` and ``|2000> + |0002> ± |0200> ± |0020>``.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Iterator, Mapping, Sequence, Union

import numpy as np

from .errors import InvalidConfigurationError, UnsupportedColumnError

PRUNE_TOL = 1e-15

# PBS output mode k carries input mode DR_PBS_ROUTING[k].
DR_PBS_ROUTING = (0, 1, 3, 2)


class Encoding(str, enum.Enum):
    SR = "SR"
    DR = "DR"

    @property
    def mode_count(self) -> int:
        return 2 if self is Encoding.SR else 4


class BellState(str, enum.Enum):
    PSI_PLUS = "psi+"
    PSI_MINUS = "psi-"
    PHI_PLUS = "phi+"
    PHI_MINUS = "phi-"

    @property
    def sign(self) -> int:
        return 1 if self.value.endswith("+") else -1

    @property
    def is_psi(self) -> bool:
        return self.value.startswith("psi")


BELL_STATES = (BellState.PSI_PLUS, BellState.PSI_MINUS, BellState.PHI_PLUS, BellState.PHI_MINUS)


@dataclass(frozen=True)
class BellInput:
    encoding: Encoding
    state: BellState

    def __post_init__(self):
        object.__setattr__(self, "encoding", Encoding(self.encoding))
        object.__setattr__(self, "state", BellState(self.state))


@dataclass(frozen=True)
class StateVector:
    """Immutable sparse state over occupation patterns.

    Attributes:
        mode_count: number of optical modes.
        cap: largest photon number stored in any single mode.
        patterns: ``(K, mode_count)`` integer array, rows sorted and unique.
        amplitudes: ``(K,)`` complex array aligned with ``patterns``.
    """

    mode_count: int
    cap: int
    patterns: np.ndarray = field(repr=False)
    amplitudes: np.ndarray = field(repr=False)

    def __post_init__(self):
        self.patterns.setflags(write=False)
        self.amplitudes.setflags(write=False)

    @classmethod
    def from_dict(cls, terms: Mapping[Sequence[int], complex], cap: int) -> "StateVector":
        items = list(terms.items())
        if not items:
            raise InvalidConfigurationError("a state needs at least one term")
        mode_count = len(items[0][0])
        patterns = np.array([p for p, _ in items], dtype=np.int64).reshape(-1, mode_count)
        amps = np.array([a for _, a in items], dtype=complex)
        return _canonical(mode_count, cap, patterns, amps)

    @classmethod
    def vacuum(cls, mode_count: int, cap: int) -> "StateVector":
        return cls.from_dict({(0,) * mode_count: 1.0}, cap)

    def __len__(self) -> int:
        return len(self.amplitudes)

    def __iter__(self) -> Iterator[tuple[tuple[int, ...], complex]]:
        for row, amp in zip(self.patterns, self.amplitudes):
            yield tuple(int(n) for n in row), complex(amp)

    def as_dict(self) -> dict[tuple[int, ...], complex]:
        return dict(iter(self))

    def amplitude(self, pattern: Sequence[int]) -> complex:
        return self.as_dict().get(tuple(pattern), 0j)

    def norm(self) -> float:
        return float(np.sqrt(np.sum(np.abs(self.amplitudes) ** 2)))

    def total_photons(self) -> np.ndarray:
        return self.patterns.sum(axis=1)


def _canonical(mode_count, cap, patterns, amps) -> StateVector:
    """Drop over-cap rows, merge duplicate patterns and prune tiny amplitudes."""
    keep = np.all(patterns <= cap, axis=1) if len(patterns) else np.zeros(0, bool)
    patterns, amps = patterns[keep], amps[keep]
    if len(patterns):
        keys = np.ravel_multi_index(patterns.T, (cap + 1,) * mode_count)
        uniq, inverse = np.unique(keys, return_inverse=True)
        summed = np.bincount(inverse, weights=amps.real, minlength=len(uniq)) + 1j * np.bincount(
            inverse, weights=amps.imag, minlength=len(uniq)
        )
        patterns = np.stack(np.unravel_index(uniq, (cap + 1,) * mode_count), axis=1).astype(np.int64)
        keep = np.abs(summed) > PRUNE_TOL
        patterns, amps = patterns[keep], summed[keep]
    patterns = patterns.reshape(-1, mode_count)
    return StateVector(mode_count, cap, np.ascontiguousarray(patterns), np.ascontiguousarray(amps))


# --------------------------------------------------------------------------- #
# Circuit description


@dataclass(frozen=True)
class BeamSplitter:
    """Two-mode beam splitter acting on the creation-operator vector of ``modes``.

    ``real``: ``a_i -> cos θ a_i + sin θ a_j``, ``a_j -> -sin θ a_i + cos θ a_j``.
    ``balanced-complex``: ``a_i -> cos θ a_i + i sin θ a_j``, ``a_j -> i sin θ a_i + cos θ a_j``;
    at the default θ = π/4 this is the 50:50 splitter ``(1, i; i, 1)/√2``.
    """

    theta: float = math.pi / 4
    modes: tuple[int, int] = (0, 1)
    convention: str = "real"

    def matrix(self) -> np.ndarray:
        c, s = math.cos(self.theta), math.sin(self.theta)
        if self.convention == "real":
            return np.array([[c, s], [-s, c]], dtype=complex)
        if self.convention == "balanced-complex":
            return np.array([[c, 1j * s], [1j * s, c]], dtype=complex)
        raise InvalidConfigurationError(f"unknown beam splitter convention {self.convention!r}")


@dataclass(frozen=True)
class Squeezer:
    r: float
    mode: int


@dataclass(frozen=True)
class PolarizingBeamSplitter:
    routing: tuple[int, ...] = DR_PBS_ROUTING


Element = Union[BeamSplitter, Squeezer, PolarizingBeamSplitter]


@dataclass(frozen=True)
class CircuitSpec:
    mode_count: int
    elements: tuple[Element, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "elements", tuple(self.elements))
        for el in self.elements:
            if isinstance(el, BeamSplitter):
                i, j = el.modes
                if i == j:
                    raise InvalidConfigurationError(f"beam splitter modes overlap: {el.modes}")
                _check_modes(el.modes, self.mode_count)
                if not math.isfinite(el.theta):
                    raise InvalidConfigurationError("beam splitter angle must be finite")
            elif isinstance(el, Squeezer):
                _check_modes((el.mode,), self.mode_count)
                if not el.r >= 0:
                    raise InvalidConfigurationError(f"squeezing must be non-negative, got {el.r}")
            elif isinstance(el, PolarizingBeamSplitter):
                if self.mode_count != 4 or sorted(el.routing) != [0, 1, 2, 3]:
                    raise InvalidConfigurationError("a PBS stage needs four modes and a permutation")
            else:
                raise InvalidConfigurationError(f"unknown circuit element {el!r}")


def _check_modes(modes, mode_count):
    for m in modes:
        if not 0 <= m < mode_count:
            raise InvalidConfigurationError(f"mode {m} out of range for {mode_count} modes")


def dr_circuit(r: float) -> CircuitSpec:
    """Dual-rail scheme: 50:50 splitter on both polarizations, PBS routing, four equal squeezers."""
    return CircuitSpec(
        4,
        (
            BeamSplitter(math.pi / 4, (0, 2), "balanced-complex"),
            BeamSplitter(math.pi / 4, (1, 3), "balanced-complex"),
            PolarizingBeamSplitter(),
            *(Squeezer(r, m) for m in range(4)),
        ),
    )


def sr_circuit(theta1: float, theta2: float, r1: float, r2: float) -> CircuitSpec:
    """Single-rail Bloch-Messiah network: splitter, two squeezers, splitter."""
    return CircuitSpec(
        2,
        (
            BeamSplitter(theta1, (0, 1)),
            Squeezer(r1, 0),
            Squeezer(r2, 1),
            BeamSplitter(theta2, (0, 1)),
        ),
    )


# --------------------------------------------------------------------------- #
# Operations


def prepare_bell(bell: BellInput, cap: int) -> StateVector:
    if cap < 2:
        raise InvalidConfigurationError(f"cap must be at least 2, got {cap}")
    h = 1 / math.sqrt(2)
    s = bell.state.sign
    if bell.encoding is Encoding.SR:
        a, b = ((1, 0), (0, 1)) if bell.state.is_psi else ((0, 0), (1, 1))
    else:
        # |HV> = (1,0,0,1), |VH> = (0,1,1,0), |HH> = (1,0,1,0), |VV> = (0,1,0,1)
        a, b = ((1, 0, 0, 1), (0, 1, 1, 0)) if bell.state.is_psi else ((1, 0, 1, 0), (0, 1, 0, 1))
    return StateVector.from_dict({a: h, b: s * h}, cap)


@lru_cache(maxsize=4096)
def _sector_matrix(n: int, u: tuple[complex, complex, complex, complex]) -> np.ndarray:
    """Beam-splitter matrix on the ``n``-photon sector ``|m, n-m>``, indexed ``[out_m, in_m]``."""
    u00, u01, u10, u11 = u
    out = np.zeros((n + 1, n + 1), dtype=complex)
    sqf = np.sqrt([float(math.factorial(k)) for k in range(n + 1)])
    for m in range(n + 1):
        # (u00 x + u01)^m (u10 x + u11)^(n-m), coefficient of x^k
        left = np.array([math.comb(m, k) * u00**k * u01 ** (m - k) for k in range(m + 1)])
        right = np.array([math.comb(n - m, k) * u10**k * u11 ** (n - m - k) for k in range(n - m + 1)])
        poly = np.convolve(left, right)
        out[:, m] = poly * sqf * sqf[::-1] / (sqf[m] * sqf[n - m])
    return out


def apply_beam_splitter(
    state: StateVector, theta: float, modes: tuple[int, int], convention: str = "real"
) -> StateVector:
    i, j = modes
    if i == j:
        raise InvalidConfigurationError(f"beam splitter modes overlap: {modes}")
    _check_modes(modes, state.mode_count)
    u = BeamSplitter(theta, modes, convention).matrix()
    key = tuple(complex(v) for v in u.ravel())
    pats, amps = state.patterns, state.amplitudes
    sector = pats[:, i] + pats[:, j]
    new_pats, new_amps = [], []
    for n in np.unique(sector):
        rows = np.nonzero(sector == n)[0]
        mat = _sector_matrix(int(n), key)
        block = amps[rows, None] * mat[:, pats[rows, i]].T  # (rows, n+1)
        rep = np.repeat(pats[rows], n + 1, axis=0)
        k = np.tile(np.arange(n + 1), len(rows))
        rep[:, i] = k
        rep[:, j] = n - k
        new_pats.append(rep)
        new_amps.append(block.ravel())
    return _canonical(state.mode_count, state.cap, np.concatenate(new_pats), np.concatenate(new_amps))


def apply_pbs(state: StateVector, routing: Sequence[int] = DR_PBS_ROUTING) -> StateVector:
    if state.mode_count != 4:
        raise InvalidConfigurationError(f"PBS stage expects 4 polarization modes, got {state.mode_count}")
    if sorted(routing) != [0, 1, 2, 3]:
        raise InvalidConfigurationError(f"routing must be a permutation of 0..3, got {routing}")
    return _canonical(4, state.cap, state.patterns[:, list(routing)], state.amplitudes.copy())


@lru_cache(maxsize=256)
def squeezer_column(n_in: int, r: float, cap: int) -> np.ndarray:
    """Fock amplitudes ``<k|S(r)|n_in>`` for ``k = 0..cap`` and ``n_in`` in {0, 1, 2}."""
    t, sech = math.tanh(r), 1 / math.cosh(r)
    col = np.zeros(cap + 1)
    for k in range(n_in % 2, cap + 1, 2):
        m = k // 2
        base = (-t / 2) ** m / math.factorial(m)
        if n_in == 0:
            col[k] = math.sqrt(sech) * math.sqrt(math.factorial(2 * m)) * base
        elif n_in == 1:
            col[k] = sech**1.5 * math.sqrt(math.factorial(2 * m + 1)) * base
        else:
            val = math.sqrt(sech / 2) * t * math.sqrt(math.factorial(2 * m)) * base
            if m >= 1:
                val += sech**2.5 * (-t / 2) ** (m - 1) * math.sqrt(math.factorial(2 * m)) / (
                    math.sqrt(2) * math.factorial(m - 1)
                )
            col[k] = val
    return col


def apply_squeezer(state: StateVector, r: float, mode: int, cap: int | None = None) -> StateVector:
    """Apply ``exp[r(a^2 - a†^2)/2]`` to ``mode``, truncating the output series at ``cap``."""
    _check_modes((mode,), state.mode_count)
    if not r >= 0:
        raise InvalidConfigurationError(f"squeezing must be non-negative, got {r}")
    cap = state.cap if cap is None else cap
    pats, amps = state.patterns, state.amplitudes
    if np.any(pats[:, mode] > 2):
        raise UnsupportedColumnError(
            f"squeezer on mode {mode} needs the column for {int(pats[:, mode].max())} photons; only 0, 1, 2 are available"
        )
    new_pats, new_amps = [], []
    for n_in in (0, 1, 2):
        rows = np.nonzero(pats[:, mode] == n_in)[0]
        if not len(rows):
            continue
        col = squeezer_column(n_in, float(r), cap)
        ks = np.nonzero(col)[0]
        rep = np.repeat(pats[rows], len(ks), axis=0)
        rep[:, mode] = np.tile(ks, len(rows))
        new_pats.append(rep)
        new_amps.append((amps[rows, None] * col[ks][None, :]).ravel())
    return _canonical(state.mode_count, cap, np.concatenate(new_pats), np.concatenate(new_amps))


def apply_element(state: StateVector, element: Element) -> StateVector:
    if isinstance(element, BeamSplitter):
        return apply_beam_splitter(state, element.theta, element.modes, element.convention)
    if isinstance(element, Squeezer):
        return apply_squeezer(state, element.r, element.mode)
    if isinstance(element, PolarizingBeamSplitter):
        return apply_pbs(state, element.routing)
    raise InvalidConfigurationError(f"unknown circuit element {element!r}")


def run_circuit(bell: BellInput, circuit: CircuitSpec, cap: int) -> StateVector:
    if circuit.mode_count != bell.encoding.mode_count:
        raise InvalidConfigurationError(
            f"{bell.encoding.value} input needs {bell.encoding.mode_count} modes, circuit has {circuit.mode_count}"
        )
    state = prepare_bell(bell, cap)
    for element in circuit.elements:
        state = apply_element(state, element)
    return state
