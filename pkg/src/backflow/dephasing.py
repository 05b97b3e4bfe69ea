"""Single-qubit pure dephasing driven by a static frequency environment.

The qubit coherence is multiplied by a dephasing function k(t), the
Fourier transform of the environmental frequency distribution; populations
are untouched. Time is measured in units where the refractive-index
difference between the two qubit levels is 1, so every example below is
parameterized by dimensionless ratios like omega0/delta.

Besides the closed forms, the module builds a finite-dimensional
realization of the same dynamics (qubit plus M discrete frequency modes
under a diagonal unitary), which the general witness machinery can evolve
directly. The two routes must agree, which makes them mutually validating.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Union

import numpy as np

from . import linalg, witness
from .states import BipartiteState, plus_minus_pair, validate_density_matrix
from .witness import ScenarioPair, WitnessPoint, WitnessSurface

PROB_TOL = 1e-12
SINGULAR_TOL = 1e-12
FULL_MODEL_DIM_CAP = 4096
DEFAULT_MODES = 2048
DEFAULT_WINDOW = 40.0


class SingularPointError(ArithmeticError):
    """The dephasing function vanishes, so the time-local rates diverge."""


@dataclass(frozen=True)
class SingleLorentzian:
    """Lorentzian frequency distribution: center omega0, width delta."""

    omega0: float
    delta: float

    def __post_init__(self):
        if self.delta <= 0:
            raise ValueError(f"width must be positive, got {self.delta}")


@dataclass(frozen=True)
class DoubleLorentzian:
    """Two Lorentzian components; r weights the second relative to the first."""

    omega0_1: float
    delta1: float
    omega0_2: float
    delta2: float
    r: float

    def __post_init__(self):
        if self.delta1 <= 0 or self.delta2 <= 0:
            raise ValueError(f"widths must be positive, got ({self.delta1}, {self.delta2})")
        if self.r < 0:
            raise ValueError(f"component ratio must be nonnegative, got {self.r}")


@dataclass(frozen=True, eq=False)
class Discrete:
    """Finitely many frequencies with probabilities summing to one."""

    freqs: np.ndarray
    probs: np.ndarray

    def __post_init__(self):
        f = np.asarray(self.freqs, dtype=float)
        p = np.asarray(self.probs, dtype=float)
        if f.ndim != 1 or p.shape != f.shape or f.size == 0:
            raise ValueError("freqs and probs must be matching nonempty 1-d arrays")
        if np.any(p < 0):
            raise ValueError("probabilities must be nonnegative")
        total = float(p.sum())
        if abs(total - 1.0) > PROB_TOL:
            raise ValueError(f"probabilities sum to {total:.15g}, expected 1")
        object.__setattr__(self, "freqs", f)
        object.__setattr__(self, "probs", p)


FrequencyDistribution = Union[SingleLorentzian, DoubleLorentzian, Discrete]


def dephasing_function(dist: FrequencyDistribution, t):
    """k(t): the coherence multiplier after time t. k(0) = 1, |k| <= 1.

    Accepts scalar or array times.
    """
    tt = np.asarray(t, dtype=float)
    if isinstance(dist, SingleLorentzian):
        out = np.exp((1j * dist.omega0 - dist.delta) * tt)
    elif isinstance(dist, DoubleLorentzian):
        e1 = np.exp((1j * dist.omega0_1 - dist.delta1) * tt)
        e2 = np.exp((1j * dist.omega0_2 - dist.delta2) * tt)
        out = (e1 + dist.r * e2) / (1.0 + dist.r)
    elif isinstance(dist, Discrete):
        phases = np.exp(1j * np.multiply.outer(tt, dist.freqs))
        out = phases @ dist.probs
    else:
        raise TypeError(f"unsupported distribution type {type(dist).__name__}")
    return out if tt.ndim else complex(out)


def _log_derivative(dist: FrequencyDistribution, t: float) -> complex:
    """d/dt ln k(t), rejecting times where k has numerically vanished."""
    if isinstance(dist, SingleLorentzian):
        return complex(1j * dist.omega0 - dist.delta)
    if isinstance(dist, DoubleLorentzian):
        z1 = 1j * dist.omega0_1 - dist.delta1
        z2 = 1j * dist.omega0_2 - dist.delta2
        e1 = np.exp(z1 * t)
        e2 = np.exp(z2 * t)
        den = e1 + dist.r * e2
        if abs(den) / (1.0 + dist.r) < SINGULAR_TOL:
            raise SingularPointError(f"dephasing function vanishes at t={t:.12g}")
        return complex((z1 * e1 + dist.r * z2 * e2) / den)
    if isinstance(dist, Discrete):
        phases = np.exp(1j * dist.freqs * t)
        k = complex(dist.probs @ phases)
        if abs(k) < SINGULAR_TOL:
            raise SingularPointError(f"dephasing function vanishes at t={t:.12g}")
        dk = complex(dist.probs @ (1j * dist.freqs * phases))
        return dk / k
    raise TypeError(f"unsupported distribution type {type(dist).__name__}")


def tcl_coefficients(dist: FrequencyDistribution, t: float) -> tuple[float, float]:
    """Unitary and decay rates (epsilon, gamma) of the time-local generator.

    epsilon drives the sigma_z rotation and gamma the coherence decay, with
    coherence evolving as d/dt ln k. A single Lorentzian gives the constant
    pair (omega0/2, delta/2); a negative gamma anywhere signals coherence
    revival. Times where |k| < 1e-12 are rejected as singular instead of
    returning huge rates.
    """
    logd = _log_derivative(dist, float(t))
    return 0.5 * logd.imag, -0.5 * logd.real


def apply_channel(kval: complex, rho) -> np.ndarray:
    """Dephase a qubit state: populations kept, coherences scaled by k.

    The 01 entry picks up conj(k) and the 10 entry k, matching the
    convention that level 1 accumulates the positive phase.
    """
    k = complex(kval)
    if abs(k) > 1.0 + 1e-12:
        raise ValueError(f"|k| = {abs(k):.12g} exceeds 1")
    m = validate_density_matrix(rho, name="qubit state")
    if m.shape != (2, 2):
        raise ValueError(f"expected a 2x2 state, got shape {m.shape}")
    return np.array(
        [[m[0, 0], np.conj(k) * m[0, 1]], [k * m[1, 0], m[1, 1]]], dtype=complex
    )


def analytic_witnesses(
    dist: FrequencyDistribution, tprime: float, t: float
) -> tuple[float, float, float, float]:
    """(d_t, forecast, influence, delta_d) for the optimal +/- initial pair.

    All four reduce to moduli of k: D = |k(t)|, F = |k(t)k(t')|,
    B = |k(t+t') - k(t)k(t')| and delta_d = |k(t+t')| - |k(t)|.
    """
    if t < 0 or tprime < 0:
        raise ValueError("times must be nonnegative")
    kt = dephasing_function(dist, t)
    ktp = dephasing_function(dist, tprime)
    knext = dephasing_function(dist, t + tprime)
    d_t = abs(kt)
    forecast = abs(kt * ktp)
    influence = abs(knext - kt * ktp)
    delta_d = abs(knext) - d_t
    return d_t, forecast, influence, delta_d


def analytic_point(
    dist: FrequencyDistribution,
    tprime: float,
    t: float,
    eps: float = witness.DEFAULT_CLASS_EPS,
) -> WitnessPoint:
    """Closed-form counterpart of witness.evaluate_point for this model."""
    d_t, forecast, influence, delta_d = analytic_witnesses(dist, tprime, t)
    d_next = d_t + delta_d
    lower = influence - forecast - d_t
    upper = influence + forecast - d_t
    if delta_d < lower - witness.BOUND_TOL or delta_d > upper + witness.BOUND_TOL:
        raise witness.InvariantViolation(
            f"bound violated at t={t:.12g}, t'={tprime:.12g}: "
            f"delta_d={delta_d:.6e} outside [{lower:.6e}, {upper:.6e}]"
        )
    return WitnessPoint(
        t=float(t), tprime=float(tprime), d_t=d_t, d_next=d_next,
        forecast=forecast, influence=influence, delta_d=delta_d,
        lower=lower, upper=upper,
        label=witness.classify_values(influence, d_t, forecast, eps),
    )


def analytic_surface(
    dist: FrequencyDistribution,
    t_grid,
    tprime_grid,
    eps: float = witness.DEFAULT_CLASS_EPS,
) -> WitnessSurface:
    """Closed-form witness surface over a (t, t') product grid."""
    ts = witness._require_grid(t_grid, "t grid")
    tps = witness._require_grid(tprime_grid, "t' grid")
    rows = tuple(
        tuple(analytic_point(dist, tp, t, eps) for tp in tps) for t in ts
    )
    return WitnessSurface(t_grid=ts, tprime_grid=tps, points=rows)


def frequency_density(dist: FrequencyDistribution, omega):
    """Normalized frequency density of a continuum distribution."""
    w = np.asarray(omega, dtype=float)
    if isinstance(dist, SingleLorentzian):
        return (dist.delta / np.pi) / ((w - dist.omega0) ** 2 + dist.delta**2)
    if isinstance(dist, DoubleLorentzian):
        w1 = (1.0 / (1.0 + dist.r)) * (dist.delta1 / np.pi) / (
            (w - dist.omega0_1) ** 2 + dist.delta1**2
        )
        w2 = (dist.r / (1.0 + dist.r)) * (dist.delta2 / np.pi) / (
            (w - dist.omega0_2) ** 2 + dist.delta2**2
        )
        return w1 + w2
    raise TypeError("frequency_density is defined for continuum distributions only")


def discretize(
    dist: FrequencyDistribution,
    modes: int = DEFAULT_MODES,
    window: float = DEFAULT_WINDOW,
) -> Discrete:
    """Sample a continuum distribution on a uniform frequency grid.

    The grid spans ``window`` widths beyond the outermost component center
    (component-wise for double Lorentzians); weights are the density values
    renormalized to 1. Lorentzian tails decay slowly, so the continuum
    error of the resulting k is truncation-limited at roughly 2/(pi*window)
    once the grid is dense enough.
    """
    if modes < 2:
        raise ValueError(f"need at least 2 modes, got {modes}")
    if window <= 0:
        raise ValueError(f"window must be positive, got {window}")
    if isinstance(dist, SingleLorentzian):
        lo = dist.omega0 - window * dist.delta
        hi = dist.omega0 + window * dist.delta
    elif isinstance(dist, DoubleLorentzian):
        lo = min(dist.omega0_1 - window * dist.delta1, dist.omega0_2 - window * dist.delta2)
        hi = max(dist.omega0_1 + window * dist.delta1, dist.omega0_2 + window * dist.delta2)
    elif isinstance(dist, Discrete):
        raise ValueError("distribution is already discrete")
    else:
        raise TypeError(f"unsupported distribution type {type(dist).__name__}")
    freqs = np.linspace(lo, hi, modes)
    probs = frequency_density(dist, freqs)
    probs = probs / probs.sum()
    return Discrete(freqs=freqs, probs=probs)


class DiagonalPropagator:
    """Diagonal unitary family U(t) = diag(exp(i * rates * t)).

    Time-homogeneous like the eigensystem-backed propagator, but
    conjugation is an elementwise phase twist, so no dense unitary is ever
    materialized.
    """

    def __init__(self, rates):
        r = np.asarray(rates, dtype=float)
        if r.ndim != 1 or r.size == 0:
            raise ValueError("rates must be a nonempty 1-d array")
        self._rates = r

    @property
    def dim(self) -> int:
        return int(self._rates.size)

    @property
    def rates(self) -> np.ndarray:
        return self._rates

    def phases(self, t: float) -> np.ndarray:
        return np.exp(1j * self._rates * float(t))

    def unitary(self, t: float) -> np.ndarray:
        return np.diag(self.phases(t))

    def evolve(self, mat: np.ndarray, t: float) -> np.ndarray:
        p = self.phases(t)
        return mat * np.outer(p, p.conj())


def full_model(
    env: Discrete,
    pair: tuple[np.ndarray, np.ndarray] | None = None,
    dim_cap: int = FULL_MODEL_DIM_CAP,
) -> ScenarioPair:
    """Qubit plus discrete frequency modes as an explicit scenario.

    The environment starts in the pure superposition with amplitudes
    sqrt(p_m); the joint evolution only phases level 1 of the qubit
    (rates 0 on level 0, omega_m on level 1), reproducing the channel with
    the discrete k. Default initial pair: the +/- states.
    """
    modes = int(env.freqs.size)
    if modes > dim_cap:
        raise ValueError(f"{modes} modes exceed the dense-storage cap {dim_cap}")
    if pair is None:
        pair = plus_minus_pair()
    amp = np.sqrt(env.probs).astype(complex)
    rho_env = np.outer(amp, amp.conj())
    state1 = BipartiteState(linalg.tensor_product(pair[0], rho_env), 2, modes)
    state2 = BipartiteState(linalg.tensor_product(pair[1], rho_env), 2, modes)
    rates = np.concatenate([np.zeros(modes), env.freqs])
    return ScenarioPair(state1=state1, state2=state2, propagator=DiagonalPropagator(rates))
