"""Single-wake mathematics for a yawed turbine in a wind-aligned frame.

Everything in this module describes ONE wake: the near-wake length, the
Gaussian widths and their linear far-wake growth, the lateral deflection of
the wake centerline, and the velocity deficit field.  All functions are pure
and accept scalars or numpy arrays (broadcasting like ufuncs); multi-turbine
superposition lives in :mod:`wakesteer.farm`.

Coordinate and sign conventions (fixed, used everywhere):

* ``x`` points downstream along the wind, ``y`` crosswind, ``z`` up, with the
  origin at the hub of the wake-generating turbine.
* Positive yaw ``gamma`` is a counterclockwise rotor rotation viewed from
  above; the yaw-induced deflection angle ``theta`` then carries the sign of
  ``gamma`` and deflects the wake toward positive ``y``.
* ``gamma`` is in radians (the 0.3*gamma small-angle factor in the deflection
  angle requires radians for dimensional consistency of tan(theta)*x).

Near-wake treatment: upstream of the near-wake length ``x0`` the Gaussian
widths are held at their onset values and the centerline follows the straight
line ``delta_r + tan(theta) * x``, which is continuous with the far-wake
expression at ``x0``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

_SQRT2 = np.sqrt(2.0)

# Gaussian exponent sign: the deficit must decay away from the centerline, so
# the exponent is negative (a positive exponent diverges).
# Turbulence-intensity range over which the wake-expansion invariant
# k_a * I + k_b > 0 is enforced.
_TI_RANGE = (0.001, 0.5)


class WakeDomainError(ValueError):
    """An input left the validity region of the wake model."""


@dataclass(frozen=True)
class WakeParams:
    """The six tunable wake-model parameters.

    ``alpha``/``beta`` set the near-wake length, ``k_a``/``k_b`` the linear
    wake expansion as a function of rotor turbulence, and ``a_d``/``b_d`` the
    rotation-induced lateral deflection (``a_d`` in rotor diameters, ``b_d``
    in metres per metre downstream).  Defaults are the calibrated optimum
    shipped with the package.
    """

    alpha: float = 3.16
    beta: float = 0.328
    k_a: float = 0.174
    k_b: float = 9.69e-4
    a_d: float = -1.34e-3
    b_d: float = -2.68e-3

    def __post_init__(self):
        if not (self.alpha > 0 and self.beta > 0):
            raise WakeDomainError(
                f"alpha and beta must be positive, got {self.alpha}, {self.beta}"
            )
        lo, hi = _TI_RANGE
        if self.k_a * lo + self.k_b <= 0 or self.k_a * hi + self.k_b <= 0:
            raise WakeDomainError(
                f"wake expansion k_a*I + k_b must stay positive on I in {_TI_RANGE}"
            )

    def as_array(self) -> np.ndarray:
        return np.array(
            [self.alpha, self.beta, self.k_a, self.k_b, self.a_d, self.b_d]
        )

    @classmethod
    def from_array(cls, values) -> "WakeParams":
        alpha, beta, k_a, k_b, a_d, b_d = (float(v) for v in values)
        return cls(alpha, beta, k_a, k_b, a_d, b_d)

    @classmethod
    def field_names(cls) -> tuple[str, ...]:
        return ("alpha", "beta", "k_a", "k_b", "a_d", "b_d")


@dataclass(frozen=True)
class OperatingPoint:
    """Yaw misalignment, thrust coefficient and diameter of one turbine."""

    gamma: float       # rad
    c_t: float         # dimensionless, in (0, 1)
    diameter: float    # m

    def __post_init__(self):
        if not 0.0 < self.c_t < 1.0:
            raise WakeDomainError(f"c_t must be in (0, 1), got {self.c_t}")
        if not abs(self.gamma) < np.pi / 2:
            raise WakeDomainError(f"|gamma| must be < pi/2, got {self.gamma}")
        if not self.diameter > 0:
            raise WakeDomainError(f"diameter must be positive, got {self.diameter}")


@dataclass(frozen=True)
class WakeGeometry:
    """Derived geometry of a single wake at a given rotor turbulence."""

    x0: float          # near-wake length, m
    sigma_y0: float    # m
    sigma_z0: float    # m
    k_y: float
    k_z: float
    theta: float       # initial deflection angle, rad


# ---------------------------------------------------------------------------
# array kernels (shared by the public scalar API and the farm evaluator)
# ---------------------------------------------------------------------------

def _x0(gamma, c_t, diameter, i_rotor, p: WakeParams):
    c0 = 1.0 - np.sqrt(1.0 - c_t)
    return (
        diameter * np.cos(gamma) * (2.0 - c0)
        / (_SQRT2 * (p.alpha * i_rotor + p.beta * c0))
    )


def _expansion(i_rotor, p: WakeParams):
    return p.k_a * np.asarray(i_rotor, dtype=float) + p.k_b


def _sigma0(gamma, diameter):
    sigma_z0 = diameter / (2.0 * _SQRT2)
    return sigma_z0 * np.cos(gamma), sigma_z0


def _theta(gamma, c_t):
    return 0.3 * gamma / np.cos(gamma) * (1.0 - np.sqrt(1.0 - c_t * np.cos(gamma)))


def _wake_fields(x, y, z, gamma, c_t, diameter, i_rotor, p: WakeParams):
    """Deficit fraction plus the widths/deflection it was evaluated with.

    All arguments broadcast together.  The deficit is zero at and upstream of
    the rotor (x <= 0).  Returns ``(deficit, sigma_y, sigma_z, delta_f,
    n_clamped)`` where ``n_clamped`` counts points at which the amplitude
    radicand had to be clamped to zero.
    """
    x = np.asarray(x, dtype=float)
    gamma = np.asarray(gamma, dtype=float)
    c_t = np.asarray(c_t, dtype=float)
    i_rotor = np.asarray(i_rotor, dtype=float)

    x0 = _x0(gamma, c_t, diameter, i_rotor, p)
    k = _expansion(i_rotor, p)
    sigma_y0, sigma_z0 = _sigma0(gamma, diameter)

    # widths grow linearly beyond x0 and are held at onset values before it
    growth = np.maximum(x - x0, 0.0) * k
    sigma_y = sigma_y0 + growth
    sigma_z = sigma_z0 + growth

    theta = _theta(gamma, c_t)
    delta_r = p.a_d * diameter + p.b_d * x

    c0 = 1.0 - np.sqrt(1.0 - c_t)
    sqrt_ct = np.sqrt(c_t)
    s_sigma = np.sqrt(sigma_y * sigma_z / (sigma_y0 * sigma_z0))
    envelope = c0**2 - 3.0 * np.exp(1.0 / 12.0) * c0 + 3.0 * np.exp(1.0 / 3.0)
    log_ratio = np.log(
        (1.6 + sqrt_ct) * (1.6 * s_sigma - sqrt_ct)
        / ((1.6 - sqrt_ct) * (1.6 * s_sigma + sqrt_ct))
    )
    far = (
        np.tan(theta) * x0
        + theta / 5.2 * envelope
        * np.sqrt(sigma_y0 * sigma_z0 / (k * k * c_t))
        * log_ratio
    )
    delta_f = delta_r + np.where(x < x0, np.tan(theta) * x, far)

    radicand = 1.0 - sigma_y0 * sigma_z0 / (sigma_y * sigma_z) * c_t
    clamped = radicand < 0.0
    amplitude = 1.0 - np.sqrt(np.maximum(radicand, 0.0))

    shape = np.exp(
        -((y - delta_f) ** 2) / (2.0 * sigma_y**2) - z**2 / (2.0 * sigma_z**2)
    )
    deficit = np.where(x > 0.0, amplitude * shape, 0.0)
    n_clamped = int(np.count_nonzero(np.broadcast_to(clamped & (x > 0.0), deficit.shape)))
    return deficit, sigma_y, sigma_z, delta_f, n_clamped


# ---------------------------------------------------------------------------
# public single-wake operations
# ---------------------------------------------------------------------------

def _check_ti(i_rotor) -> None:
    if np.any(np.asarray(i_rotor) <= 0):
        raise WakeDomainError(f"rotor turbulence intensity must be positive, got {i_rotor}")


def near_wake_length(op: OperatingPoint, i_rotor: float, p: WakeParams) -> float:
    """Downstream distance x0 where the converging near-wake cone ends.

    x0 = D cos(gamma) (1 + sqrt(1 - C_T)) / (sqrt(2) (alpha I + beta (1 - sqrt(1 - C_T)))).
    Strictly positive and strictly decreasing in ``i_rotor``.
    """
    _check_ti(i_rotor)
    return float(_x0(op.gamma, op.c_t, op.diameter, i_rotor, p))


def wake_expansion(i_rotor: float, p: WakeParams) -> tuple[float, float]:
    """Linear wake-growth rates (k_y, k_z) = (k_a I + k_b) in both directions."""
    _check_ti(i_rotor)
    k = float(_expansion(i_rotor, p))
    if k <= 0:
        raise WakeDomainError(f"wake expansion must be positive, got {k}")
    return k, k


def initial_sigmas(op: OperatingPoint) -> tuple[float, float]:
    """Gaussian widths at the near-wake end: (D cos(gamma) / (2 sqrt 2), D / (2 sqrt 2))."""
    sigma_y0, sigma_z0 = _sigma0(op.gamma, op.diameter)
    return float(sigma_y0), float(sigma_z0)


def sigmas_at(x, op: OperatingPoint, i_rotor: float, p: WakeParams):
    """Gaussian widths at downstream distance ``x`` (held at onset for x < x0)."""
    _check_ti(i_rotor)
    x = np.asarray(x, dtype=float)
    if np.any(x < 0):
        raise WakeDomainError("x must be non-negative")
    x0 = _x0(op.gamma, op.c_t, op.diameter, i_rotor, p)
    k = _expansion(i_rotor, p)
    sigma_y0, sigma_z0 = _sigma0(op.gamma, op.diameter)
    growth = np.maximum(x - x0, 0.0) * k
    return sigma_y0 + growth, sigma_z0 + growth


def initial_deflection_angle(op: OperatingPoint) -> float:
    """Initial wake skew angle theta; zero iff gamma is zero, odd in gamma."""
    if op.c_t * np.cos(op.gamma) >= 1.0:
        raise WakeDomainError("C_T cos(gamma) must be < 1")
    return float(_theta(op.gamma, op.c_t))


def rotation_deflection(x, op: OperatingPoint, p: WakeParams):
    """Lateral offset from blade rotation: a_d * D + b_d * x (linear in x)."""
    return p.a_d * op.diameter + p.b_d * np.asarray(x, dtype=float)


def total_deflection(x, op: OperatingPoint, i_rotor: float, p: WakeParams):
    """Lateral position of the wake centerline at downstream distance ``x``.

    Near wake (x < x0): the straight line delta_r(x) + tan(theta) x.  Far wake:
    delta_r(x) + tan(theta) x0 plus the curved-deflection term driven by the
    width ratio S_sigma; the two branches agree at x = x0 where the log term
    vanishes.
    """
    _check_ti(i_rotor)
    x = np.asarray(x, dtype=float)
    if np.any(x < 0):
        raise WakeDomainError("x must be non-negative")
    sqrt_ct = np.sqrt(op.c_t)
    # the log factors are positive for any C_T in (0, 1) because S_sigma >= 1;
    # their common worst case is 1.6 - sqrt(C_T), the S_sigma = 1 infimum of
    # the factor 1.6 S_sigma - sqrt(C_T); name the factor if it ever fails
    if 1.6 - sqrt_ct <= 0:
        raise WakeDomainError(
            "deflection log factor '1.6 S_sigma - sqrt(C_T)' is non-positive "
            f"(C_T={op.c_t} too close to 1 for the deflection model)"
        )
    _, _, _, delta_f, _ = _wake_fields(
        x, 0.0, 0.0, op.gamma, op.c_t, op.diameter, i_rotor, p
    )
    return delta_f if delta_f.ndim else float(delta_f)


def deficit(x, y, z, op: OperatingPoint, i_rotor: float, p: WakeParams):
    """Fractional velocity deficit 1 - U/U_inf at wake-frame point(s) (x, y, z).

    Gaussian in (y - delta_f, z) with the amplitude 1 - sqrt(1 - C_T *
    sigma_y0 sigma_z0 / (sigma_y sigma_z)); zero for x <= 0.  ``z`` is
    measured from hub height.
    """
    _check_ti(i_rotor)
    d, _, _, _, _ = _wake_fields(
        x, np.asarray(y, dtype=float), np.asarray(z, dtype=float),
        op.gamma, op.c_t, op.diameter, i_rotor, p,
    )
    return d if d.ndim else float(d)


def geometry(op: OperatingPoint, i_rotor: float, p: WakeParams) -> WakeGeometry:
    """Bundle the derived single-wake geometry for one operating point."""
    x0 = near_wake_length(op, i_rotor, p)
    k_y, k_z = wake_expansion(i_rotor, p)
    sigma_y0, sigma_z0 = initial_sigmas(op)
    return WakeGeometry(x0, sigma_y0, sigma_z0, k_y, k_z, initial_deflection_angle(op))
