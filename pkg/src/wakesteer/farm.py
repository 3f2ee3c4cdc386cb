"""Steady-state multi-turbine farm evaluation.

Pipeline: rotate the layout into the wind frame, order turbines upstream to
downstream, then sweep once computing per-turbine rotor-effective speed
(root-sum-square deficit superposition over rotor quadrature points), rotor
turbulence (turbine-induced turbulence scaled by wake overlap, dominant
contributor kept), operating thrust coefficient and power.

Internally everything runs over a batch axis so optimizers can evaluate many
control vectors against one scenario in a single sweep; the public
``evaluate_farm`` is the batch-of-one case.  All evaluations are pure.

Conventions: layout positions are (east, north) in metres.  The ambient wind
direction ``phi`` is the direction the wind blows TOWARD, measured
counterclockwise from the east axis, so ``phi = 0`` means the wind-frame
downstream axis is east.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np

from .turbine import TurbineSpec, turbine_power
from .wake import WakeParams, _wake_fields

_CRESPO_COEFF = 0.73
_CRESPO_A_EXP = 0.8325
_CRESPO_TI_EXP = 0.0325
_CRESPO_X_EXP = -0.32


@dataclass(frozen=True)
class AmbientConditions:
    """Freestream direction (rad), turbulence intensity and mean speed."""

    phi: float
    i_inf: float
    u_inf: float

    def __post_init__(self):
        if not self.u_inf > 0:
            raise ValueError(f"u_inf must be positive, got {self.u_inf}")
        if not 0.0 < self.i_inf < 1.0:
            raise ValueError(f"i_inf must be in (0, 1), got {self.i_inf}")
        object.__setattr__(self, "phi", wrap_angle(self.phi))


def wrap_angle(phi: float) -> float:
    """Normalize an angle to (-pi, pi]."""
    wrapped = float(np.arctan2(np.sin(phi), np.cos(phi)))
    return np.pi if wrapped == -np.pi else wrapped


@dataclass(frozen=True, eq=False)
class FarmLayout:
    """Turbine positions as an (N, 2) array of (east, north) metres."""

    positions: np.ndarray

    def __post_init__(self):
        pos = np.atleast_2d(np.asarray(self.positions, dtype=float))
        if pos.ndim != 2 or pos.shape[1] != 2 or pos.shape[0] < 1:
            raise ValueError("positions must be an (N, 2) array with N >= 1")
        object.__setattr__(self, "positions", pos)

    @property
    def n_turbines(self) -> int:
        return self.positions.shape[0]

    def min_spacing(self) -> float:
        if self.n_turbines < 2:
            return np.inf
        diff = self.positions[:, None, :] - self.positions[None, :, :]
        dist = np.hypot(diff[..., 0], diff[..., 1])
        return float(np.min(dist[np.triu_indices(self.n_turbines, k=1)]))

    def pairwise_distances(self) -> np.ndarray:
        diff = self.positions[:, None, :] - self.positions[None, :, :]
        return np.hypot(diff[..., 0], diff[..., 1])


@dataclass(frozen=True, eq=False)
class ControlVector:
    """Per-turbine yaw set-points (rad) and thrust-scaling knobs in (0, 1]."""

    yaw: np.ndarray
    thrust_scale: np.ndarray | None = None

    def __post_init__(self):
        yaw = np.atleast_1d(np.asarray(self.yaw, dtype=float))
        ts = (
            np.ones_like(yaw)
            if self.thrust_scale is None
            else np.atleast_1d(np.asarray(self.thrust_scale, dtype=float))
        )
        if yaw.shape != ts.shape:
            raise ValueError("yaw and thrust_scale lengths differ")
        if np.any(np.abs(yaw) > np.pi / 2):
            raise ValueError("|yaw| must not exceed pi/2")
        if np.any((ts <= 0) | (ts > 1)):
            raise ValueError("thrust_scale must lie in (0, 1]")
        object.__setattr__(self, "yaw", yaw)
        object.__setattr__(self, "thrust_scale", ts)

    @classmethod
    def greedy(cls, n: int) -> "ControlVector":
        return cls(np.zeros(n))


@dataclass(frozen=True, eq=False)
class FarmScenario:
    """Everything one model evaluation needs: turbine, layout, ambient, controls."""

    turbine: TurbineSpec
    layout: FarmLayout
    ambient: AmbientConditions
    controls: ControlVector
    shear_exponent: float = 0.0
    # controller-facing metadata carried by scenario files, ignored by the model
    estimator_weights: tuple | None = None
    yaw_limit: float | None = None

    def __post_init__(self):
        n = self.layout.n_turbines
        if self.controls.yaw.size != n:
            raise ValueError(
                f"control vector length {self.controls.yaw.size} != {n} turbines"
            )
        if self.layout.min_spacing() <= self.turbine.diameter:
            raise ValueError("turbines closer than one rotor diameter")
        if self.estimator_weights is not None:
            w = tuple(float(v) for v in self.estimator_weights)
            if len(w) != n or any(v <= 0 for v in w):
                raise ValueError("estimator weights must be positive, one per turbine")
            object.__setattr__(self, "estimator_weights", w)

    @property
    def n_turbines(self) -> int:
        return self.layout.n_turbines

    def with_controls(self, yaw=None, thrust_scale=None) -> "FarmScenario":
        yaw = self.controls.yaw if yaw is None else yaw
        ts = self.controls.thrust_scale if thrust_scale is None else thrust_scale
        return replace(self, controls=ControlVector(yaw, ts))

    def with_ambient(self, phi=None, i_inf=None, u_inf=None) -> "FarmScenario":
        a = self.ambient
        return replace(
            self,
            ambient=AmbientConditions(
                a.phi if phi is None else phi,
                a.i_inf if i_inf is None else i_inf,
                a.u_inf if u_inf is None else u_inf,
            ),
        )


@dataclass(frozen=True, eq=False)
class FarmEvaluation:
    """Per-turbine model outputs plus aggregate diagnostics."""

    u_rotor: np.ndarray    # m/s
    i_rotor: np.ndarray    # fraction
    c_t: np.ndarray
    power: np.ndarray      # W
    diagnostics: dict = field(default_factory=dict)

    @property
    def farm_power(self) -> float:
        return float(np.sum(self.power))

    def to_csv(self, path) -> None:
        """Write the documented per-turbine table: turbine,u_rotor,i_rotor,ct,power_w."""
        with open(path, "w") as f:
            f.write("turbine,u_rotor,i_rotor,ct,power_w\n")
            for i in range(self.u_rotor.size):
                f.write(
                    f"{i},{self.u_rotor[i]:.6f},{self.i_rotor[i]:.6f},"
                    f"{self.c_t[i]:.6f},{self.power[i]:.3f}\n"
                )


# ---------------------------------------------------------------------------
# geometry helpers
# ---------------------------------------------------------------------------

def rotate_to_wind_frame(layout: FarmLayout, phi: float):
    """Rigid rotation by -phi: returns (x downstream, y crosswind) per turbine."""
    e = layout.positions[:, 0]
    n = layout.positions[:, 1]
    c, s = np.cos(phi), np.sin(phi)
    return e * c + n * s, -e * s + n * c


def sort_upstream(x: np.ndarray, y: np.ndarray) -> np.ndarray:
    """Evaluation order: ascending downstream coordinate, ties by crosswind then index."""
    idx = np.arange(x.size)
    return np.lexsort((idx, y, x))


def rotor_points(spec: TurbineSpec, n_radial: int = 4, n_azimuthal: int = 12):
    """Area-weighted quadrature points on the rotor disk in its (y, z) plane.

    Equal-area annuli with points at the annulus mid-area radius; weights sum
    to one and the weighted centroid is the hub center.
    """
    if n_radial < 1 or n_azimuthal < 3:
        raise ValueError("need n_radial >= 1 and n_azimuthal >= 3")
    r_edges = spec.rotor_radius * np.sqrt(np.arange(n_radial + 1) / n_radial)
    r_mid = np.sqrt((r_edges[:-1] ** 2 + r_edges[1:] ** 2) / 2.0)
    psi = 2.0 * np.pi * (np.arange(n_azimuthal) + 0.5) / n_azimuthal
    py = np.outer(r_mid, np.cos(psi)).ravel()
    pz = np.outer(r_mid, np.sin(psi)).ravel()
    w = np.full(py.size, 1.0 / py.size)
    return py, pz, w


def shear_factor(z, hub_height: float, exponent: float):
    """Power-law inflow profile (z / hub)^exponent; identity when exponent is 0."""
    if exponent == 0.0:
        return np.ones_like(np.asarray(z, dtype=float))
    return (np.maximum(np.asarray(z, dtype=float), 1e-6) / hub_height) ** exponent


# ---------------------------------------------------------------------------
# superposition core
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class TurbineWakeState:
    """Operating state of an already-evaluated upstream turbine (wind frame)."""

    x: float
    y: float
    gamma: float
    c_t: float
    i_rotor: float


def _impinge(x_i, y_i, pts, ups_x, ups_y, gamma_u, ct_u, ti_u, spec, ambient, params,
             shear_exp):
    """Speed and turbulence at one rotor from a set of upstream wakes.

    ``gamma_u``/``ct_u``/``ti_u`` have shape (U, B); returns ``u_rotor`` and
    ``i_rotor`` of shape (B,) plus the radicand-clamp count.
    """
    py, pz, w = pts
    sh = shear_factor(spec.hub_height + pz, spec.hub_height, shear_exp)
    n_up = len(ups_x)
    bsize = gamma_u.shape[1] if gamma_u.ndim == 2 else 1

    if n_up == 0:
        u_pts = ambient.u_inf * sh
        u_rotor = np.full(bsize, float(u_pts @ w))
        return u_rotor, np.full(bsize, ambient.i_inf), 0

    x_rel = (x_i - np.asarray(ups_x))[:, None, None]                  # (U,1,1)
    y_rel = (y_i + py)[None, None, :] - np.asarray(ups_y)[:, None, None]  # (U,1,P)
    z_rel = pz[None, None, :]

    d, sig_y, sig_z, delta, n_clamped = _wake_fields(
        x_rel, y_rel, z_rel,
        gamma_u[:, :, None], ct_u[:, :, None], spec.diameter, ti_u[:, :, None],
        params,
    )                                                                  # (U,B,P)

    combined = np.sqrt(np.sum(d * d, axis=0))                          # (B,P)
    u_pts = ambient.u_inf * (1.0 - combined) * sh
    u_rotor = u_pts @ w

    # turbine-induced turbulence, scaled by the 2-sigma wake footprint overlap,
    # keeping only the dominant upstream contributor
    a_up = 0.5 * (1.0 - np.sqrt(1.0 - ct_u))                           # (U,B)
    i_plus = (
        _CRESPO_COEFF
        * a_up**_CRESPO_A_EXP
        * ambient.i_inf**_CRESPO_TI_EXP
        * (x_rel[:, :, 0] / spec.diameter) ** _CRESPO_X_EXP
    )
    inside = (
        ((y_rel - delta) / (2.0 * sig_y)) ** 2 + (z_rel / (2.0 * sig_z)) ** 2
    ) <= 1.0
    overlap = inside @ w                                               # (U,B)
    scaled = np.max(overlap * i_plus, axis=0)                          # (B,)
    i_rotor = np.sqrt(ambient.i_inf**2 + scaled**2)
    return u_rotor, i_rotor, n_clamped


def rotor_effective_speed(i, upstream, scenario: FarmScenario, params: WakeParams) -> float:
    """Rotor-averaged wind speed at turbine ``i`` given upstream wake states."""
    u, _, _ = _rotor_conditions(i, upstream, scenario, params)
    return float(u[0])


def rotor_effective_ti(i, upstream, scenario: FarmScenario,
                       params: WakeParams | None = None) -> float:
    """Rotor turbulence intensity at turbine ``i`` given upstream wake states."""
    _, ti, _ = _rotor_conditions(i, upstream, scenario, params or WakeParams())
    return float(ti[0])


def _rotor_conditions(i, upstream, scenario, params):
    xw, yw = rotate_to_wind_frame(scenario.layout, scenario.ambient.phi)
    ups = [s for s in upstream if xw[i] - s.x > 0]

    def col(attr):
        return np.array([getattr(s, attr) for s in ups], dtype=float).reshape(-1, 1)

    return _impinge(
        xw[i], yw[i], rotor_points(scenario.turbine),
        np.array([s.x for s in ups]), np.array([s.y for s in ups]),
        col("gamma"), col("c_t"), col("i_rotor"),
        scenario.turbine, scenario.ambient, params, scenario.shear_exponent,
    )


def _evaluate_batch(scenario: FarmScenario, params: WakeParams, yaw_b, ts_b):
    """Sweep the farm once for a (B, N) batch of control vectors.

    Returns dict of (B, N) arrays plus diagnostics counters.
    """
    spec = scenario.turbine
    amb = scenario.ambient
    yaw_b = np.atleast_2d(np.asarray(yaw_b, dtype=float))
    ts_b = np.atleast_2d(np.asarray(ts_b, dtype=float))
    bsize, n = yaw_b.shape

    xw, yw = rotate_to_wind_frame(scenario.layout, amb.phi)
    order = sort_upstream(xw, yw)
    pts = rotor_points(spec)

    u_rotor = np.empty((bsize, n))
    i_rotor = np.empty((bsize, n))
    c_t = np.empty((bsize, n))
    power = np.empty((bsize, n))
    diag = {"deficit_radicand_clamped": 0, "speed_out_of_table": 0}

    done: list[int] = []
    for i in order:
        ups = [j for j in done if xw[i] - xw[j] > 0]
        u_i, ti_i, n_cl = _impinge(
            xw[i], yw[i], pts,
            xw[ups], yw[ups],
            yaw_b[:, ups].T, c_t[:, ups].T, i_rotor[:, ups].T,
            spec, amb, params, scenario.shear_exponent,
        )
        diag["deficit_radicand_clamped"] += n_cl
        u_cl, n_out = spec.clip_speed(u_i)
        diag["speed_out_of_table"] += n_out
        u_rotor[:, i] = u_i
        i_rotor[:, i] = ti_i
        c_t[:, i] = spec.c_t_at(u_cl, ts_b[:, i])
        power[:, i] = turbine_power(u_cl, spec, yaw_b[:, i], ts_b[:, i])
        done.append(i)

    return {
        "u_rotor": u_rotor, "i_rotor": i_rotor, "c_t": c_t, "power": power,
        "diagnostics": diag,
    }


def evaluate_farm(scenario: FarmScenario, params: WakeParams | None = None) -> FarmEvaluation:
    """Evaluate the whole farm for the scenario's control vector."""
    params = params or WakeParams()
    out = _evaluate_batch(
        scenario, params, scenario.controls.yaw[None, :],
        scenario.controls.thrust_scale[None, :],
    )
    return FarmEvaluation(
        u_rotor=out["u_rotor"][0], i_rotor=out["i_rotor"][0],
        c_t=out["c_t"][0], power=out["power"][0], diagnostics=out["diagnostics"],
    )


def farm_power_batch(scenario: FarmScenario, params: WakeParams, yaw_b, ts_b=None):
    """Total farm power for each row of a (B, N) yaw batch; used by optimizers."""
    if ts_b is None:
        ts_b = np.broadcast_to(
            scenario.controls.thrust_scale, np.atleast_2d(yaw_b).shape
        )
    out = _evaluate_batch(scenario, params, yaw_b, ts_b)
    return np.sum(out["power"], axis=1)


def sample_flow(scenario: FarmScenario, params: WakeParams | None = None, grid=None):
    """Wind speed at arbitrary world points (east, north, up), same superposition.

    ``grid`` is an (M, 3) array; returns an (M,) array of speeds in m/s.
    """
    params = params or WakeParams()
    grid = np.atleast_2d(np.asarray(grid, dtype=float))
    if grid.ndim != 2 or grid.shape[1] != 3 or grid.shape[0] < 1:
        raise ValueError("grid must be a non-empty (M, 3) array")
    states = evaluate_farm(scenario, params)
    amb = scenario.ambient
    spec = scenario.turbine

    xw, yw = rotate_to_wind_frame(scenario.layout, amb.phi)
    c, s = np.cos(amb.phi), np.sin(amb.phi)
    xg = grid[:, 0] * c + grid[:, 1] * s
    yg = -grid[:, 0] * s + grid[:, 1] * c
    zg = grid[:, 2]

    x_rel = xg[None, :] - xw[:, None]               # (N, M)
    y_rel = yg[None, :] - yw[:, None]
    z_rel = (zg - spec.hub_height)[None, :]

    d, _, _, _, _ = _wake_fields(
        x_rel, y_rel, z_rel,
        scenario.controls.yaw[:, None], states.c_t[:, None], spec.diameter,
        states.i_rotor[:, None], params,
    )
    combined = np.sqrt(np.sum(d * d, axis=0))
    return amb.u_inf * (1.0 - combined) * shear_factor(
        zg, spec.hub_height, scenario.shear_exponent
    )
