"""Turbine specification, performance-table interpolation and power.

The performance table maps wind speed to thrust and power coefficients.
Derating is a thrust-scaling knob: ``thrust_scale`` multiplies the table C_T
and C_P is rescaled consistently through the actuator-disk relation
C_P(a) = 4 a (1 - a)^2, normalized so a scale of 1 reproduces the table.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from importlib import resources

import numpy as np

_BETZ_LIMIT = 16.0 / 27.0


@dataclass(frozen=True, eq=False)
class TurbineSpec:
    """Rotor geometry plus the (wind speed -> C_T, C_P) performance table."""

    diameter: float                 # m
    hub_height: float               # m
    wind_speeds: np.ndarray         # m/s, sorted ascending
    c_t_table: np.ndarray
    c_p_table: np.ndarray
    yaw_power_exponent: float = 1.88
    air_density: float = 1.225      # kg/m^3
    name: str = field(default="turbine")

    def __post_init__(self):
        ws = np.asarray(self.wind_speeds, dtype=float)
        ct = np.asarray(self.c_t_table, dtype=float)
        cp = np.asarray(self.c_p_table, dtype=float)
        if not (ws.shape == ct.shape == cp.shape and ws.ndim == 1 and ws.size >= 2):
            raise ValueError("performance table needs matching 1-D wind_speed/c_t/c_p columns")
        if np.any(np.diff(ws) <= 0):
            raise ValueError("performance table must be sorted by wind speed")
        if np.any(ct <= 0) or np.any(ct >= 1):
            raise ValueError("table C_T must lie in (0, 1)")
        if np.any(cp <= 0) or np.any(cp >= _BETZ_LIMIT):
            raise ValueError("table C_P must lie in (0, 16/27)")
        if not self.yaw_power_exponent > 0:
            raise ValueError("yaw power exponent must be positive")
        if not (self.diameter > 0 and self.hub_height > 0 and self.air_density > 0):
            raise ValueError("diameter, hub height and air density must be positive")
        object.__setattr__(self, "wind_speeds", ws)
        object.__setattr__(self, "c_t_table", ct)
        object.__setattr__(self, "c_p_table", cp)

    @property
    def rotor_area(self) -> float:
        return np.pi * self.diameter**2 / 4.0

    @property
    def rotor_radius(self) -> float:
        return self.diameter / 2.0

    def clip_speed(self, u):
        """Clamp wind speed to the table range; returns (clamped, n_out_of_range)."""
        u = np.asarray(u, dtype=float)
        lo, hi = self.wind_speeds[0], self.wind_speeds[-1]
        n_out = int(np.count_nonzero((u < lo) | (u > hi)))
        return np.clip(u, lo, hi), n_out

    def c_t_at(self, u, thrust_scale=1.0):
        """Operating thrust coefficient at wind speed ``u`` (table clamped)."""
        u_cl, _ = self.clip_speed(u)
        ct = np.interp(u_cl, self.wind_speeds, self.c_t_table) * np.asarray(thrust_scale, dtype=float)
        return ct if ct.ndim else float(ct)

    def c_p_at(self, u, thrust_scale=1.0):
        """Operating power coefficient; derating rescales through C_P = 4a(1-a)^2."""
        u_cl, _ = self.clip_speed(u)
        cp0 = np.interp(u_cl, self.wind_speeds, self.c_p_table)
        ct0 = np.interp(u_cl, self.wind_speeds, self.c_t_table)
        cp = cp0 * _derating_factor(ct0, thrust_scale)
        return cp if cp.ndim else float(cp)

    @classmethod
    def from_dict(cls, doc: dict) -> "TurbineSpec":
        rows = np.asarray(doc["performance"]["rows"], dtype=float)
        return cls(
            diameter=float(doc["diameter_m"]),
            hub_height=float(doc["hub_height_m"]),
            wind_speeds=rows[:, 0],
            c_t_table=rows[:, 1],
            c_p_table=rows[:, 2],
            yaw_power_exponent=float(doc.get("yaw_power_exponent", 1.88)),
            air_density=float(doc.get("air_density_kg_m3", 1.225)),
            name=doc.get("name", "turbine"),
        )

    @classmethod
    def from_json(cls, path) -> "TurbineSpec":
        with open(path) as f:
            return cls.from_dict(json.load(f))


def nrel5mw() -> TurbineSpec:
    """The packaged NREL 5MW reference turbine (D = 126 m, hub 90 m)."""
    doc = json.loads(
        resources.files("wakesteer").joinpath("data/nrel5mw.json").read_text()
    )
    return TurbineSpec.from_dict(doc)


def _induction(c_t):
    return 0.5 * (1.0 - np.sqrt(1.0 - c_t))


def _derating_factor(ct_table, thrust_scale):
    """Ratio of actuator-disk C_P at scaled thrust to C_P at table thrust."""
    ts = np.asarray(thrust_scale, dtype=float)
    a0 = _induction(np.asarray(ct_table, dtype=float))
    a1 = _induction(ct_table * ts)
    return (a1 * (1.0 - a1) ** 2) / (a0 * (1.0 - a0) ** 2)


def turbine_power(u_rotor, spec: TurbineSpec, yaw=0.0, thrust_scale=1.0):
    """Electrical power in W: 0.5 rho A C_P u^3 cos(yaw)^p_P.

    ``C_P`` is interpolated at the (table-clamped) rotor-effective speed; the
    cubed speed uses the clamped value as well so the power never leaves the
    envelope of tabulated operation.  Even in yaw by construction.
    """
    u = np.asarray(u_rotor, dtype=float)
    if np.any(u <= 0):
        raise ValueError("rotor-effective speed must be positive")
    u_cl, _ = spec.clip_speed(u)
    cp = spec.c_p_at(u_cl, thrust_scale)
    p = (
        0.5 * spec.air_density * spec.rotor_area * cp * u_cl**3
        * np.cos(np.asarray(yaw, dtype=float)) ** spec.yaw_power_exponent
    )
    return p if np.ndim(p) else float(p)
