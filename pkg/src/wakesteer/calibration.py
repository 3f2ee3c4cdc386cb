"""Offline fit of the six wake parameters to flow-slice measurements.

A calibration case pairs one scenario (known ambient and controls) with
measured speeds on a point grid; the cost is the root-mean-squared error
between measured and modelled speeds over all points of all cases.  The fit
is a bounded global search by differential evolution.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import differential_evolution

from .farm import FarmScenario, sample_flow
from .scenario import SCHEMA_VERSION, scenario_from_dict
from .wake import WakeParams

# parameter box used for calibration and for bounding plant perturbations:
# alpha, beta, k_a, k_b, a_d, b_d
DEFAULT_LOWER = (0.580, 0.0385, 0.0959, 9.25e-4, -1.0, -4.0e-2)
DEFAULT_UPPER = (9.28, 0.616, 1.53, 1.48e-2, 1.0, -2.5e-3)


@dataclass(frozen=True, eq=False)
class ParamBounds:
    """Componentwise box for the wake-parameter search."""

    lower: np.ndarray
    upper: np.ndarray

    def __post_init__(self):
        lo = np.asarray(self.lower, dtype=float)
        hi = np.asarray(self.upper, dtype=float)
        if lo.shape != (6,) or hi.shape != (6,):
            raise ValueError("bounds need one (lower, upper) pair per parameter")
        if np.any(lo >= hi):
            raise ValueError("lower bounds must be strictly below upper bounds")
        object.__setattr__(self, "lower", lo)
        object.__setattr__(self, "upper", hi)

    @classmethod
    def default(cls) -> "ParamBounds":
        return cls(np.array(DEFAULT_LOWER), np.array(DEFAULT_UPPER))

    def contains(self, params: WakeParams) -> bool:
        v = params.as_array()
        return bool(np.all(v >= self.lower) and np.all(v <= self.upper))

    def clip(self, values) -> np.ndarray:
        return np.clip(np.asarray(values, dtype=float), self.lower, self.upper)

    @classmethod
    def from_json(cls, path) -> "ParamBounds":
        with open(path) as f:
            doc = json.load(f)
        if doc.get("schema_version") != SCHEMA_VERSION:
            raise ValueError("bounds file has unknown schema_version")
        names = WakeParams.field_names()
        return cls(
            np.array([doc["lower"][k] for k in names]),
            np.array([doc["upper"][k] for k in names]),
        )


@dataclass(frozen=True, eq=False)
class SliceGrid:
    """Rectangular sampling grid for one downstream slice."""

    ny: int = 13
    nz: int = 5
    y_half_width: float = 189.0   # m, crosswind extent each side of the axis
    z_half_height: float = 63.0   # m, vertical extent each side of hub height

    def __post_init__(self):
        if self.ny < 2 or self.nz < 1:
            raise ValueError("grid needs ny >= 2 and nz >= 1")


@dataclass(frozen=True, eq=False)
class CalibrationCase:
    """One scenario plus measured speeds on its slice points."""

    scenario: FarmScenario
    points: np.ndarray        # (M, 3) world coordinates
    u_measured: np.ndarray    # (M,) m/s

    def __post_init__(self):
        pts = np.asarray(self.points, dtype=float)
        u = np.asarray(self.u_measured, dtype=float)
        if pts.ndim != 2 or pts.shape[1] != 3 or pts.shape[0] != u.size:
            raise ValueError("points must be (M, 3) matching M measured speeds")
        if np.any(u <= 0):
            raise ValueError("measured speeds must be positive")
        object.__setattr__(self, "points", pts)
        object.__setattr__(self, "u_measured", u)


def extract_slices(scenario: FarmScenario, distances, grid: SliceGrid | None = None,
                   source: int = 0) -> np.ndarray:
    """World-coordinate sample points on crosswind slices behind one turbine.

    ``distances`` are downstream offsets in rotor diameters; the grid is
    centered on the source turbine's wind-frame axis at hub height.
    """
    grid = grid or SliceGrid()
    distances = np.asarray(distances, dtype=float)
    if np.any(distances <= 0):
        raise ValueError("slice distances must be positive")
    spec = scenario.turbine
    phi = scenario.ambient.phi
    from .farm import rotate_to_wind_frame

    xw, yw = rotate_to_wind_frame(scenario.layout, phi)
    y_off = np.linspace(-grid.y_half_width, grid.y_half_width, grid.ny)
    z_abs = spec.hub_height + np.linspace(-grid.z_half_height, grid.z_half_height, grid.nz)

    c, s = np.cos(phi), np.sin(phi)
    points = []
    for d in distances:
        x_slice = xw[source] + d * spec.diameter
        for y in yw[source] + y_off:
            # wind frame -> world is the inverse rigid rotation
            east = x_slice * c - y * s
            north = x_slice * s + y * c
            for z in z_abs:
                points.append((east, north, z))
    return np.asarray(points)


def calibration_cost(psi, cases, params_cls=WakeParams, flags: dict | None = None) -> float:
    """RMSE between measured and modelled speeds over all points of all cases."""
    if not cases:
        raise ValueError("need at least one calibration case")
    try:
        params = psi if isinstance(psi, WakeParams) else params_cls.from_array(psi)
    except ValueError:
        if flags is not None:
            flags["infeasible"] = flags.get("infeasible", 0) + 1
        return np.inf
    sq_sum = 0.0
    n = 0
    for case in cases:
        try:
            u_model = sample_flow(case.scenario, params, case.points)
        except ValueError:
            if flags is not None:
                flags["infeasible"] = flags.get("infeasible", 0) + 1
            return np.inf
        resid = case.u_measured - u_model
        sq_sum += float(resid @ resid)
        n += resid.size
    return np.sqrt(sq_sum / n)


@dataclass(frozen=True, eq=False)
class CalibrationResult:
    psi: WakeParams
    cost: float
    trace: np.ndarray          # best cost after each generation
    n_evaluations: int
    generations: int
    seed: int
    converged: bool
    flags: dict = field(default_factory=dict)

    def to_json(self, path) -> None:
        doc = {
            "schema_version": SCHEMA_VERSION,
            "psi": {k: getattr(self.psi, k) for k in WakeParams.field_names()},
            "cost": self.cost,
            "generations": self.generations,
            "n_evaluations": self.n_evaluations,
            "seed": self.seed,
            "converged": self.converged,
        }
        with open(path, "w") as f:
            json.dump(doc, f, indent=2)
            f.write("\n")


def calibrate(cases, bounds: ParamBounds | None = None, budget: int = 5000,
              seed: int = 0) -> CalibrationResult:
    """Bounded global fit by differential evolution (rand/1/bin).

    Population 15 x dim, F = 0.7, CR = 0.9; the evaluation budget caps the
    generation count.  Deterministic for a fixed seed.
    """
    bounds = bounds or ParamBounds.default()
    flags: dict = {}
    pop = 15 * 6
    maxiter = max(1, budget // pop - 1)

    state = {"n": 0, "best": np.inf, "trace": []}

    def cost(x):
        state["n"] += 1
        c = calibration_cost(x, cases, flags=flags)
        if c < state["best"]:
            state["best"] = c
        return c

    def record_generation(xk, convergence=None):
        state["trace"].append(state["best"])

    result = differential_evolution(
        cost,
        list(zip(bounds.lower, bounds.upper)),
        strategy="rand1bin",
        popsize=15,
        mutation=0.7,
        recombination=0.9,
        seed=seed,
        maxiter=maxiter,
        polish=False,
        init="latinhypercube",
        callback=record_generation,
    )
    psi = WakeParams.from_array(bounds.clip(result.x))
    return CalibrationResult(
        psi=psi,
        cost=float(result.fun),
        trace=np.asarray(state["trace"]),
        n_evaluations=state["n"],
        generations=len(state["trace"]),
        seed=seed,
        converged=bool(result.success),
        flags=flags,
    )


def synthetic_dataset(base: FarmScenario, psi_true: WakeParams, distances=(3, 5, 7, 10),
                      grid: SliceGrid | None = None,
                      yaw_sweep_deg=(-30, -20, -10, 0, 10, 20, 30),
                      derate_sweep=(0.9, 0.75),
                      ti_levels=(0.06, 0.12),
                      noise_std: float = 0.0, seed: int = 0) -> list[CalibrationCase]:
    """Single-turbine slice measurements generated by the model at ``psi_true``.

    One case per (inflow TI, yaw) plus an unyawed derating sweep, each sliced
    at the given downstream distances; optional additive Gaussian speed noise.
    """
    if base.n_turbines != 1:
        raise ValueError("calibration dataset uses single-turbine scenarios")
    grid = grid or SliceGrid()
    rng = np.random.default_rng(seed)
    cases = []
    settings: list[tuple[float, float, float]] = []
    for ti in ti_levels:
        settings += [(ti, gamma, 1.0) for gamma in yaw_sweep_deg]
        settings += [(ti, 0.0, ts) for ts in derate_sweep]
    for ti, gamma_deg, ts in settings:
        sc = base.with_ambient(i_inf=ti).with_controls(
            yaw=np.radians([gamma_deg]), thrust_scale=np.array([ts])
        )
        pts = extract_slices(sc, distances, grid)
        u = sample_flow(sc, psi_true, pts)
        if noise_std > 0:
            u = u + rng.normal(0.0, noise_std, size=u.shape)
        cases.append(CalibrationCase(sc, pts, np.maximum(u, 1e-3)))
    return cases


# ---------------------------------------------------------------------------
# dataset files: a points CSV (case_id, x, y, z, u) plus a cases JSON mapping
# case_id -> scenario document
# ---------------------------------------------------------------------------

def save_dataset(cases, csv_path, cases_path) -> None:
    from .scenario import scenario_to_dict

    with open(csv_path, "w") as f:
        f.write("case_id,x,y,z,u\n")
        for cid, case in enumerate(cases):
            for (x, y, z), u in zip(case.points, case.u_measured):
                f.write(f"{cid},{x:.6f},{y:.6f},{z:.6f},{u:.6f}\n")
    doc = {
        "schema_version": SCHEMA_VERSION,
        "cases": {str(cid): scenario_to_dict(c.scenario) for cid, c in enumerate(cases)},
    }
    with open(cases_path, "w") as f:
        json.dump(doc, f, indent=2)
        f.write("\n")


def load_dataset(csv_path, cases_path) -> list[CalibrationCase]:
    with open(cases_path) as f:
        doc = json.load(f)
    if doc.get("schema_version") != SCHEMA_VERSION:
        raise ValueError("cases file has unknown schema_version")
    scenarios = {int(k): scenario_from_dict(v) for k, v in doc["cases"].items()}

    rows = np.loadtxt(csv_path, delimiter=",", skiprows=1, ndmin=2)
    cases = []
    for cid in sorted(scenarios):
        sel = rows[:, 0].astype(int) == cid
        if not np.any(sel):
            raise ValueError(f"dataset has no points for case {cid}")
        cases.append(
            CalibrationCase(scenarios[cid], rows[sel, 1:4], rows[sel, 4])
        )
    return cases
