"""Scenario and parameter files: versioned JSON documents.

A scenario file bundles the turbine (by packaged name or inline), the layout,
ambient conditions and an optional control vector.  Angles in files are
degrees for readability; the in-memory objects use radians.  All turbines in
a farm share one spec.
"""

from __future__ import annotations

import json
from importlib import resources

import numpy as np

from .farm import AmbientConditions, ControlVector, FarmLayout, FarmScenario
from .turbine import TurbineSpec, nrel5mw
from .wake import WakeParams

SCHEMA_VERSION = 1

_PACKAGED_TURBINES = {"nrel5mw": nrel5mw}


def _check_schema(doc: dict, kind: str) -> None:
    version = doc.get("schema_version")
    if version != SCHEMA_VERSION:
        raise ValueError(f"{kind} file schema_version {version!r} != {SCHEMA_VERSION}")


def scenario_from_dict(doc: dict) -> FarmScenario:
    _check_schema(doc, "scenario")
    turbine = doc["turbine"]
    if isinstance(turbine, str):
        try:
            spec = _PACKAGED_TURBINES[turbine]()
        except KeyError:
            raise ValueError(f"unknown packaged turbine {turbine!r}") from None
    else:
        spec = TurbineSpec.from_dict(turbine)

    layout = FarmLayout(np.asarray(doc["layout"]["positions"], dtype=float))
    amb = doc["ambient"]
    ambient = AmbientConditions(
        phi=np.radians(float(amb["phi_deg"])),
        i_inf=float(amb["i_inf"]),
        u_inf=float(amb["u_inf"]),
    )
    ctrl_doc = doc.get("controls")
    if ctrl_doc is None:
        controls = ControlVector.greedy(layout.n_turbines)
    else:
        controls = ControlVector(
            yaw=np.radians(np.asarray(ctrl_doc["yaw_deg"], dtype=float)),
            thrust_scale=(
                np.asarray(ctrl_doc["thrust_scale"], dtype=float)
                if "thrust_scale" in ctrl_doc
                else None
            ),
        )
    weights = doc.get("estimator_weights")
    yaw_limit = doc.get("yaw_limit_deg")
    return FarmScenario(
        turbine=spec,
        layout=layout,
        ambient=ambient,
        controls=controls,
        shear_exponent=float(doc.get("shear_exponent", 0.0)),
        estimator_weights=tuple(weights) if weights is not None else None,
        yaw_limit=np.radians(float(yaw_limit)) if yaw_limit is not None else None,
    )


def load_scenario(path) -> FarmScenario:
    with open(path) as f:
        return scenario_from_dict(json.load(f))


def packaged_scenario(name: str) -> FarmScenario:
    """Load a scenario shipped with the package (e.g. 'benchmark_3x3')."""
    text = resources.files("wakesteer").joinpath(f"data/{name}.json").read_text()
    return scenario_from_dict(json.loads(text))


def turbine_to_dict(spec: TurbineSpec) -> dict:
    rows = [
        [float(u), float(ct), float(cp)]
        for u, ct, cp in zip(spec.wind_speeds, spec.c_t_table, spec.c_p_table)
    ]
    return {
        "name": spec.name,
        "diameter_m": spec.diameter,
        "hub_height_m": spec.hub_height,
        "air_density_kg_m3": spec.air_density,
        "yaw_power_exponent": spec.yaw_power_exponent,
        "performance": {"columns": ["wind_speed_ms", "c_t", "c_p"], "rows": rows},
    }


def scenario_to_dict(sc: FarmScenario) -> dict:
    doc = {
        "schema_version": SCHEMA_VERSION,
        "turbine": "nrel5mw" if sc.turbine.name == "NREL-5MW" else turbine_to_dict(sc.turbine),
        "layout": {"positions": sc.layout.positions.tolist()},
        "ambient": {
            "phi_deg": float(np.degrees(sc.ambient.phi)),
            "i_inf": sc.ambient.i_inf,
            "u_inf": sc.ambient.u_inf,
        },
        "controls": {
            "yaw_deg": np.degrees(sc.controls.yaw).tolist(),
            "thrust_scale": sc.controls.thrust_scale.tolist(),
        },
    }
    if sc.shear_exponent:
        doc["shear_exponent"] = sc.shear_exponent
    if sc.estimator_weights is not None:
        doc["estimator_weights"] = list(sc.estimator_weights)
    if sc.yaw_limit is not None:
        doc["yaw_limit_deg"] = float(np.degrees(sc.yaw_limit))
    return doc


def save_scenario(sc: FarmScenario, path) -> None:
    with open(path, "w") as f:
        json.dump(scenario_to_dict(sc), f, indent=2)
        f.write("\n")


def load_params(path) -> WakeParams:
    with open(path) as f:
        doc = json.load(f)
    _check_schema(doc, "params")
    return WakeParams(**{k: float(doc[k]) for k in WakeParams.field_names()})


def save_params(params: WakeParams, path) -> None:
    doc = {"schema_version": SCHEMA_VERSION}
    doc.update({k: getattr(params, k) for k in WakeParams.field_names()})
    with open(path, "w") as f:
        json.dump(doc, f, indent=2)
        f.write("\n")
