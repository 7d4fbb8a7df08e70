"""Scenario-driven command line interface.

``maslov run <scenario>`` executes one scenario document (a JSON file path or
an inline JSON object) and prints a report; ``maslov list`` prints the
builtin catalog; ``maslov tables`` prints homotopy groups of the spaces of
linear structures.  Exit codes: 0 for a certified result, 2 for an
uncertified numerical result, 1 for an error.
"""

import argparse
import json
import sys
import time
from dataclasses import dataclass, field

import numpy as np

from . import __version__
from ._params import DEFAULT_DEGREE_BUDGET, DEFAULT_SEED, tolerances_dict
from .exceptions import MaslovError, ScenarioFormatError, UnknownBuiltinError
from .families import (
    build_contact_family,
    build_model,
    build_sphere_map,
    build_transformation_family,
    list_builtins,
)
from .degree import certified_degree
from .homogeneous import EvaluationDatum, epsilon_index, stable_group
from .models import frame_policy
from .pipelines import coordinate_cycle, flux, index_a, index_b

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_UNCERTIFIED = 2

_REQUEST_KINDS = ("index_A", "index_B", "epsilon", "flux", "degree", "tables")


@dataclass
class Scenario:
    """A normalized scenario document; round-trips losslessly through JSON."""

    request: dict
    model: dict = field(default_factory=dict)
    family: dict = field(default_factory=dict)
    budget: int = DEFAULT_DEGREE_BUDGET
    seed: int = DEFAULT_SEED

    def to_dict(self):
        return {
            "model": self.model,
            "family": self.family,
            "request": self.request,
            "budget": self.budget,
            "seed": self.seed,
        }

    @classmethod
    def from_dict(cls, doc):
        if not isinstance(doc, dict):
            raise ScenarioFormatError("scenario document must be a JSON object")
        request = doc.get("request")
        if not isinstance(request, dict) or "kind" not in request:
            raise ScenarioFormatError("scenario needs a request object with a 'kind'")
        if request["kind"] not in _REQUEST_KINDS:
            raise ScenarioFormatError(
                f"unknown request kind '{request['kind']}' (one of {_REQUEST_KINDS})")
        model = doc.get("model") or {}
        family = doc.get("family") or {}
        for part, label in ((model, "model"), (family, "family")):
            if part and "id" not in part:
                raise ScenarioFormatError(f"{label} needs an 'id' field")
        return cls(
            request=dict(request),
            model=dict(model),
            family=dict(family),
            budget=int(doc.get("budget", DEFAULT_DEGREE_BUDGET)),
            seed=int(doc.get("seed", DEFAULT_SEED)),
        )


@dataclass
class Report:
    scenario: dict
    result: dict
    certificates: dict
    certified: bool
    wall_clock_s: float
    version: str = __version__
    error: dict = None

    def to_dict(self):
        out = {
            "scenario": self.scenario,
            "result": self.result,
            "certificates": self.certificates,
            "certified": self.certified,
            "wall_clock_s": self.wall_clock_s,
            "version": self.version,
        }
        if self.error is not None:
            out["error"] = self.error
        return out

    def to_json(self):
        return json.dumps(self.to_dict(), sort_keys=True, indent=2)


def parse_scenario(source):
    """Load a scenario from a file path, inline JSON text, or a dict."""
    if isinstance(source, dict):
        return Scenario.from_dict(source)
    text = source
    if not source.lstrip().startswith("{"):
        try:
            with open(source, "r", encoding="utf-8") as fh:
                text = fh.read()
        except OSError as exc:
            raise ScenarioFormatError(f"cannot read scenario file: {exc}") from exc
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ScenarioFormatError(
            f"malformed scenario document at line {exc.lineno}, column {exc.colno}: "
            f"{exc.msg}") from exc
    return Scenario.from_dict(doc)


def _index_report(scenario, jobs):
    req = scenario.request
    kind = req["kind"]
    k = int(req.get("k", 1))
    model = build_model(scenario.model.get("id"), scenario.model.get("params"))
    family = build_transformation_family(
        scenario.family.get("id"), scenario.family.get("params"), model)
    if kind == "index_A":
        frame = req.get("frame") or {}
        policy = frame_policy(frame.get("policy", "ambient"),
                              **{kk: vv for kk, vv in frame.items() if kk != "policy"})
        rep = index_a(model, family, k, policy, budget=scenario.budget,
                      seed=scenario.seed, jobs=jobs)
    else:
        basepoint = req.get("basepoint")
        p = None if basepoint is None else np.asarray(basepoint, dtype=float)
        rep = index_b(model, family, k, p=p, budget=scenario.budget,
                      seed=scenario.seed, jobs=jobs)
    result = {"value": rep.value, "modulus": rep.modulus,
              "index_type": rep.index_type}
    certs = {"degree": rep.degree_result.to_dict(), "trace": rep.trace.to_dict(),
             "tolerances": rep.tolerances}
    return result, certs, rep.degree_result.certified


def _epsilon_report(scenario, jobs):
    family = build_contact_family(scenario.family.get("id"),
                                  scenario.family.get("params"))
    req = scenario.request
    datum = None
    if "datum" in req and req["datum"]:
        datum = EvaluationDatum(np.asarray(req["datum"]["point"], float),
                                np.asarray(req["datum"]["frame"], float))
    value, dres = epsilon_index(family, datum, budget=scenario.budget,
                                seed=scenario.seed, jobs=jobs)
    result = {"value": value}
    certs = {"degree": dres.to_dict(), "tolerances": tolerances_dict()}
    return result, certs, dres.certified


def _flux_report(scenario, jobs):
    model = build_model(scenario.model.get("id", "torus"),
                        scenario.model.get("params"))
    family = build_transformation_family(
        scenario.family.get("id"), scenario.family.get("params"), model)
    req = scenario.request
    cyc = req.get("cycle") or {}
    cycle = coordinate_cycle(model.dimension, int(cyc.get("axis", 1)),
                             int(cyc.get("turns", 1)))
    omega = req.get("omega")
    res = flux(family, cycle, omega=None if omega is None else np.asarray(omega, float))
    tol = float(req.get("tolerance", 1e-6))
    result = {"value": res.value, "error_estimate": res.error_estimate}
    certs = {"tolerances": {**tolerances_dict(), "flux_tolerance": tol}}
    return result, certs, res.error_estimate <= tol


def _degree_report(scenario, jobs):
    f = build_sphere_map(scenario.family.get("id"), scenario.family.get("params"))
    dres = certified_degree(f, budget=scenario.budget, seed=scenario.seed, jobs=jobs)
    return ({"value": dres.degree}, {"degree": dres.to_dict(),
            "tolerances": tolerances_dict()}, dres.certified)


def _tables_report(scenario, jobs):
    req = scenario.request
    desc = stable_group(int(req["k"]), int(req["dim"]))
    return desc.to_dict(), {}, True


def run_scenario(source, jobs=1):
    """Execute a scenario (path, inline JSON, or dict) and return a Report."""
    start = time.perf_counter()
    scenario = parse_scenario(source)
    handlers = {
        "index_A": _index_report,
        "index_B": _index_report,
        "epsilon": _epsilon_report,
        "flux": _flux_report,
        "degree": _degree_report,
        "tables": _tables_report,
    }
    try:
        result, certs, certified = handlers[scenario.request["kind"]](scenario, jobs)
        error = None
    except MaslovError as exc:
        result, certs, certified = {}, {}, False
        error = {"type": type(exc).__name__, "message": str(exc)}
    return Report(
        scenario=scenario.to_dict(),
        result=result,
        certificates=certs,
        certified=certified,
        wall_clock_s=round(time.perf_counter() - start, 6),
        error=error,
    )


def _emit(text, out_path):
    if out_path:
        with open(out_path, "w", encoding="utf-8") as fh:
            fh.write(text + "\n")
    else:
        print(text)


def main(argv=None):
    parser = argparse.ArgumentParser(
        prog="maslov",
        description="Numerical Maslov-type and homogeneous indices on model manifolds",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    run_p = sub.add_parser("run", help="run a scenario document")
    run_p.add_argument("scenario", help="path to a JSON scenario or inline JSON")
    run_p.add_argument("--seed", type=int, default=None)
    run_p.add_argument("--budget", type=int, default=None)
    run_p.add_argument("--jobs", type=int, default=1)
    run_p.add_argument("--out", default=None)

    list_p = sub.add_parser("list", help="print the builtin catalog")
    list_p.add_argument("--out", default=None)

    tab_p = sub.add_parser("tables", help="homotopy groups of linear-structure spaces")
    tab_p.add_argument("--k", type=int, required=True)
    tab_p.add_argument("--dim", type=int, required=True)
    tab_p.add_argument("--out", default=None)

    args = parser.parse_args(argv)

    if args.command == "list":
        _emit(json.dumps({"builtins": list_builtins()}, sort_keys=True, indent=2),
              args.out)
        return EXIT_OK

    if args.command == "tables":
        try:
            desc = stable_group(args.k, args.dim)
        except MaslovError as exc:
            _emit(json.dumps({"error": str(exc)}), args.out)
            return EXIT_ERROR
        _emit(json.dumps(desc.to_dict(), sort_keys=True, indent=2), args.out)
        return EXIT_OK

    try:
        scenario = parse_scenario(args.scenario)
        if args.seed is not None:
            scenario.seed = args.seed
        if args.budget is not None:
            scenario.budget = args.budget
        report = run_scenario(scenario.to_dict(), jobs=args.jobs)
    except (ScenarioFormatError, UnknownBuiltinError, MaslovError) as exc:
        _emit(json.dumps({"error": {"type": type(exc).__name__,
                                    "message": str(exc)}}, sort_keys=True), args.out)
        return EXIT_ERROR

    _emit(report.to_json(), args.out)
    if report.error is not None:
        return EXIT_ERROR
    return EXIT_OK if report.certified else EXIT_UNCERTIFIED


if __name__ == "__main__":
    sys.exit(main())
