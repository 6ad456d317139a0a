"""Run a scenario end to end and serialise the result as JSON or CSV."""
from __future__ import annotations

import csv
import io
import json
import os
import time
from dataclasses import asdict, dataclass, field

import numpy as np

from . import linalg as la
from .errors import PreconditionError
from .info import DaimonScenario, daimon_report
from .instruments import P_THRESHOLD, is_repeatable, luders_instrument
from .observables import is_sharp
from .sampling import random_ensemble_decomposition
from .scenario import Scenario
from .schemes import (
    check_yanase,
    implementation_independence_check,
    induced_instrument,
    objectify,
    stability_probability,
)
from .thermo import (
    conditional_energetics,
    ensemble_consistency_residual,
    fixed_point_check,
    heat_variance,
    joint_hamiltonian,
    measurement_energetics,
)

DEFAULT_SEED = 0
#: waiting times are drawn from this grid when a scenario does not fix them
G_GRID = tuple(0.25 * k for k in range(1, 25))
REPORT_VERSION = 1


def resolve_seed(explicit: int | None = None, scenario_seed: int | None = None) -> int:
    """Explicit seed, else the scenario's, else ``OBJECTIFY_SEED``, else 0."""
    if explicit is not None:
        return int(explicit)
    if scenario_seed is not None:
        return int(scenario_seed)
    env = os.environ.get("OBJECTIFY_SEED")
    return int(env) if env not in (None, "") else DEFAULT_SEED


def default_waiting_times(n: int, rng: np.random.Generator) -> tuple[float, ...]:
    if n > len(G_GRID):
        return tuple(0.1 * (k + 1) for k in range(n))
    return tuple(float(G_GRID[i]) for i in rng.choice(len(G_GRID), size=n, replace=False))


@dataclass(frozen=True)
class RunReport:
    scenario: dict
    energetics: dict
    variance: list
    info: list
    checks: dict
    conditional: dict
    notes: list = field(default_factory=list)
    timing: dict | None = None

    def to_dict(self) -> dict:
        d = asdict(self)
        d["version"] = REPORT_VERSION
        if d["timing"] is None:
            del d["timing"]
        return d

    def to_json(self, indent: int | None = 2) -> str:
        return json.dumps(self.to_dict(), indent=indent, sort_keys=True)

    @classmethod
    def from_dict(cls, d: dict) -> "RunReport":
        d = dict(d)
        d.pop("version", None)
        return cls(**d)

    @classmethod
    def from_json(cls, text: str) -> "RunReport":
        return cls.from_dict(json.loads(text))

    def outcome_rows(self) -> list[dict]:
        """One flat record per outcome, merging the two energetics views."""
        cond = {r["outcome"]: r for r in self.conditional.get("outcomes", [])}
        rows = []
        for r in self.energetics["outcomes"]:
            row = dict(r)
            c = cond.get(r["outcome"])
            for key in ("delta_e_s", "delta_e", "work", "heat", "heat_apparatus"):
                row[f"cond_{key}"] = c[key] if c else ""
            rows.append(row)
        return rows

    def to_csv(self) -> str:
        rows = self.outcome_rows()
        buf = io.StringIO()
        writer = csv.DictWriter(buf, fieldnames=list(rows[0]), lineterminator="\n")
        writer.writeheader()
        writer.writerows({k: (repr(v) if isinstance(v, float) else v) for k, v in row.items()} for row in rows)
        return buf.getvalue()


def _check(ok, magnitude, **extra) -> dict:
    return {"ok": bool(ok), "magnitude": float(magnitude), **extra}


def run(
    sc: Scenario,
    alphas=None,
    seed: int | None = None,
    tol: float = la.ATOL,
    timing: bool = False,
) -> RunReport:
    """Compute every report section for a validated scenario.

    Precondition failures of the objectification step propagate as
    :class:`PreconditionError` with the scenario source prepended.
    """
    t0 = time.perf_counter()
    seed = resolve_seed(seed, sc.seed)
    rng = np.random.default_rng(seed)
    alphas = tuple(float(a) for a in (alphas or sc.alphas))
    m, j = sc.scheme, sc.j
    h = joint_hamiltonian(sc.h_s, sc.h_a)
    notes = []

    try:
        ens = objectify(m, j, sc.rho, tol)
        en = measurement_energetics(m, j, sc.h_s, sc.h_a, sc.rho, tol)
    except PreconditionError as exc:
        raise PreconditionError(f"{sc.source}: {exc}") from None

    energetics = {
        "work": en.work,
        "work_marginal": en.work_marginal,
        "mean_delta_e": en.mean_delta_e,
        "mean_heat": en.mean_heat,
        "mean_heat_apparatus": en.mean_heat_apparatus,
        "first_law_residual": en.first_law_residual,
        "outcomes": [asdict(r) for r in en.outcomes],
    }

    variance = []
    for a in alphas:
        v = heat_variance(ens, h, a)
        variance.append(
            {
                "alpha": a,
                "var_q": v.var_q,
                "var_q_formula": v.var_q_formula,
                "residual": v.residual,
                "delta_v_qu": v.delta_v_qu,
                "delta_v_cl": v.delta_v_cl,
                "per_state": [asdict(s) for s in v.per_state],
            }
        )

    if sc.g is not None:
        g = sc.g
    else:
        g = default_waiting_times(len(m.outcomes), rng)
        notes.append("waiting times drawn from the seeded grid")
    info = []
    try:
        daimon = DaimonScenario(ens, g, h)
        for a in alphas:
            info.append({"g": list(g), **asdict(daimon_report(daimon, a))})
    except PreconditionError as exc:
        notes.append(f"information transfer skipped: {exc}")

    yan = check_yanase(m.z, sc.h_a, tol)
    rep = is_repeatable(j, tol)
    fp = fixed_point_check(j, sc.h_a, tol)
    ind = implementation_independence_check(m, j, luders_instrument(m.z), sc.rho, tol)
    stability = {}
    for k, x in enumerate(m.outcomes):
        if ens.probs[k] > P_THRESHOLD:
            stability[x] = stability_probability(m, j, sc.rho, x, sc.h_a, g[k], tol)
    checks = {
        "yanase": _check(yan.ok, yan.max_commutator_norm),
        "repeatable": _check(rep.ok, rep.max_violation),
        "fixed_point": _check(fp.ok, fp.deviation),
        "independence_vs_luders": _check(ind.ok, ind.max_deviation),
        "pointer_sharp": bool(is_sharp(m.z, tol)),
        "stability": {"g": list(g), "probability": stability},
    }

    if checks["pointer_sharp"] and yan.ok:
        rows = conditional_energetics(m, j, sc.h_s, sc.h_a, sc.rho, tol)
        probs = np.array([r.p for r in rows])
        weights, members = random_ensemble_decomposition(sc.rho, 2, rng)
        conditional = {
            "outcomes": [asdict(r) for r in rows],
            "mean_work": float(probs @ np.array([r.work for r in rows])),
            "mean_heat": float(probs @ np.array([r.heat for r in rows])),
            "ensemble_consistency_residual": ensemble_consistency_residual(
                induced_instrument(m), sc.h_s, sc.rho, weights, members
            ),
        }
    else:
        conditional = {"skipped": "needs a sharp pointer obeying the Yanase condition"}

    t1 = time.perf_counter()
    return RunReport(
        {"name": sc.name, "digest": sc.digest, "seed": seed, "alphas": list(alphas), "outcomes": list(m.outcomes)},
        energetics,
        variance,
        info,
        checks,
        conditional,
        notes,
        {"seconds": t1 - t0} if timing else None,
    )
