"""JSON scenario files.

Matrices are row-major nested lists. A complex entry is a two-element list
``[re, im]``; a plain number is read as real.

Scheme: either explicit ``xi``, ``u``, ``z`` or a directive
``"normal_luders": {"e": [...], "pointer_energies": [...]}`` that
synthesises a normal scheme for the Lüders instrument of ``e``.

Pointer instrument ``j``:
  ``"luders"``, ``"depolarising"``,
  ``{"sequential": {"channel": [K, ...]}}``,
  ``{"measure_prepare": {"targets": [omega, ...]}}``,
  ``{"kraus": [[K, ...], ...]}`` (one list per outcome).
"""
from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass
from importlib import resources
from pathlib import Path

import numpy as np

from . import linalg as la
from .errors import DimensionError, ObjectifyError, PreconditionError, ValidationError
from .instruments import (
    Instrument,
    KrausOperation,
    depolarising_objectification,
    luders_instrument,
    measure_and_prepare_instrument,
    sequential_sharp_instrument,
    validate_instrument,
)
from .observables import Povm, validate_hamiltonian, validate_povm, validate_state
from .schemes import MeasurementScheme, normal_scheme_for_luders, validate_scheme


class ScenarioError(ValidationError):
    """Parse or validation failure; ``violations`` lists every problem found."""


@dataclass(frozen=True)
class Scenario:
    name: str
    scheme: MeasurementScheme
    j: Instrument
    rho: np.ndarray
    h_s: np.ndarray
    h_a: np.ndarray
    alphas: tuple[float, ...]
    g: tuple[float, ...] | None
    seed: int | None
    digest: str
    source: str = "<memory>"

    @property
    def system_dim(self) -> int:
        return self.scheme.dim_s

    @property
    def apparatus_dim(self) -> int:
        return self.scheme.dim_a


def scenario_digest(data: dict) -> str:
    canon = json.dumps(data, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canon.encode()).hexdigest()


def _scalar(v, where):
    if isinstance(v, bool):
        raise ScenarioError(f"{where}: boolean is not a number", [(f"{where}: entry type", 1.0)])
    if isinstance(v, (int, float)):
        return complex(v)
    if isinstance(v, list) and len(v) == 2 and all(isinstance(t, (int, float)) for t in v):
        return complex(v[0], v[1])
    raise ScenarioError(f"{where}: expected a number or [re, im], got {v!r}", [(f"{where}: entry type", 1.0)])


def parse_matrix(obj, where: str = "matrix") -> np.ndarray:
    if not isinstance(obj, list) or not obj or not all(isinstance(r, list) for r in obj):
        raise ScenarioError(f"{where}: expected a nested list of rows", [(f"{where}: shape", 1.0)])
    width = len(obj[0])
    if any(len(r) != width for r in obj):
        raise ScenarioError(f"{where}: ragged rows", [(f"{where}: shape", 1.0)])
    return np.array([[_scalar(v, f"{where}[{i}][{k}]") for k, v in enumerate(r)] for i, r in enumerate(obj)])


def encode_matrix(m) -> list:
    """Inverse of :func:`parse_matrix`; real entries are written as plain numbers."""
    m = np.asarray(m)
    return [[float(v.real) if v.imag == 0 else [float(v.real), float(v.imag)] for v in row] for row in m.astype(complex)]


def _matrix_list(obj, where):
    if not isinstance(obj, list) or not obj:
        raise ScenarioError(f"{where}: expected a nonempty list of matrices", [(f"{where}: shape", 1.0)])
    return [parse_matrix(m, f"{where}[{i}]") for i, m in enumerate(obj)]


def _require(data, key):
    if key not in data:
        raise ScenarioError(f"missing field {key!r}", [(f"missing field {key}", 1.0)])
    return data[key]


def _check_shape(m, d, where, problems):
    if m.shape != (d, d):
        problems.append((f"{where}: dimension", float(abs(m.shape[0] - d) or 1)))
        return False
    return True


def _collect(report, where, problems):
    problems.extend((f"{where}: {v.name}", v.magnitude) for v in report.violations)


def _build_instrument(spec, z: Povm, outcomes, problems) -> Instrument | None:
    try:
        if spec == "luders":
            return luders_instrument(z)
        if spec == "depolarising":
            return depolarising_objectification(z)
        if isinstance(spec, dict) and len(spec) == 1:
            (kind, body), = spec.items()
            if kind == "sequential":
                phi = KrausOperation(tuple(_matrix_list(_require(body, "channel"), "j.sequential.channel")))
                return sequential_sharp_instrument(z, phi)
            if kind == "measure_prepare":
                return measure_and_prepare_instrument(z, _matrix_list(_require(body, "targets"), "j.measure_prepare.targets"))
            if kind == "kraus":
                if not isinstance(body, list):
                    raise ScenarioError("j.kraus: expected one list of Kraus operators per outcome", [("j.kraus: shape", 1.0)])
                ops = tuple(KrausOperation(tuple(_matrix_list(ks, f"j.kraus[{x}]"))) for x, ks in enumerate(body))
                return Instrument(ops, outcomes or ())
        raise ScenarioError(f"unknown instrument spec {spec!r}", [("j: kind", 1.0)])
    except PreconditionError as exc:
        problems.append((f"j: {exc}", 1.0))
    except DimensionError as exc:
        problems.append((f"j: dimension ({exc})", 1.0))
    return None


def scenario_from_dict(data: dict, source: str = "<memory>", tol: float = la.ATOL) -> Scenario:
    """Build and validate a scenario; every violation found is reported together."""
    if not isinstance(data, dict):
        raise ScenarioError("scenario must be a JSON object", [("top level type", 1.0)])
    d_s = _require(data, "system_dim")
    d_a = _require(data, "apparatus_dim")
    if not all(isinstance(d, int) and d >= 1 for d in (d_s, d_a)):
        raise ScenarioError("dimensions must be positive integers", [("dimension", 1.0)])
    outcomes = data.get("outcomes")
    problems: list[tuple[str, float]] = []

    rho = parse_matrix(_require(data, "rho"), "rho")
    if _check_shape(rho, d_s, "rho", problems):
        _collect(validate_state(rho, tol), "rho", problems)
    h_s = parse_matrix(_require(data, "h_s"), "h_s")
    if _check_shape(h_s, d_s, "h_s", problems):
        _collect(validate_hamiltonian(h_s, tol), "h_s", problems)

    scheme = None
    if "normal_luders" in data:
        nl = data["normal_luders"]
        e = Povm(tuple(_matrix_list(_require(nl, "e"), "normal_luders.e")), outcomes or ())
        if e.dim != d_s:
            problems.append(("normal_luders.e: dimension", float(abs(e.dim - d_s))))
        else:
            rep = validate_povm(e, tol)
            _collect(rep, "normal_luders.e", problems)
            if rep.ok:
                scheme = normal_scheme_for_luders(e, nl.get("pointer_energies"))
                if scheme.dim_a != d_a:
                    problems.append(("apparatus_dim: does not match the number of outcomes", float(abs(scheme.dim_a - d_a))))
                    scheme = None
    else:
        xi = parse_matrix(_require(data, "xi"), "xi")
        u = parse_matrix(_require(data, "u"), "u")
        z = Povm(tuple(_matrix_list(_require(data, "z"), "z")), outcomes or ())
        ok = _check_shape(xi, d_a, "xi", problems) & _check_shape(u, d_s * d_a, "u", problems)
        if z.dim != d_a:
            problems.append(("z: dimension", float(abs(z.dim - d_a))))
            ok = False
        if ok:
            scheme = MeasurementScheme(d_s, d_a, xi, u, z)
            _collect(validate_scheme(scheme, tol), "scheme", problems)

    if "h_a" in data:
        h_a = parse_matrix(data["h_a"], "h_a")
    elif scheme is not None and scheme.h_a is not None:
        h_a = np.array(scheme.h_a)
    else:
        raise ScenarioError("missing field 'h_a'", [("missing field h_a", 1.0)])
    if _check_shape(h_a, d_a, "h_a", problems):
        _collect(validate_hamiltonian(h_a, tol), "h_a", problems)

    j = None
    if scheme is not None:
        j = _build_instrument(data.get("j", "luders"), scheme.z, scheme.outcomes, problems)
        if j is not None:
            if j.dim != d_a:
                problems.append(("j: dimension", float(abs(j.dim - d_a))))
            else:
                _collect(validate_instrument(j, tol), "j", problems)

    alphas = data.get("alpha", [0.5])
    alphas = tuple(float(a) for a in (alphas if isinstance(alphas, list) else [alphas]))
    for a in alphas:
        if not 0.0 < a < 1.0:
            problems.append((f"alpha {a}: outside (0, 1)", abs(a - 0.5) - 0.5))
    g = data.get("g")
    g = tuple(float(t) for t in g) if g is not None else None
    seed = data.get("seed")

    if problems:
        lines = "; ".join(f"{name} (magnitude {mag:.3e})" for name, mag in problems)
        raise ScenarioError(f"{source}: invalid scenario: {lines}", problems)
    return Scenario(
        str(data.get("name", Path(source).stem)),
        scheme,
        j,
        rho,
        h_s,
        h_a,
        alphas,
        g,
        None if seed is None else int(seed),
        scenario_digest(data),
        source,
    )


def load_scenario(path, tol: float = la.ATOL) -> Scenario:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ScenarioError(f"{path}: cannot read ({exc.strerror})", [("file access", 1.0)]) from None
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ScenarioError(f"{path}: JSON parse error at line {exc.lineno}: {exc.msg}", [("parse", 1.0)]) from None
    return scenario_from_dict(data, str(path), tol)


# -- bundled scenarios ---------------------------------------------------------


def bundled_names() -> list[str]:
    root = resources.files("objectify") / "scenarios"
    return sorted(p.name[:-5] for p in root.iterdir() if p.name.endswith(".json"))


def bundled_text(name: str) -> str:
    if name not in bundled_names():
        raise ObjectifyError(f"unknown example {name!r}; available: {', '.join(bundled_names())}")
    return (resources.files("objectify") / "scenarios" / f"{name}.json").read_text()


def load_bundled(name: str, tol: float = la.ATOL) -> Scenario:
    return scenario_from_dict(json.loads(bundled_text(name)), f"{name}.json", tol)

