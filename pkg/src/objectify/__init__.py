"""Energetics of quantum measurement: work from premeasurement, heat from
objectification, and the classical/quantum split of heat fluctuations."""
from .errors import DimensionError, ObjectifyError, PreconditionError, ValidationError
from .info import DaimonScenario, InfoReport, block_skew_identity_check, daimon_report, holevo_information, von_neumann_entropy
from .instruments import (
    Instrument,
    KrausOperation,
    depolarising_objectification,
    is_repeatable,
    luders_instrument,
    measure_and_prepare_instrument,
    sequential_sharp_instrument,
)
from .observables import Povm, admits_objectification, born_probabilities, sharp_basis_povm
from .report import RunReport, run
from .scenario import Scenario, load_scenario
from .schemes import (
    MeasurementScheme,
    ObjectificationEnsemble,
    check_yanase,
    implementation_independence_check,
    induced_instrument,
    normal_scheme_for_luders,
    objectify,
    premeasure,
)
from .suite import run_suite
from .thermo import (
    conditional_energetics,
    fixed_point_check,
    heat_variance,
    measurement_energetics,
    skew_information,
    variance_decomposition,
)

__version__ = "0.1.0"

__all__ = [
    "DaimonScenario",
    "DimensionError",
    "InfoReport",
    "Instrument",
    "KrausOperation",
    "MeasurementScheme",
    "ObjectificationEnsemble",
    "ObjectifyError",
    "Povm",
    "PreconditionError",
    "RunReport",
    "Scenario",
    "ValidationError",
    "admits_objectification",
    "block_skew_identity_check",
    "born_probabilities",
    "check_yanase",
    "conditional_energetics",
    "daimon_report",
    "depolarising_objectification",
    "fixed_point_check",
    "heat_variance",
    "holevo_information",
    "implementation_independence_check",
    "induced_instrument",
    "is_repeatable",
    "load_scenario",
    "luders_instrument",
    "measure_and_prepare_instrument",
    "measurement_energetics",
    "normal_scheme_for_luders",
    "objectify",
    "premeasure",
    "run",
    "run_suite",
    "sequential_sharp_instrument",
    "sharp_basis_povm",
    "skew_information",
    "variance_decomposition",
    "von_neumann_entropy",
]
