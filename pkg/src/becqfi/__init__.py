"""Fisher information for estimating the optomechanical coupling product
O = chi * g_ab with an impurity qubit in a cavity-BEC hybrid system."""

__version__ = "0.1.0"

from .dynamics import (
    JointElements,
    QubitDensity,
    SingularDerivativeError,
    cavity_at_tau,
    impurity_at_tau,
    joint_elements,
    log_derivative_A,
    working_point_coefficients,
)
from .loss import CriticalLoss, critical_kappa, mean_photon_at_tau
from .metrology import (
    FisherReport,
    OptimalPoint,
    cfi_error_propagation,
    cfi_plus_minus,
    fisher_report,
    precision_bounds,
    qfi_closed_form,
    qfi_eigen,
    qfi_from_state,
    qfi_ratio,
    table1_row,
)
from .params import EffectiveParams, PhysicalParams, derive_effective
from .states import InputState, ThermalMode, choose_truncation, fock_amplitudes

__all__ = [
    "CriticalLoss",
    "EffectiveParams",
    "FisherReport",
    "InputState",
    "JointElements",
    "OptimalPoint",
    "PhysicalParams",
    "QubitDensity",
    "SingularDerivativeError",
    "ThermalMode",
    "cavity_at_tau",
    "cfi_error_propagation",
    "cfi_plus_minus",
    "choose_truncation",
    "critical_kappa",
    "derive_effective",
    "fisher_report",
    "fock_amplitudes",
    "impurity_at_tau",
    "joint_elements",
    "log_derivative_A",
    "mean_photon_at_tau",
    "precision_bounds",
    "qfi_closed_form",
    "qfi_eigen",
    "qfi_from_state",
    "qfi_ratio",
    "table1_row",
    "working_point_coefficients",
]
