"""Physical constants of the cavity-BEC-impurity setup and the dimensionless
working parameters of the effective Hamiltonian.

Only the final algebraic relations of the dispersive (large-detuning) model
are evaluated here; nothing is re-derived.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, fields, replace
from typing import Optional

HBAR = 1.054571817e-34  # J s
K_B = 1.380649e-23  # J / K

# |detuning| / coupling below which the dispersive model is flagged
DISPERSIVE_RATIO = 10.0


class DispersiveWarning(UserWarning):
    """The large-detuning assumption behind the effective model is violated."""


@dataclass(frozen=True)
class PhysicalParams:
    """Experimental constants in SI units.

    The impurity-cavity coupling is given either directly as ``g_ac`` or via
    the peak coupling ``g_0``; in the latter case it is averaged over the
    Gaussian impurity density, g_ac = g_0 exp(-ell^2 k^2 / 4). Exactly one of
    ``T`` (kelvin) and ``beta_omega_m`` should be supplied.
    """

    N: float
    g: float
    delta_ac: float
    delta: float
    a_AB: float
    m: float
    m_A: float
    ell: float
    ell_A_perp: float
    ell_B_perp: float
    k: float
    L: float
    omega_rec: float
    g_ac: Optional[float] = None
    g_0: Optional[float] = None
    kappa: float = 0.0
    gamma: float = 0.0
    T: Optional[float] = None
    beta_omega_m: Optional[float] = None

    def __post_init__(self):
        if self.N < 1:
            raise ValueError("N must be >= 1")
        for name in ("g", "m", "m_A", "ell", "ell_A_perp", "ell_B_perp", "k", "L", "omega_rec"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be > 0")
        if self.kappa < 0 or self.gamma < 0:
            raise ValueError("kappa and gamma must be >= 0")
        if (self.g_ac is None) == (self.g_0 is None):
            raise ValueError("supply exactly one of g_ac and g_0")
        if (self.T is None) == (self.beta_omega_m is None):
            raise ValueError("supply exactly one of T and beta_omega_m")

    @property
    def coupling_ac(self) -> float:
        if self.g_ac is not None:
            return self.g_ac
        return impurity_cavity_coupling(self.g_0, self.ell, self.k)


def impurity_cavity_coupling(g_0: float, ell: float, k: float) -> float:
    """g_0 * integral |phi(x)|^2 cos(kx) dx for the Gaussian ground state of width ell."""
    return g_0 * math.exp(-0.25 * (ell * k) ** 2)


@dataclass(frozen=True)
class EffectiveParams:
    """Dimensionless parameters, every rate divided by omega_m.

    ``chi`` and ``g_ab`` are the optomechanical and impurity-BEC couplings;
    the estimand is their product ``O``. ``omega_m`` (rad/s) is carried only
    for bookkeeping and is 1.0 when the set is built directly.
    """

    chi: float = 1.0
    g_ab: float = 0.0
    G: float = 0.0
    Omega_c: float = 0.0
    Omega_A: float = 0.0
    kappa: float = 0.0
    gamma: float = 0.0
    beta_omega_m: float = 1.0
    omega_m: float = 1.0

    def __post_init__(self):
        if self.kappa < 0 or self.gamma < 0:
            raise ValueError("kappa and gamma must be >= 0")
        if not self.beta_omega_m > 0:
            raise ValueError("beta_omega_m must be > 0")

    @property
    def O(self) -> float:
        return self.chi * self.g_ab

    @classmethod
    def from_estimand(cls, O: float, chi: float = 1.0, **kw) -> "EffectiveParams":
        """Realise the estimand as chi * g_ab with ``chi`` held fixed."""
        if chi == 0:
            raise ValueError("chi must be nonzero to carry a nonzero estimand")
        return cls(chi=chi, g_ab=O / chi, **kw)

    def with_estimand(self, O: float) -> "EffectiveParams":
        return replace(self, g_ab=O / self.chi)


@dataclass(frozen=True)
class DimensionalRates:
    """Intermediate rates (rad/s) of the effective Hamiltonian before rescaling."""

    omega_m: float
    U_0: float
    delta_ac: float
    delta_ab: float
    G: float
    chi: float
    g_ab: float
    Omega_c: float
    Omega_A: float
    kappa: float
    gamma: float


def dimensional_rates(p: PhysicalParams) -> DimensionalRates:
    if p.delta_ac == 0 or p.delta == 0:
        raise ZeroDivisionError("zero detuning: the dispersive limit is undefined")
    g_ac = p.coupling_ac
    if abs(p.delta_ac) < DISPERSIVE_RATIO * p.g:
        warnings.warn(f"|delta_ac| = {abs(p.delta_ac):.3g} is not >> g = {p.g:.3g}", DispersiveWarning, stacklevel=3)
    if abs(p.delta) < DISPERSIVE_RATIO * abs(g_ac):
        warnings.warn(f"|delta| = {abs(p.delta):.3g} is not >> g_ac = {abs(g_ac):.3g}", DispersiveWarning, stacklevel=3)

    omega_m = 4.0 * p.omega_rec
    U_0 = -p.g**2 / p.delta_ac
    d_ac = g_ac**2 / p.delta
    m_AB = p.m_A * p.m / (p.m_A + p.m)
    transverse = m_AB * (p.ell_A_perp**2 + p.ell_B_perp**2) * p.L
    d_ab = 4.0 * p.N * HBAR * p.a_AB / transverse
    g_ab = 4.0 * math.sqrt(2.0 * p.N) * HBAR * p.a_AB * math.exp(-(p.ell * p.k) ** 2) / transverse
    return DimensionalRates(
        omega_m=omega_m,
        U_0=U_0,
        delta_ac=d_ac,
        delta_ab=d_ab,
        G=4.0 * d_ac,
        chi=U_0 * math.sqrt(p.N / 8.0),
        g_ab=g_ab,
        Omega_c=U_0 * p.N / 2.0 - 2.0 * d_ac,
        Omega_A=p.delta + 2.0 * d_ac - d_ab,
        kappa=p.kappa,
        gamma=p.gamma,
    )


def derive_effective(p: PhysicalParams) -> EffectiveParams:
    """Map SI constants to the dimensionless working set."""
    r = dimensional_rates(p)
    if p.beta_omega_m is not None:
        beta = p.beta_omega_m
    else:
        beta = HBAR * r.omega_m / (K_B * p.T)
    return rescale(r, beta)


def rescale(r: DimensionalRates, beta_omega_m: float) -> EffectiveParams:
    """Divide every rate by omega_m."""
    w = r.omega_m
    return EffectiveParams(
        chi=r.chi / w,
        g_ab=r.g_ab / w,
        G=r.G / w,
        Omega_c=r.Omega_c / w,
        Omega_A=r.Omega_A / w,
        kappa=r.kappa / w,
        gamma=r.gamma / w,
        beta_omega_m=beta_omega_m,
        omega_m=w,
    )


PHYSICAL_KEYS = tuple(f.name for f in fields(PhysicalParams))
EFFECTIVE_KEYS = tuple(f.name for f in fields(EffectiveParams)) + ("O",)


def effective_from_mapping(values: dict) -> EffectiveParams:
    """Build EffectiveParams from config keys; ``O`` may replace ``g_ab``."""
    values = dict(values)
    unknown = set(values) - set(EFFECTIVE_KEYS)
    if unknown:
        raise KeyError(f"unknown effective-parameter keys: {sorted(unknown)}")
    O = values.pop("O", None)
    if O is not None:
        if "g_ab" in values:
            raise ValueError("give either O or g_ab, not both")
        chi = values.pop("chi", 1.0)
        return EffectiveParams.from_estimand(float(O), chi=float(chi), **{k: float(v) for k, v in values.items()})
    return EffectiveParams(**{k: float(v) for k, v in values.items()})


def physical_from_mapping(values: dict) -> PhysicalParams:
    unknown = set(values) - set(PHYSICAL_KEYS)
    if unknown:
        raise KeyError(f"unknown physical-parameter keys: {sorted(unknown)}")
    return PhysicalParams(**{k: float(v) for k, v in values.items()})
