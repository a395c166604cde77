"""Spin-motion coupling strengths for a laser-driven trapped ion.

The two-photon drive couples |down, n> to |up, m> with a Rabi rate that is
suppressed by the finite extent of the ion's wave packet relative to the
effective laser wavelength,

    Omega_{n,m} = Omega * exp(-eta^2 / 2) * eta^|n-m|
                  * sqrt(n_<! / n_>!) * L_{n_<}^{|n-m|}(eta^2),

where ``eta`` is the Lamb-Dicke parameter, ``n_< = min(n, m)``,
``n_> = max(n, m)`` and ``L`` is a generalized Laguerre polynomial.  The
carrier rates for the |0> and |2> motional levels therefore obey

    Omega_{0,0} / Omega_{2,2} = 2 / (2 - 4 eta^2 + eta^4),

which is the handle used to tune the conditional gate: choosing eta so the
ratio is 4/3 makes a single carrier pulse drive two full cycles on n=0 while
n=2 completes one and a half.

All Laguerre evaluations use the three-term recurrence in the degree index,
which is stable for the small arguments eta^2 < 1 used here, and the
factorial ratio is accumulated as a running product of 1/sqrt(k) so the
construction is overflow-safe for any practical n_max.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np
from scipy.constants import hbar as HBAR

from .errors import DomainError

#: Eta squared above which the carrier ratio formula has its pole, 2 - sqrt(2).
_RATIO_POLE = 2.0 - math.sqrt(2.0)


def lamb_dicke(delta_k_z: float, mass: float, omega_z: float) -> float:
    """Lamb-Dicke parameter eta = delta_k_z * sqrt(hbar / (2 m omega_z)).

    ``delta_k_z`` is the axial wavevector difference of the drive in rad/m,
    ``mass`` the ion mass in kg and ``omega_z`` the trap angular frequency in
    rad/s.
    """
    if delta_k_z <= 0 or mass <= 0 or omega_z <= 0:
        raise DomainError("delta_k_z, mass and omega_z must all be positive")
    return delta_k_z * math.sqrt(HBAR / (2.0 * mass * omega_z))


def laguerre(n: int, alpha: float, x: float) -> float:
    """Generalized Laguerre polynomial L_n^alpha(x) by the degree recurrence."""
    if n < 0:
        raise DomainError("Laguerre degree must be non-negative")
    if n == 0:
        return 1.0
    l_prev, l_cur = 1.0, 1.0 + alpha - x
    for k in range(2, n + 1):
        l_prev, l_cur = l_cur, ((alpha + 2 * k - 1 - x) * l_cur - (alpha + k - 1) * l_prev) / k
    return l_cur


def carrier_ratio_for_eta(eta: float) -> float:
    """Carrier Rabi-rate ratio Omega_{0,0} / Omega_{2,2} at a given eta."""
    x = eta * eta
    return 2.0 / (2.0 - 4.0 * x + x * x)


def eta_for_ratio(target_ratio: float, tol: float = 1e-14) -> float:
    """Smallest eta in (0, 1) giving the requested carrier ratio.

    Solves 2 / (2 - 4 eta^2 + eta^4) = target_ratio by bisecting the quartic
    g(x) = x^2 - 4x + (2 - 2/ratio) in x = eta^2 on (0, 1), where g is
    monotone decreasing, to the requested tolerance in x.
    """
    if target_ratio <= 1.0:
        raise DomainError(f"carrier ratio must exceed 1, got {target_ratio}")
    const = 2.0 - 2.0 / target_ratio

    def g(x: float) -> float:
        return x * x - 4.0 * x + const

    lo, hi = 0.0, 1.0
    if g(lo) <= 0.0 or g(hi) >= 0.0:
        raise DomainError(f"no eta in (0, 1) yields carrier ratio {target_ratio}")
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if g(mid) > 0.0:
            lo = mid
        else:
            hi = mid
    return math.sqrt(0.5 * (lo + hi))


@dataclass(frozen=True, eq=False)
class CouplingModel:
    """Trap and drive parameters with the derived Rabi-rate table.

    ``omega_base`` is the bare two-photon Rabi rate before wave-packet
    reduction, normalized so that the n=0 carrier rate is
    ``omega_base * exp(-eta^2 / 2)``.  All rates are angular (rad/s).  The
    full (n_max + 1)^2 table of matrix elements is precomputed at
    construction and the instance is immutable, so a model can be shared
    freely across threads and scan points.
    """

    omega_z: float
    eta: float
    omega_base: float
    n_max: int = 20
    _table: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        if self.omega_z <= 0:
            raise DomainError("omega_z must be positive")
        if not 0.0 < self.eta < 1.0:
            raise DomainError(f"eta must lie in (0, 1), got {self.eta}")
        if self.omega_base < 0:
            raise DomainError("omega_base must be non-negative")
        if self.omega_base >= self.omega_z:
            raise DomainError(
                "omega_base must stay below omega_z for the resonant two-level treatment"
            )
        if self.n_max < 4:
            raise DomainError(f"n_max must be at least 4, got {self.n_max}")
        object.__setattr__(self, "_table", self._build_table())
        self._table.setflags(write=False)

    def _build_table(self) -> np.ndarray:
        size = self.n_max + 1
        x = self.eta * self.eta
        pref = math.exp(-0.5 * x)
        table = np.zeros((size, size))
        for n in range(size):
            sqrt_fact = 1.0  # running product of 1/sqrt(k), k = n+1 .. m
            for m in range(n, size):
                if m > n:
                    sqrt_fact /= math.sqrt(m)
                val = (
                    self.omega_base
                    * pref
                    * self.eta ** (m - n)
                    * sqrt_fact
                    * laguerre(n, m - n, x)
                )
                table[n, m] = val
                table[m, n] = val
        return table

    @classmethod
    def from_physical(
        cls, delta_k_z: float, mass: float, omega_z: float, omega_base: float, n_max: int = 20
    ) -> "CouplingModel":
        """Build from beam geometry and ion mass instead of a given eta."""
        return cls(omega_z, lamb_dicke(delta_k_z, mass, omega_z), omega_base, n_max)

    @classmethod
    def from_carrier_rate(
        cls, omega_z: float, eta: float, omega_00: float, n_max: int = 20
    ) -> "CouplingModel":
        """Build from the measured n=0 carrier rate Omega_{0,0}."""
        return cls(omega_z, eta, omega_00 * math.exp(0.5 * eta * eta), n_max)

    def rabi_element(self, n: int, m: int) -> float:
        """Rabi rate Omega_{n,m} coupling |down, n> and |up, m>, in rad/s.

        Rates follow the positive convention: a sign flip of the Laguerre
        factor is a pi phase of the transferred amplitude and belongs to the
        pulse phase, so the magnitude is returned.
        """
        if not (0 <= n <= self.n_max and 0 <= m <= self.n_max):
            raise DomainError(f"Fock indices ({n}, {m}) outside 0..{self.n_max}")
        return float(abs(self._table[n, m]))

    def carrier_ratio(self) -> float:
        """Signed carrier-rate ratio Omega_{0,0} / Omega_{2,2}.

        Computed on the signed matrix elements so the algebraic identity
        2 / (2 - 4 eta^2 + eta^4) holds for every eta in (0, 1), including
        beyond the pole where the n=2 carrier rate changes sign.
        """
        return float(self._table[0, 0] / self._table[2, 2])

    def gate_time(self) -> float:
        """Carrier pulse duration giving two full Rabi cycles on n = 0."""
        return 2.0 * math.pi / float(abs(self._table[0, 0]))

    def at_carrier_rate(self, omega_00: float) -> "CouplingModel":
        """Copy of this model rescaled to a new n=0 carrier rate."""
        return replace(self, omega_base=omega_00 * math.exp(0.5 * self.eta * self.eta))


def gate_time(model: CouplingModel) -> float:
    return model.gate_time()
