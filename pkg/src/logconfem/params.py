"""Physical parameters of the Oldroyd-B fluid."""

from dataclasses import dataclass, replace


@dataclass(frozen=True)
class PhysicalParams:
    """Material constants of an Oldroyd-B fluid.

    Attributes
    ----------
    rho : float
        Density. Creeping-flow benchmarks use ``rho = 0``.
    eta_total : float
        Total (solvent + polymeric) viscosity.
    beta : float
        Solvent viscosity ratio, ``eta_solvent / eta_total``, in (0, 1).
    relaxation_time : float
        Relaxation time of the polymer, >= 0. Zero gives a Newtonian fluid.
    """

    rho: float
    eta_total: float
    beta: float
    relaxation_time: float

    def __post_init__(self):
        if not self.eta_total > 0.0:
            raise ValueError(f"eta_total must be positive, got {self.eta_total}")
        if not 0.0 < self.beta < 1.0:
            raise ValueError(f"beta must lie in (0, 1), got {self.beta}")
        if self.relaxation_time < 0.0:
            raise ValueError(
                f"relaxation_time must be >= 0, got {self.relaxation_time}"
            )
        if self.rho < 0.0:
            raise ValueError(f"rho must be >= 0, got {self.rho}")

    @property
    def eta_solvent(self):
        return self.beta * self.eta_total

    @property
    def eta_polymer(self):
        return (1.0 - self.beta) * self.eta_total

    @property
    def elastic_scale(self):
        """Ratio relaxation_time / eta_polymer, the argument scale of the
        log-conformation nonlinearities. Zero for a Newtonian fluid."""
        return self.relaxation_time / self.eta_polymer

    def with_relaxation_time(self, value):
        return replace(self, relaxation_time=float(value))
