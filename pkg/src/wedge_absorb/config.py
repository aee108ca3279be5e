"""Numerical tolerances shared across the package.

Every threshold used to decide integrality, realness, root coincidence or
residual acceptance lives here so that a report can echo the exact set of
values it was produced with.
"""

from dataclasses import asdict, dataclass


@dataclass(frozen=True)
class Tolerances:
    integer: float = 1e-9          # alpha and d integrality
    unit_modulus: float = 1e-12
    imag_drop: float = 1e-9        # imaginary residue allowed on real roots
    simple_root: float = 1e-9      # |sin| below this is a resonance
    simple_root_warn: float = 1e-6 # |sin| below this is a near-resonance
    angle: float = 1e-9            # angular membership in [0, 2*beta]
    pole: float = 1e-12
    chain_zero: float = 1e-12
    rate_merge: float = 1e-8       # merging equal exponential rates
    residual: float = 1e-8
    coefficient_imag: float = 1e-10
    cone: float = 1e-12
    cf_max_quotient: int = 10**6
    cf_max_depth: int = 32
    cf_max_denominator: int = 10**6

    def as_dict(self):
        return asdict(self)


DEFAULT = Tolerances()
