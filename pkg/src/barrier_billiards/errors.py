"""Exception types shared across the toolkit."""


class BarrierBilliardError(Exception):
    """Base class for all toolkit errors."""


class ValidationError(BarrierBilliardError):
    """Invalid input configuration; the offending field is named in the message."""


class ThresholdError(BarrierBilliardError):
    """A channel threshold pi*n/(2b) coincides with k; the caller must perturb k."""


class PoleProximityError(BarrierBilliardError):
    """alpha is too close to a pole -p_{2n-1} of the K+ product."""

    def __init__(self, n, distance):
        self.n = n
        self.distance = distance
        super().__init__(
            f"alpha within {distance:.3e} of the pole -p_{{2n-1}} for n={n}"
        )


class IntertwiningError(BarrierBilliardError):
    """Supplied channel coordinates violate the alternating-sign ordering."""


class OpticalBoundaryError(BarrierBilliardError):
    """Diffraction coefficient evaluated on (or too close to) an optical boundary."""


class NumericalAbort(BarrierBilliardError):
    """A numerical sanity check failed (e.g. an eigenvalue left the unit circle)."""
