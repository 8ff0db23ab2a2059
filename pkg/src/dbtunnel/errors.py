"""Exception hierarchy shared by every module."""


class TunnelingError(Exception):
    """Base class for all errors raised by dbtunnel."""


class EnergyOutOfRange(TunnelingError, ValueError):
    """Energy outside the supported tunneling window 0 < E < V0."""


class DivergentSeries(TunnelingError, ArithmeticError):
    """A path-sum geometric series has ratio modulus >= 1."""


class AtResonance(TunnelingError, ArithmeticError):
    """The off-resonance closed form was requested at a resonance."""


class NotAtResonance(TunnelingError, ValueError):
    """A resonance-only formula was requested away from resonance."""


class SingularPhase(TunnelingError, ArithmeticError):
    """sin(phi) is too close to zero for the formula to be evaluated."""


class NumericalOverflow(TunnelingError, OverflowError):
    """A transfer-matrix factor exceeds the floating point range."""


class OutOfEnvelope(TunnelingError, ValueError):
    """Bessel order or argument outside the supported envelope."""
