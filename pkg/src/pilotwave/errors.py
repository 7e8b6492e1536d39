"""Exception hierarchy shared by all pilotwave modules."""


class PilotWaveError(Exception):
    """Base class for every error raised by this package."""


class ModelError(PilotWaveError, ValueError):
    """Invalid oscillator parameters or an unsupported model family."""


class WronskianError(PilotWaveError, ValueError):
    """Mode data whose Wronskian is not normalized to one."""


class BogoliubovError(PilotWaveError, ValueError):
    """Bogoliubov coefficients violating |u|^2 - |v|^2 = 1."""


class IntegrationError(PilotWaveError, RuntimeError):
    """An adaptive ODE integration stopped before reaching its target time."""

    def __init__(self, message, t_last=None):
        super().__init__(message if t_last is None else f"{message} (last good t={t_last!r})")
        self.t_last = t_last


class QuadratureError(PilotWaveError, RuntimeError):
    """Adaptive quadrature could not reach the requested accuracy."""


class TruncationError(PilotWaveError, ValueError):
    """Fock-space dimension too small for the requested operation."""

    def __init__(self, message, required_dim=None):
        super().__init__(message)
        self.required_dim = required_dim


class NodeProximityError(PilotWaveError, ValueError):
    """Quantum potential requested where the amplitude R vanishes."""


class StencilError(PilotWaveError, ValueError):
    """Finite-difference grid too coarse for the requested residual tolerance."""


class ConfigError(PilotWaveError, ValueError):
    """Malformed or inconsistent scenario configuration."""

    def __init__(self, message, line=None, key=None):
        prefix = f"line {line}: " if line is not None else ""
        super().__init__(prefix + message)
        self.line = line
        self.key = key
