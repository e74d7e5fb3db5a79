"""Exception types; the CLI maps each to an exit code."""


class InputError(ValueError):
    """Malformed or empty input."""


class ResolutionError(ValueError):
    """Grid too coarse for the requested computation."""


class ConfigError(ValueError):
    """Experiment configuration violates a precondition."""


class DepthCapError(RuntimeError):
    """Dyadic subdivision exceeded its depth cap."""


class QuadratureError(RuntimeError):
    """Quadrature did not converge under refinement."""


class PackingError(ValueError):
    """Requested ball packing does not fit; ``max_feasible`` holds the largest N that does."""

    def __init__(self, msg, max_feasible):
        super().__init__(msg)
        self.max_feasible = max_feasible
