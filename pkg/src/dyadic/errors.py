class SizeGuardError(RuntimeError):
    """Requested size is beyond what can be materialised at desk scale."""


class ConvergenceError(RuntimeError):
    pass
