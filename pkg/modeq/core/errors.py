"""Root exception shared by every modeq module."""


class ModEqError(Exception):
    """Base class for failures raised while building or checking modular equations."""
    pass
