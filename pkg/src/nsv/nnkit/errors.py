"""Exception types shared across the network engine."""


class NnkitError(Exception):
    pass


class ShapeError(NnkitError):
    """Input/layer shapes do not compose."""


class NonFiniteGradient(NnkitError):
    """An optimizer step was refused because a gradient entry was not finite."""


class TrainingDiverged(NnkitError):
    """Loss became non-finite during training."""

    def __init__(self, epoch: int, message: str = ""):
        self.epoch = epoch
        super().__init__(message or f"training diverged at epoch {epoch}")
