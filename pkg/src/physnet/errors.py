"""Exception hierarchy shared by all physnet modules."""


class PhysNetError(Exception):
    """Base class for all library errors."""


class GraphError(PhysNetError, ValueError):
    pass


class IndexOutOfRange(GraphError):
    pass


class SelfLoop(GraphError):
    pass


class NonPositiveWeight(GraphError):
    pass


class GraphTooLargeForOracle(GraphError):
    pass


class DimensionMismatch(PhysNetError, ValueError):
    pass


class NotMetzler(PhysNetError, ValueError):
    pass


class NotDiagonallyDominant(PhysNetError, ValueError):
    pass


class NotLaplacian(PhysNetError, ValueError):
    """Matrix does not have the sign/sum pattern required by the operation."""


class DisconnectedInput(PhysNetError, ValueError):
    pass


class NumericallyIndeterminate(PhysNetError, ArithmeticError):
    pass


class NotStronglyConnected(PhysNetError, ValueError):
    pass


class NoSpanningTree(PhysNetError, ValueError):
    pass


class NotBalanced(PhysNetError, ValueError):
    pass


class ZeroSigmaEntry(PhysNetError, ValueError):
    pass


class NonFiniteState(PhysNetError, ArithmeticError):
    """Integration diverged. ``trajectory`` holds the steps computed so far."""

    def __init__(self, message, trajectory=None):
        super().__init__(message)
        self.trajectory = trajectory


class NotStrictlyConvex(PhysNetError, ValueError):
    pass


class NoInverseProvided(PhysNetError, ValueError):
    pass


class BracketingFailed(PhysNetError, ArithmeticError):
    pass


class NonPositiveMass(PhysNetError, ValueError):
    pass


class NotControllable(PhysNetError, ValueError):
    pass


class DimensionChainBroken(PhysNetError, ValueError):
    pass


class LevelOutOfRange(PhysNetError, IndexError):
    pass


class OutOfEntropyDomain(PhysNetError, ValueError):
    pass
