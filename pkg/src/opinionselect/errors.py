"""Exception types shared across the package."""


class GraphError(ValueError):
    """Invalid graph data or graph construction parameters."""


class ReachabilityError(GraphError):
    """Some regular node cannot reach a stubborn node."""


class NumericalError(RuntimeError):
    """A numerical routine failed to converge or hit a degenerate system."""


class BudgetExceededError(RuntimeError):
    """Exact enumeration would exceed the combinatorial budget."""
