"""
Error types shared by the solver, the scenario layer and the CLI.
"""

from typing import Optional


class SolverError(Exception):
    """Base class for every failure raised by the solver stack."""


class DryStateError(SolverError):
    """Water height dropped to (or below) the configured dry threshold."""

    def __init__(
        self,
        message: str,
        element: Optional[int] = None,
        node: Optional[int] = None,
        time: Optional[float] = None,
        stage: Optional[int] = None,
    ):
        self.base_message = message
        self.element = element
        self.node = node
        self.time = time
        self.stage = stage
        super().__init__(self._render())

    def _render(self) -> str:
        context = []
        if self.element is not None:
            context.append(f"element={self.element}")
        if self.node is not None:
            context.append(f"node={self.node}")
        if self.time is not None:
            context.append(f"t={self.time:.6g}")
        if self.stage is not None:
            context.append(f"stage={self.stage}")
        if not context:
            return self.base_message
        return f"{self.base_message} ({', '.join(context)})"

    def with_context(self, **context) -> "DryStateError":
        """Return a copy carrying extra location context; existing fields win."""
        merged = {
            "element": self.element,
            "node": self.node,
            "time": self.time,
            "stage": self.stage,
        }
        for key, value in context.items():
            if merged.get(key) is None:
                merged[key] = value
        return DryStateError(self.base_message, **merged)


class ConfigurationError(SolverError, ValueError):
    """Unknown or out-of-range configuration value."""


class PropertyViolation(SolverError):
    """A randomized invariant check failed."""

    def __init__(self, invariant: str, detail: str):
        self.invariant = invariant
        self.detail = detail
        super().__init__(f"{invariant} violated: {detail}")
