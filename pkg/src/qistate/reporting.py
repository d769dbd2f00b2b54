"""Residual-check bookkeeping shared by the verification suites."""

from dataclasses import dataclass, field


@dataclass
class Check:
    """One verified identity: worst residual against its threshold.

    ``law`` states the identity being checked.  ``asserted`` is False for
    diagnostics that are recorded but intentionally not required to pass.
    """

    name: str
    law: str
    residual: float
    threshold: float
    passed: bool
    asserted: bool = True
    detail: str = ""

    def to_dict(self):
        return {
            "name": self.name,
            "law": self.law,
            "residual": self.residual,
            "threshold": self.threshold,
            "pass": self.passed,
            "asserted": self.asserted,
            "detail": self.detail,
        }


def residual_check(name: str, law: str, residual: float, tol: float,
                   scale: float = 1.0, asserted: bool = True, detail: str = "") -> Check:
    """Pass iff residual <= tol * max(1, scale)."""
    threshold = tol * max(1.0, scale)
    return Check(name, law, float(residual), float(threshold),
                 float(residual) <= threshold, asserted, detail)


@dataclass
class CheckSet:
    """A named bundle of checks; passes when every asserted check passes."""

    checks: list = field(default_factory=list)

    def add(self, check: Check):
        self.checks.append(check)
        return check

    def extend(self, checks):
        self.checks.extend(checks)

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks if c.asserted)

    def max_residual(self) -> float:
        return max((c.residual for c in self.checks), default=0.0)

    def __iter__(self):
        return iter(self.checks)

    def __getitem__(self, name: str) -> Check:
        for c in self.checks:
            if c.name == name:
                return c
        raise KeyError(name)
