"""A scalar equation or a 2x2 system, each component paired with its kernel and cone constants."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping

from .cone import Constants, constants_for
from .expr import Expr, parameters, parse, to_text, variables
from .kernel import KernelSpec


@dataclass(frozen=True)
class Equation:
    f: Expr
    constants: Constants

    @property
    def kernel(self) -> KernelSpec:
        return self.constants.kernel


@dataclass(frozen=True)
class Problem:
    equations: tuple[Equation, ...]
    params: Mapping[str, float] = field(default_factory=dict)

    def __post_init__(self):
        if len(self.equations) not in (1, 2):
            raise ValueError("a problem has one equation or a system of two")
        allowed = ("u",) if len(self.equations) == 1 else ("u", "v")
        for i, eq in enumerate(self.equations, 1):
            extra = set(variables(eq.f)) - set(allowed)
            if extra:
                raise ValueError(f"equation {i} uses {sorted(extra)}; allowed variables are {allowed}")
            missing = set(parameters(eq.f)) - set(self.params)
            if missing:
                raise ValueError(f"equation {i} has unbound parameters {sorted(missing)}")

    @classmethod
    def build(
        cls,
        fs: str | Expr | list,
        kernels: KernelSpec | list[KernelSpec],
        params: Mapping[str, float] | None = None,
        windows: list | None = None,
    ) -> Problem:
        """Convenience constructor: expressions, kernels and optional windows per equation."""
        if not isinstance(fs, list):
            fs = [fs]
        if not isinstance(kernels, list):
            kernels = [kernels] * len(fs)
        windows = windows or [None] * len(fs)
        eqs = []
        for f, k, w in zip(fs, kernels, windows):
            expr = parse(f) if isinstance(f, str) else f
            consts = constants_for(k, *w) if w else constants_for(k)
            eqs.append(Equation(expr, consts))
        return cls(tuple(eqs), dict(params or {}))

    @property
    def dims(self) -> int:
        return len(self.equations)

    @property
    def is_system(self) -> bool:
        return self.dims == 2

    @property
    def c(self) -> float:
        """Overall cone constant, the smallest over components."""
        return min(eq.constants.c for eq in self.equations)

    def describe(self) -> list[str]:
        return [f"f{i} = {to_text(eq.f)} [{eq.kernel.value}]" for i, eq in enumerate(self.equations, 1)]
