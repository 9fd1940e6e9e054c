"""Residual summaries shared by the residual-evaluating modules."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np


@dataclass(frozen=True, eq=False)
class ResidualReport:
    """Sup and L2 size of a pointwise residual.

    ``per_sample`` holds the residual magnitude per sample (the max over
    equations when several are evaluated together); ``components`` keeps the
    signed residual of each named equation.
    """

    sup_residual: float
    l2_residual: float
    per_sample: np.ndarray
    equation_id: str
    components: dict = field(default_factory=dict)
    extras: dict = field(default_factory=dict)

    def __float__(self) -> float:
        return float(self.sup_residual)

    @staticmethod
    def build(equation_id: str, components: dict, cell: float = 1.0, extras=None) -> "ResidualReport":
        """Combine named residual arrays (real or complex, same shape)."""
        mags = [np.abs(np.asarray(v)) for v in components.values()]
        per = np.max(np.stack(mags), axis=0) if mags else np.zeros(0)
        sq = sum(float(np.sum(m**2)) for m in mags)
        sup = float(np.max(per)) if per.size else 0.0
        return ResidualReport(sup, float(np.sqrt(cell * sq)), per, equation_id,
                              {k: np.asarray(v) for k, v in components.items()}, dict(extras or {}))

    def to_dict(self) -> dict:
        return {"equation_id": self.equation_id, "sup_residual": self.sup_residual,
                "l2_residual": self.l2_residual,
                **{k: v for k, v in self.extras.items() if np.isscalar(v)}}
