"""Per-iteration records produced by the outer solvers."""

from dataclasses import dataclass, field
from typing import List, Optional

import numpy as np

TERMINATIONS = ("step", "residual", "max_iter", "error")


@dataclass(frozen=True)
class IterateRecord:
    """One outer step: ``x_new`` is computed from ``x`` via the point ``y``.

    For the inertial iteration record ``n`` holds ``x = x_n``, ``y = y_n``
    and ``x_new = x_{n+1}``; for (quasi-)Newton ``y`` equals ``x``.
    """

    n: int
    x: np.ndarray
    y: np.ndarray
    x_new: np.ndarray
    gamma: float
    alpha: float
    step_gap: float  # |x_new - y|_inf
    v_gap: float  # |v(y) - v(x_new)|_2
    residual: float  # |F(x_new)|_inf
    u_norm: float  # |v(y) - v(x_new)|_inf / gamma
    err_to_ref: Optional[float] = None  # |x_new - x_ref|_2


@dataclass
class IterateTrace:
    records: List[IterateRecord] = field(default_factory=list)
    x0: Optional[np.ndarray] = None
    x1: Optional[np.ndarray] = None
    termination: str = "max_iter"
    reference: Optional[np.ndarray] = None
    method: str = "gippa"

    def __len__(self):
        return len(self.records)

    @property
    def converged(self):
        return self.termination in ("step", "residual")

    @property
    def iterates(self):
        """Array ``[x_0, x_1, ..., x_{N+1}]`` of every iterate produced."""
        xs = [self.x0]
        if self.x1 is not None:
            xs.append(self.x1)
        xs.extend(r.x_new for r in self.records)
        return np.array(xs)

    @property
    def final(self):
        if self.records:
            return self.records[-1].x_new
        return self.x1 if self.x1 is not None else self.x0

    def column(self, name):
        return np.array([getattr(r, name) for r in self.records], dtype=float)

    @property
    def err_to_ref(self):
        if self.reference is None:
            return None
        return self.column("err_to_ref")

    def iterations_to(self, threshold, quantity="err_to_ref"):
        """First record index ``n`` where ``quantity <= threshold``, else None."""
        for r in self.records:
            val = getattr(r, quantity)
            if val is not None and val <= threshold:
                return r.n
        return None

    @classmethod
    def from_iterates(cls, xs, alphas=None, reference=None):
        """Build an inertial-style trace from a raw iterate sequence.

        Used by diagnostics tests; ``xs[0]`` and ``xs[1]`` become the start
        points and each later entry one record with ``y = x``.
        """
        xs = [np.asarray(x, dtype=float) for x in xs]
        alphas = alphas if alphas is not None else [0.0] * len(xs)
        recs = []
        for n in range(1, len(xs) - 1):
            a = float(alphas[n])
            y = xs[n] + a * (xs[n] - xs[n - 1])
            err = None if reference is None else float(np.linalg.norm(xs[n + 1] - reference))
            recs.append(IterateRecord(
                n=n, x=xs[n], y=y, x_new=xs[n + 1], gamma=1.0, alpha=a,
                step_gap=float(np.max(np.abs(xs[n + 1] - y))),
                v_gap=float(np.linalg.norm(xs[n + 1] - y)),
                residual=0.0, u_norm=0.0, err_to_ref=err,
            ))
        return cls(recs, xs[0], xs[1] if len(xs) > 1 else None, "max_iter",
                   None if reference is None else np.asarray(reference, dtype=float), "synthetic")
