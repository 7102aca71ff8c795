"""Container for computed spectra."""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

DEGENERACY_GAP = 1e-9


@dataclass(frozen=True)
class Spectrum:
    """Sorted eigenvalues, repeated according to multiplicity.

    ``meta`` records the operator tag, parameters, discretization sizes and
    solver residuals. ``eigenvectors`` (columns) are kept only when a caller
    asked for them.
    """

    eigenvalues: np.ndarray
    meta: dict = field(default_factory=dict)
    eigenvectors: np.ndarray | None = None

    def __post_init__(self):
        vals = np.asarray(self.eigenvalues, dtype=float)
        if vals.size > 1 and np.any(np.diff(vals) < 0):
            order = np.argsort(vals)
            vals = vals[order]
            if self.eigenvectors is not None:
                object.__setattr__(self, "eigenvectors", self.eigenvectors[:, order])
        object.__setattr__(self, "eigenvalues", vals)

    def __len__(self):
        return len(self.eigenvalues)

    def multiplicities(self, gap=DEGENERACY_GAP):
        """Cluster eigenvalues closer than ``gap``; return (values, counts)."""
        vals = self.eigenvalues
        if vals.size == 0:
            return np.array([]), np.array([], dtype=int)
        breaks = np.nonzero(np.diff(vals) >= gap)[0] + 1
        groups = np.split(vals, breaks)
        return np.array([g.mean() for g in groups]), np.array([len(g) for g in groups])

    @property
    def largest(self):
        return float(self.eigenvalues[-1]) if len(self) else -np.inf

    def to_dict(self):
        values, counts = self.multiplicities()
        return {
            "eigenvalues": self.eigenvalues.tolist(),
            "distinct": values.tolist(),
            "multiplicities": counts.tolist(),
            "meta": _jsonable(self.meta),
        }

    def to_json(self, **kwargs):
        return json.dumps(self.to_dict(), **kwargs)


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if isinstance(obj, np.generic):
        return obj.item()
    if hasattr(obj, "to_dict"):
        return obj.to_dict()
    return obj
