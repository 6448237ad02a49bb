"""Problem instance data for the integrated production-and-cutting model.

An :class:`Instance` bundles every parameter of the planning problem: the
machines that produce full-length objects, the piece types cut from those
objects, and all per-period costs, capacities and demands.  Derived
quantities (object weights ``b``, piece weights ``eta``, aggregate weight
demand ``D``) are computed once at construction and never serialized.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import InvalidInstanceError, ShapeError

_JSON_KEYS = (
    "T", "K", "M", "Nf", "L", "rho", "piece_grammage", "ell",
    "c", "h", "s", "C", "f", "cp", "sigma", "d",
)


def _freeze(a: np.ndarray) -> np.ndarray:
    a.flags.writeable = False
    return a


@dataclass(frozen=True)
class Instance:
    """Immutable parameter set for one planning problem.

    Index conventions (0-based everywhere):
      * ``t`` periods, ``k`` grammages, ``m`` machines, ``i`` piece types;
      * arrays are indexed grammage-outermost, then machine, then period.

    Fields:
      * ``L[m]``: object length produced by machine ``m`` (cm).
      * ``rho[k]``: specific weight of grammage ``k`` (weight per cm).
      * ``piece_grammage[i]``: grammage each piece type belongs to.
      * ``ell[i]``: piece length (integer cm).
      * ``c[k,m,t]``: production cost per object; ``h[k,t]``: object storage
        cost per unit weight; ``s[k,m,t]``: setup cost; ``C[m,t]``: machine
        capacity in weight; ``f[k,m]``: setup material waste in weight;
        ``cp[k,t]``: cutting-waste cost per cm; ``sigma[i,t]``: piece storage
        cost per unit weight; ``d[i,t]``: demanded pieces.
    """

    T: int
    K: int
    M: int
    Nf: int
    L: np.ndarray
    rho: np.ndarray
    piece_grammage: np.ndarray
    ell: np.ndarray
    c: np.ndarray
    h: np.ndarray
    s: np.ndarray
    C: np.ndarray
    f: np.ndarray
    cp: np.ndarray
    sigma: np.ndarray
    d: np.ndarray
    # derived, filled in __post_init__
    b: np.ndarray = field(init=False, repr=False)
    eta: np.ndarray = field(init=False, repr=False)
    D: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        coerce = {
            "L": np.int64, "rho": np.float64, "piece_grammage": np.int64,
            "ell": np.int64, "c": np.float64, "h": np.float64,
            "s": np.float64, "C": np.float64, "f": np.float64,
            "cp": np.float64, "sigma": np.float64, "d": np.int64,
        }
        for name, dtype in coerce.items():
            object.__setattr__(self, name, _freeze(np.asarray(getattr(self, name), dtype=dtype)))
        self._check_shapes()
        self._check_values()
        b = self.rho[:, None] * self.L[None, :].astype(np.float64)
        eta = self.rho[self.piece_grammage] * self.ell.astype(np.float64)
        D = np.zeros((self.K, self.T))
        for k in range(self.K):
            members = self.pieces_of(k)
            if members.size:
                D[k] = eta[members] @ self.d[members].astype(np.float64)
        object.__setattr__(self, "b", _freeze(b))
        object.__setattr__(self, "eta", _freeze(eta))
        object.__setattr__(self, "D", _freeze(D))

    def _check_shapes(self):
        expected = {
            "L": (self.M,), "rho": (self.K,), "piece_grammage": (self.Nf,),
            "ell": (self.Nf,), "c": (self.K, self.M, self.T),
            "h": (self.K, self.T), "s": (self.K, self.M, self.T),
            "C": (self.M, self.T), "f": (self.K, self.M),
            "cp": (self.K, self.T), "sigma": (self.Nf, self.T),
            "d": (self.Nf, self.T),
        }
        for name, shape in expected.items():
            got = getattr(self, name).shape
            if got != shape:
                raise ShapeError(f"Instance.{name}", shape, got)

    def _check_values(self):
        if min(self.T, self.K, self.M, self.Nf) < 1:
            raise InvalidInstanceError("T, K, M and Nf must all be positive")
        if np.any(self.L <= 0):
            raise InvalidInstanceError("object lengths must be positive")
        if np.any(self.rho <= 0):
            raise InvalidInstanceError("specific weights must be positive")
        if np.any(self.ell <= 0):
            raise InvalidInstanceError("piece lengths must be positive")
        if np.any(self.piece_grammage < 0) or np.any(self.piece_grammage >= self.K):
            raise InvalidInstanceError("piece_grammage values must index a grammage")
        if np.any(self.ell > self.L.max()):
            raise InvalidInstanceError("every piece must fit the longest object")
        for name in ("c", "h", "s", "C", "f", "cp", "sigma"):
            if np.any(getattr(self, name) < 0):
                raise InvalidInstanceError(f"{name} must be nonnegative")
        if np.any(self.d < 0):
            raise InvalidInstanceError("piece demands must be nonnegative")

    def pieces_of(self, k: int) -> np.ndarray:
        """Indices of the piece types belonging to grammage ``k``."""
        return np.nonzero(self.piece_grammage == k)[0]

    # -- serialization ----------------------------------------------------

    def to_dict(self) -> dict:
        out: dict = {}
        for key in _JSON_KEYS:
            val = getattr(self, key)
            out[key] = val.tolist() if isinstance(val, np.ndarray) else int(val)
        return out

    @classmethod
    def from_dict(cls, data: dict) -> "Instance":
        missing = [k for k in _JSON_KEYS if k not in data]
        if missing:
            raise InvalidInstanceError(f"instance document is missing keys: {missing}")
        return cls(**{k: data[k] for k in _JSON_KEYS})

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2)

    @classmethod
    def from_json(cls, text: str) -> "Instance":
        return cls.from_dict(json.loads(text))

    def save(self, path: str | Path) -> None:
        Path(path).write_text(self.to_json() + "\n")

    @classmethod
    def load(cls, path: str | Path) -> "Instance":
        return cls.from_json(Path(path).read_text())
