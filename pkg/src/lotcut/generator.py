"""Seeded random benchmark instances.

Twelve instance classes fix the number of piece types and periods; every
other parameter is drawn from fixed ranges tied to the object weights.  The
stream is a PCG64 generator seeded explicitly, and draws happen in a fixed,
documented order (piece lengths, demands, production costs, setup factors,
storage rates, setup waste), so one seed always yields byte-identical data.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ConfigurationError
from .instance import Instance

#: class id -> (piece type count, period count)
CLASS_TABLE = {
    1: (3, 3), 2: (3, 4), 3: (4, 3), 4: (4, 4),
    5: (5, 3), 6: (5, 4), 7: (6, 3), 8: (6, 4),
    9: (7, 3), 10: (7, 4), 11: (8, 3), 12: (8, 4),
}

ELL_FACTOR = (0.1, 0.3)        # of the mean object length
DEMAND_RANGE = (0, 300)
C_FACTOR = (0.015, 0.025)      # of the object weight b
S_FACTOR = (0.03, 0.05)        # of the production cost c
H_RANGE = (7.5e-6, 1.25e-5)
F_FACTOR = (0.01, 0.05)        # of the object weight b
CP_MULTIPLIER = 10.0           # on the machine-mean production cost
SIGMA_FACTOR = 0.5             # of the object storage rate h
PHI = 1.24                     # capacity slack over the mean per-period load


@dataclass(frozen=True)
class GeneratorConfig:
    """Knobs of the benchmark design; defaults reproduce the standard suite."""

    class_id: int
    seed: int
    phi: float = PHI
    M: int = 2
    K: int = 1
    L: tuple = (540, 460)
    rho: float = 2.0

    def __post_init__(self):
        if self.class_id not in CLASS_TABLE:
            raise ConfigurationError(
                f"unknown class id {self.class_id}; valid ids are 1..{len(CLASS_TABLE)}")
        if self.K != 1:
            raise ConfigurationError("the generator only produces single-grammage instances")
        if len(self.L) != self.M:
            raise ConfigurationError("L must list one object length per machine")


def ell_bounds(config: GeneratorConfig) -> tuple[int, int]:
    mean_len = sum(config.L) / config.M
    return (int(math.ceil(ELL_FACTOR[0] * mean_len)),
            int(math.floor(ELL_FACTOR[1] * mean_len)))


def generate(config: GeneratorConfig) -> Instance:
    """Draw one instance; the same config always gives identical bytes."""
    nf, horizon = CLASS_TABLE[config.class_id]
    m_count, k_count = config.M, config.K
    rng = np.random.default_rng(np.random.PCG64(config.seed))
    lengths = np.array(config.L, dtype=np.int64)
    rho = np.full(k_count, config.rho)
    b = rho[:, None] * lengths[None, :]

    lo, hi = ell_bounds(config)
    ell = np.zeros(nf, dtype=np.int64)
    for i in range(nf):
        while True:
            candidate = int(rng.integers(lo, hi, endpoint=True))
            if candidate <= lengths.max():
                ell[i] = candidate
                break
    piece_grammage = np.zeros(nf, dtype=np.int64)

    d = rng.integers(DEMAND_RANGE[0], DEMAND_RANGE[1], size=(nf, horizon),
                     endpoint=True)
    c = rng.uniform(C_FACTOR[0], C_FACTOR[1], size=(k_count, m_count, horizon)) \
        * b[:, :, None]
    s = rng.uniform(S_FACTOR[0], S_FACTOR[1], size=(k_count, m_count, horizon)) * c
    h = rng.uniform(H_RANGE[0], H_RANGE[1], size=(k_count, horizon))
    f = rng.uniform(F_FACTOR[0], F_FACTOR[1], size=(k_count, m_count)) * b

    cp = CP_MULTIPLIER * c.mean(axis=1)
    sigma = SIGMA_FACTOR * h[piece_grammage, :]

    eta = rho[piece_grammage] * ell.astype(np.float64)
    demand_weight = np.zeros((k_count, horizon))
    for k in range(k_count):
        members = piece_grammage == k
        demand_weight[k] = eta[members] @ d[members].astype(np.float64)
    # per-period pool: mean total demand weight plus every machine's setup
    # waste allowance, with phi slack on top
    cap = config.phi * (float(np.sum(demand_weight)) + horizon * float(np.sum(f))) / horizon
    share = b[0] / b[0].sum()
    capacity = np.repeat((share * cap)[:, None], horizon, axis=1)

    return Instance(
        T=horizon, K=k_count, M=m_count, Nf=nf,
        L=lengths, rho=rho, piece_grammage=piece_grammage, ell=ell,
        c=c, h=h, s=s, C=capacity, f=f, cp=cp, sigma=sigma, d=d,
    )


def generate_suite(class_id: int, seeds) -> list[Instance]:
    """One instance per seed, all from the given class."""
    return [generate(GeneratorConfig(class_id=class_id, seed=int(seed)))
            for seed in seeds]


def audit_instance(inst: Instance, config: GeneratorConfig) -> list[str]:
    """Check every range and identity the generator promises; [] means clean."""
    issues: list[str] = []
    nf, horizon = CLASS_TABLE[config.class_id]

    def expect(cond: bool, message: str) -> None:
        if not cond:
            issues.append(message)

    expect(inst.Nf == nf and inst.T == horizon,
           f"shape mismatch for class {config.class_id}: got Nf={inst.Nf}, T={inst.T}")
    expect(inst.M == config.M and inst.K == config.K, "machine/grammage counts drifted")
    expect(tuple(inst.L.tolist()) == tuple(config.L), "object lengths drifted")
    expect(bool(np.all(inst.rho == config.rho)), "specific weights drifted")

    lo, hi = ell_bounds(config)
    expect(bool(np.all((inst.ell >= lo) & (inst.ell <= hi))),
           f"piece length outside [{lo}, {hi}]")
    expect(bool(np.all(inst.ell <= inst.L.max())), "piece does not fit any machine")
    expect(bool(np.all((inst.d >= DEMAND_RANGE[0]) & (inst.d <= DEMAND_RANGE[1]))),
           "demand outside range")

    b = inst.rho[:, None] * inst.L[None, :].astype(np.float64)
    tol = 1e-12

    def in_factor(arr, base, low, high, label):
        ratio = arr / base
        expect(bool(np.all((ratio >= low - tol) & (ratio <= high + tol))),
               f"{label} factor outside [{low}, {high}]")

    in_factor(inst.c, b[:, :, None], *C_FACTOR, "production cost")
    in_factor(inst.s, inst.c, *S_FACTOR, "setup cost")
    expect(bool(np.all((inst.h >= H_RANGE[0] - tol) & (inst.h <= H_RANGE[1] + tol))),
           "object storage rate outside range")
    in_factor(inst.f, b, *F_FACTOR, "setup waste")

    expect(bool(np.array_equal(inst.cp, CP_MULTIPLIER * inst.c.mean(axis=1))),
           "cutting-waste cost is not the machine-mean identity")
    expect(bool(np.array_equal(inst.sigma, SIGMA_FACTOR * inst.h[inst.piece_grammage, :])),
           "piece storage rate is not half the object rate")

    expect(bool(np.array_equal(inst.b, b)), "derived object weights inconsistent")
    eta = inst.rho[inst.piece_grammage] * inst.ell.astype(np.float64)
    expect(bool(np.array_equal(inst.eta, eta)), "derived piece weights inconsistent")
    demand_weight = np.zeros((inst.K, inst.T))
    for k in range(inst.K):
        members = inst.piece_grammage == k
        demand_weight[k] = eta[members] @ inst.d[members].astype(np.float64)
    expect(bool(np.array_equal(inst.D, demand_weight)), "derived weight demand inconsistent")

    cap = config.phi * (float(np.sum(demand_weight))
                        + inst.T * float(np.sum(inst.f))) / inst.T
    share = b[0] / b[0].sum()
    capacity = np.repeat((share * cap)[:, None], inst.T, axis=1)
    expect(bool(np.all(np.abs(capacity - inst.C) <= 1e-9 * np.abs(capacity))),
           "capacity does not reproduce from the stored instance")
    return issues
