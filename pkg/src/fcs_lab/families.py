"""The three built-in Kraus families and their closed-form oracles.

``ex1``  v1 = [[c, s], [0, 0]],       v2 = [[0, 0], [s, c]]
``ex2``  v1 = [[a c, a s], [-s, c]],  v2 = sqrt(1-a^2) [[0, 1], [0, 0]]
``ex3``  v1 as in ex2,                v2 = sqrt(1-a^2) [[1, 0], [0, 0]]

with ``c = cos(phi)``, ``s = sin(phi)``.  Every family carries its closed-form
invariant state.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import BadParams, Undefined
from .fcs import KrausTriple, transfer_spectrum

FAMILIES = ("ex1", "ex2", "ex3")
PARAM_NAMES = ("phi", "a")


@dataclass(frozen=True)
class FamilyParams:
    family: str
    phi: float = 0.0
    a: float = 0.0

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise BadParams(f"unknown family {self.family!r}; choose one of {', '.join(FAMILIES)}")
        if not math.isfinite(self.phi):
            raise BadParams(f"phi must be finite, got {self.phi}")
        if not (math.isfinite(self.a) and 0.0 <= self.a <= 1.0):
            raise BadParams(f"a must lie in [0, 1], got {self.a}")

    def replace(self, **kw) -> "FamilyParams":
        return FamilyParams(kw.get("family", self.family), float(kw.get("phi", self.phi)), float(kw.get("a", self.a)))

    @property
    def free_params(self) -> tuple[str, ...]:
        return ("phi",) if self.family == "ex1" else PARAM_NAMES


def _ex2_denominator(a: float, c: float, s: float) -> float:
    return (1.0 - a) ** 2 * c * c + 2.0 * s * s


def make_triple(p: FamilyParams) -> KrausTriple:
    c, s, a = math.cos(p.phi), math.sin(p.phi), p.a
    if p.family == "ex1":
        v1 = np.array([[c, s], [0.0, 0.0]])
        v2 = np.array([[0.0, 0.0], [s, c]])
        rho = 0.5 * np.array([[1.0, 2 * c * s], [2 * c * s, 1.0]])
    else:
        r = math.sqrt(1.0 - a * a)
        v1 = np.array([[a * c, a * s], [-s, c]])
        if p.family == "ex2":
            v2 = r * np.array([[0.0, 1.0], [0.0, 0.0]])
            den = _ex2_denominator(a, c, s)
            if den == 0.0:
                # a = 1 and s = 0: identity channel, every state is invariant
                rho = 0.5 * np.eye(2)
            else:
                x = s * s / den
                y = (a - 1.0) * s * c / den
                rho = np.array([[x, y], [y, 1.0 - x]])
        else:
            v2 = r * np.array([[1.0, 0.0], [0.0, 0.0]])
            rho = np.diag([1.0, a * a]) / (1.0 + a * a)
    bare = KrausTriple((v1, v2))
    unique = transfer_spectrum(bare).unit_multiplicity == 1
    return KrausTriple((v1, v2), rho, unique, meta={"family": p.family, "phi": p.phi, "a": p.a})


def oracle_concurrence(p: FamilyParams, which: str) -> float:
    """Closed-form concurrence; ``which`` is ``"c12"`` or ``"c_ab"``."""
    if which not in ("c12", "c_ab"):
        raise Undefined(f"no closed form for {which!r}")
    c, s, a = math.cos(p.phi), math.sin(p.phi), p.a
    if p.family == "ex1":
        if which == "c12":
            raise Undefined("ex1 has no closed form for c12")
        return abs(math.sin(2 * p.phi) * math.cos(2 * p.phi))
    if p.family == "ex2":
        den = _ex2_denominator(a, c, s)
        if den == 0.0:
            return 0.0
        if which == "c12":
            return 2.0 * (1.0 - a * a) * s * s * c * c / den
        return 2.0 * math.sqrt(1.0 - a * a) * s * s * abs(c) / den
    if which == "c12":
        raise Undefined("ex3 has no closed form for c12")
    return 2.0 * a * math.sqrt(1.0 - a * a) / (1.0 + a * a) * abs(s)


# reference points singled out for each family
C12_EX2_MAX = math.sqrt(2.0) - 1.0
C_AB_EX3_MAX = 1.0 / math.sqrt(2.0)
CHAIN_C12_REFERENCE = 0.434467
MONOGAMY_NN_BOUND = 1.0 / math.sqrt(2.0)


def ex2_optimum() -> FamilyParams:
    """a = sqrt(2)-1 and cos(2 phi) = sqrt(2)-1, smallest positive phi."""
    a = math.sqrt(2.0) - 1.0
    return FamilyParams("ex2", 0.5 * math.acos(math.sqrt(2.0) - 1.0), a)


def ex3_optimum() -> FamilyParams:
    return FamilyParams("ex3", math.pi / 2, 1.0 / math.sqrt(3.0))
