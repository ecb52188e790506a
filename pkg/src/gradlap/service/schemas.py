"""Request bodies for the HTTP service.

Range validation lives in the core dataclasses, not here: a model's job is
shape and typing, and its ``build`` helper hands off to the constructor
whose DomainError becomes the 422 response.  Unknown fields are rejected.
"""

from __future__ import annotations

from typing import List, Optional

import numpy as np
from pydantic import BaseModel, ConfigDict

from ..params import ProblemParams, StructureBounds
from ..radial import RadialGrid, RadialProfile


class _Strict(BaseModel):
    model_config = ConfigDict(extra="forbid")


class ParamsModel(_Strict):
    N: int
    m: float
    p: float
    q: float

    def build(self) -> ProblemParams:
        return ProblemParams(N=self.N, m=self.m, p=self.p, q=self.q)


class BoundsModel(_Strict):
    alpha1: float
    alpha2: Optional[float] = None
    c0: float = 1.0
    M1: float = 1.0
    M2: float = 0.0

    def build(self, params: ProblemParams) -> StructureBounds:
        alpha2 = self.alpha2
        if alpha2 is None:
            # midpoint of the admissible window (m-1, alpha1*m/(alpha1+1))
            hi = self.alpha1 * params.m / (self.alpha1 + 1.0)
            alpha2 = 0.5 * (params.m - 1.0 + hi)
        return StructureBounds(c0=self.c0, M1=self.M1, M2=self.M2,
                               alpha1=self.alpha1, alpha2=alpha2)


class ProfileModel(_Strict):
    r: List[float]
    u: List[float]
    du: Optional[List[float]] = None

    def build(self) -> RadialProfile:
        nodes = np.asarray(self.r, dtype=float)
        grid = RadialGrid(nodes=nodes, R=float(nodes[-1]))
        du = np.asarray(self.du, dtype=float) if self.du is not None else None
        values = np.asarray(self.u, dtype=float)
        meta = {}
        if values.size and (not np.all(np.isfinite(values))
                            or float(np.max(values)) > 1e7):
            meta["allow_blowup"] = True
        return RadialProfile(grid=grid, values=values, du=du, meta=meta)


class ClassifyRequest(_Strict):
    params: ParamsModel


class BernsteinRequest(_Strict):
    params: ParamsModel
    beta: Optional[float] = None
    lam: Optional[float] = None


class FeasibilityRequest(_Strict):
    N: int
    m: float
    resolution: int = 200
    q_max: Optional[float] = None
    include_points: bool = False


class SolveRequest(_Strict):
    params: ParamsModel
    bounds: BoundsModel
    lam: float = 0.0
    R: float = 1.0
    n: int = 2048
    include_alpha2_term: bool = False
    omega: float = 0.5
    k_max: int = 500
    homotopy: bool = False
    lam0: Optional[float] = None
    schedule: Optional[List[float]] = None


class EigenRequest(_Strict):
    N: int
    m: float
    R: float = 1.0
    n: int = 4096


class HarnackRequest(_Strict):
    profile: ProfileModel
    R: float
    lam: float
    m: float = 2.0
    center: float = 0.0


class WeakHarnackRequest(_Strict):
    profile: ProfileModel
    params: ParamsModel
    R: float
    gamma: float


class ScalingsRequest(_Strict):
    params: ParamsModel
    gamma: float
    mu: float
    radii: List[float]
    profile: Optional[ProfileModel] = None
    r_min: Optional[float] = None
    R: Optional[float] = None
    n: int = 4096


class BubbleRequest(_Strict):
    params: ParamsModel
    C_max: float = 10.0
    r_max: float = 20.0
    tol: float = 1e-8
    grid_size: int = 48
    refinements: int = 4
    with_profile: bool = False
    R: float = 10.0
    n: int = 2048


class BlowupRequest(_Strict):
    params: ParamsModel
    R: float = 1.0
    ladder: List[float] = [1e2, 1e3, 1e4]
    n: int = 2048
    cauchy_tol: float = 1e-3
    with_profile: bool = False


class ProbeRequest(_Strict):
    params: ParamsModel
    bounds: BoundsModel
    R: float = 1.0
    ladder: Optional[List[float]] = None
    n: int = 2048
    jobs: Optional[int] = None


class LiouvilleRequest(_Strict):
    params: ParamsModel
    r0: float = 1.0
    slopes: List[float] = [-1.0, -0.1, 0.1, 1.0]
    R_max: float = 100.0
