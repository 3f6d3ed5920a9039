from typing import Optional, List, Dict, Literal, Callable, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from harper.config import settings
from harper.exceptions import DimensionError, SymmetryError, DomainError, NumericalError


def _frozen_array(value, dtype) -> np.ndarray:
    arr = np.array(value, dtype=dtype)
    arr.setflags(write=False)
    return arr


class ArrayModel(BaseModel):
    """Base for immutable models holding numpy arrays"""
    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)


# Matrix Models
class HermitianCirculant(ArrayModel):
    n: int
    first_row: np.ndarray  # c_j; C[j, k] = c[(k - j) mod n]

    @field_validator("first_row", mode="before")
    @classmethod
    def _to_complex(cls, v):
        return _frozen_array(v, complex)

    @model_validator(mode="after")
    def _check(self):
        if self.n < 3:
            raise DomainError(f"circulant needs n >= 3, got {self.n}")
        if self.first_row.shape != (self.n,):
            raise DimensionError(f"first row has shape {self.first_row.shape}, expected ({self.n},)")
        mirrored = np.conj(np.roll(self.first_row[::-1], 1))  # conj(c_{n-j})
        if not np.allclose(self.first_row, mirrored, rtol=0.0, atol=settings.hermitian_tolerance):
            raise SymmetryError("first row violates c_j = conj(c_{n-j})")
        return self

    def to_dense(self) -> np.ndarray:
        from scipy.linalg import circulant
        return np.array(circulant(self.first_row).T)


class RealDiagonal(ArrayModel):
    entries: np.ndarray

    @field_validator("entries", mode="before")
    @classmethod
    def _to_real(cls, v):
        arr = _frozen_array(v, float)
        if arr.ndim != 1:
            raise DimensionError("diagonal entries must be a vector")
        if not np.all(np.isfinite(arr)):
            raise DomainError("diagonal entries must be finite")
        return arr

    @property
    def n(self) -> int:
        return self.entries.shape[0]


class CirculantPlusDiagonal(ArrayModel):
    circulant: HermitianCirculant
    diagonal: RealDiagonal

    @model_validator(mode="after")
    def _matching_size(self):
        if self.circulant.n != self.diagonal.n:
            raise DimensionError(
                f"circulant is {self.circulant.n}x{self.circulant.n} but diagonal has {self.diagonal.n} entries"
            )
        return self

    @property
    def n(self) -> int:
        return self.circulant.n

    def to_dense(self) -> np.ndarray:
        dense = self.circulant.to_dense()
        dense[np.diag_indices(self.n)] += self.diagonal.entries
        if np.allclose(dense.imag, 0.0):
            return dense.real.copy()
        return dense


class Spectrum(ArrayModel):
    eigenvalues: np.ndarray  # descending
    eigenvectors: Optional[np.ndarray] = None  # column i pairs with eigenvalue i
    frequency_perm: Optional[np.ndarray] = None  # frequency_perm[i] = sigma^{-1}(i)

    @field_validator("eigenvalues", mode="before")
    @classmethod
    def _sorted(cls, v):
        arr = _frozen_array(v, float)
        if np.any(np.diff(arr) > 1e-12):
            raise DomainError("eigenvalues must be sorted descending")
        return arr

    @field_validator("eigenvectors", mode="before")
    @classmethod
    def _orthonormal(cls, v):
        if v is None:
            return None
        arr = _frozen_array(v, complex)
        gram = arr.conj().T @ arr
        if not np.allclose(gram, np.eye(arr.shape[1]), rtol=0.0, atol=1e-10):
            raise NumericalError("eigenvectors are not orthonormal")
        return arr

    @field_validator("frequency_perm", mode="before")
    @classmethod
    def _perm(cls, v):
        if v is None:
            return None
        arr = _frozen_array(v, int)
        if not np.array_equal(np.sort(arr), np.arange(arr.shape[0])):
            raise DomainError("frequency_perm is not a permutation")
        return arr

    @property
    def n(self) -> int:
        return self.eigenvalues.shape[0]

    def residuals(self, matrix: np.ndarray) -> np.ndarray:
        """Per-pair residual norms ||M v - lambda v||"""
        if self.eigenvectors is None:
            raise DomainError("spectrum has no eigenvectors")
        diff = matrix @ self.eigenvectors - self.eigenvectors * self.eigenvalues
        return np.linalg.norm(diff, axis=0)


# Bound Models
class ConcentrationReport(BaseModel):
    set_S: Tuple[int, ...]
    set_T: Tuple[int, ...]
    eps_S: float = Field(ge=0)
    eps_T: float = Field(ge=0)
    lhs: float  # |S||T|
    rhs: float  # n (1 - (eps_S + eps_T))_+^2


class BoundReport(BaseModel):
    model_config = ConfigDict(populate_by_name=True)

    variant: Literal["theorem1", "improved", "smallest"]
    n: int
    k: int = Field(ge=1)
    k_prime: int = Field(ge=1)
    weyl_term: float = Field(serialization_alias="weyl")
    correction: float = Field(ge=0)
    bound: float

    @model_validator(mode="after")
    def _consistent(self):
        if self.k * self.k_prime >= self.n:
            raise DomainError(f"k*k' = {self.k * self.k_prime} must be < n = {self.n}")
        sign = 1.0 if self.variant == "smallest" else -1.0
        if not np.isclose(self.bound, self.weyl_term + sign * self.correction, rtol=0.0, atol=1e-14):
            raise DomainError("bound must equal weyl term -/+ correction")
        return self

    def to_record(self) -> Dict:
        return self.model_dump(by_alias=True, exclude={"n"})


# Oscillator Models
class ScaledOperator(ArrayModel):
    n: int
    base: CirculantPlusDiagonal

    def to_dense(self) -> np.ndarray:
        return self.n * (np.eye(self.n) - self.base.to_dense())

    def apply(self, v: np.ndarray) -> np.ndarray:
        return self.to_dense() @ v


class HermiteApproximant(ArrayModel):
    k: int = Field(ge=1, le=5)
    n: int
    values: np.ndarray

    @field_validator("values", mode="before")
    @classmethod
    def _unit(cls, v):
        arr = _frozen_array(v, float)
        if not np.isclose(np.linalg.norm(arr), 1.0, atol=1e-12):
            raise DomainError("approximant must have unit norm")
        return arr


# Markov Chain Models
class SubstochasticMatrix(ArrayModel):
    entries: np.ndarray

    @field_validator("entries", mode="before")
    @classmethod
    def _substochastic(cls, v):
        arr = _frozen_array(v, float)
        if np.any(arr < 0):
            raise DomainError("substochastic matrix has negative entries")
        if np.any(arr.sum(axis=1) > 1 + 1e-12):
            raise DomainError("substochastic matrix has a row sum above 1")
        return arr

    @property
    def n(self) -> int:
        return self.entries.shape[0]


class AbsorbingChain(ArrayModel):
    entries: np.ndarray  # state 0 is the cemetery

    @field_validator("entries", mode="before")
    @classmethod
    def _stochastic(cls, v):
        arr = _frozen_array(v, float)
        if not np.allclose(arr.sum(axis=1), 1.0, rtol=0.0, atol=1e-12):
            raise DomainError("absorbing chain rows must sum to 1")
        first = np.zeros(arr.shape[0])
        first[0] = 1.0
        if not np.array_equal(arr[0], first):
            raise DomainError("state 0 must be absorbing")
        return arr

    @property
    def absorption(self) -> np.ndarray:
        """a_i, the one-step absorption probabilities of the live states"""
        return self.entries[1:, 0]


class KillRates(ArrayModel):
    u: np.ndarray  # indexed by site on Z/nZ

    @field_validator("u", mode="before")
    @classmethod
    def _nonnegative(cls, v):
        arr = _frozen_array(v, float)
        if np.any(arr < 0) or not np.all(np.isfinite(arr)):
            raise DomainError("killing rates must be finite and nonnegative")
        return arr

    @property
    def n(self) -> int:
        return self.u.shape[0]

    def rescaled(self, factor: float) -> "KillRates":
        return KillRates(u=self.u * factor)


class WalkTrace(ArrayModel):
    start: int
    states: np.ndarray  # positions on Z, start + displacement
    holding_times: np.ndarray
    absorbed: bool
    tau: float
    tau_b: Optional[float] = None  # exit time, None when killed first
    local_times: Dict[int, float]  # signed displacement -> occupation time

    @field_validator("states", mode="before")
    @classmethod
    def _states(cls, v):
        return _frozen_array(v, np.int64)

    @field_validator("holding_times", mode="before")
    @classmethod
    def _times(cls, v):
        return _frozen_array(v, float)

    @model_validator(mode="after")
    def _consistent(self):
        if self.states.shape != self.holding_times.shape:
            raise DimensionError("one holding time per visited state")
        if np.any(np.abs(np.diff(self.states)) != 1):
            raise DomainError("walk jumps must be nearest-neighbour")
        total = float(self.holding_times.sum())
        if not np.isclose(total, self.tau, rtol=1e-9, atol=1e-12):
            raise DomainError("holding times must sum to tau")
        if not np.isclose(sum(self.local_times.values()), self.tau, rtol=1e-9, atol=1e-12):
            raise DomainError("local times must sum to tau")
        return self

    @property
    def steps(self) -> int:
        return self.states.shape[0] - 1

    def reflected_local_time(self, y: int) -> float:
        if y == 0:
            return self.local_times.get(0, 0.0)
        return self.local_times.get(y, 0.0) + self.local_times.get(-y, 0.0)


class ExitSample(ArrayModel):
    """Batch of killed-walk runs stopped at min(absorption, exit from [-b, b])"""
    b: int
    tau: np.ndarray
    steps: np.ndarray
    absorbed: np.ndarray
    local_times: np.ndarray  # trials x (b+1), indexed by |displacement|

    @property
    def trials(self) -> int:
        return self.tau.shape[0]


class SurvivalReport(BaseModel):
    n: int
    b: int
    trials: int
    seed: int
    start: int
    survival: float
    standard_error: float
    f_b: float
    g_b: float


class LambdaStarReport(BaseModel):
    n: int
    trials: int
    seed: int
    horizon: float
    window_start: float
    survivors_at_window: int
    lambda_star_estimate: float
    lambda_star_exact: Optional[float] = None
    clock_factor: float = 1.0


class AbsorbReport(BaseModel):
    n: int
    a: int
    b: int
    trials: int
    seed: int
    survival: float
    g_b: float
    lambda_star_estimate: float
    lambda_star_exact: float
    clock_factor: float


# Group Models
class HeisenbergElement(BaseModel):
    model_config = ConfigDict(frozen=True)

    n: int = Field(ge=2)
    x: int
    y: int
    z: int

    @model_validator(mode="before")
    @classmethod
    def _reduce(cls, data):
        if isinstance(data, dict) and "n" in data:
            data = dict(data)
            for key in ("x", "y", "z"):
                if key in data:
                    data[key] = int(data[key]) % int(data["n"])
        return data


class AffineElement(BaseModel):
    model_config = ConfigDict(frozen=True)

    p: int = Field(ge=2)
    a: int
    b: int

    @model_validator(mode="before")
    @classmethod
    def _reduce(cls, data):
        if isinstance(data, dict) and "p" in data:
            data = dict(data)
            p = int(data["p"])
            if "a" in data:
                data["a"] = int(data["a"]) % p
                if data["a"] == 0:
                    raise DomainError("affine element needs a != 0 mod p")
            if "b" in data:
                data["b"] = int(data["b"]) % p
        return data


class GroupDistribution(ArrayModel):
    group: Literal["heisenberg", "affine"]
    modulus: int
    weights: np.ndarray  # indexed by element index, see walks.groups

    @field_validator("weights", mode="before")
    @classmethod
    def _weights(cls, v):
        return _frozen_array(v, float)

    @model_validator(mode="after")
    def _probability(self):
        expected = self.modulus ** 3 if self.group == "heisenberg" else self.modulus * (self.modulus - 1)
        if self.weights.shape != (expected,):
            raise DimensionError(f"{self.group} group of modulus {self.modulus} has {expected} elements")
        if np.any(self.weights < -1e-15):
            raise DomainError("weights must be nonnegative")
        if not np.isclose(self.weights.sum(), 1.0, rtol=0.0, atol=1e-12):
            raise DomainError("weights must sum to 1")
        return self

    @property
    def order(self) -> int:
        return self.weights.shape[0]


class Irrep(BaseModel):
    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    label: str
    dim: int = Field(ge=1)
    evaluate: Callable[[int], np.ndarray]  # element index -> dim x dim matrix


class IrrepTable(BaseModel):
    group: Literal["heisenberg", "affine"]
    modulus: int
    order: int
    irreps: List[Irrep]

    @model_validator(mode="after")
    def _complete(self):
        total = sum(rho.dim ** 2 for rho in self.irreps)
        if total != self.order:
            raise DomainError(f"sum of squared dimensions {total} != group order {self.order}")
        return self

    @property
    def nontrivial(self) -> List[Irrep]:
        return self.irreps[1:]


class ChiSquareReport(BaseModel):
    group: Literal["heisenberg", "affine"]
    modulus: int
    k: int
    chi_square: float
    tv_upper: float  # sqrt(chi_square) / 2
    operator_norm_bound: Optional[float] = None


# Bulk Models
class EmpiricalMeasure(ArrayModel):
    atoms: np.ndarray  # ascending, mass 1/n each

    @field_validator("atoms", mode="before")
    @classmethod
    def _atoms(cls, v):
        arr = _frozen_array(v, float)
        if arr.ndim != 1 or arr.shape[0] == 0:
            raise DimensionError("empirical measure needs at least one atom")
        if np.any(np.diff(arr) < 0):
            raise DomainError("atoms must be sorted ascending")
        return arr

    @property
    def n(self) -> int:
        return self.atoms.shape[0]


# Run Models
REQUIRED_FIELDS = {
    "spectrum": ("n",),
    "bound": ("n",),
    "oscillator": ("n",),
    "absorb": ("n",),
    "walk": ("p", "group"),
    "bulk": ("n",),
}

DEFAULT_FORMATS = {
    "spectrum": "csv",
    "bound": "json",
    "oscillator": "csv",
    "absorb": "json",
    "walk": "csv",
    "bulk": "csv",
}


class RunConfig(BaseModel):
    """One validated command invocation; seed 0 makes the default run deterministic"""
    command: Literal["spectrum", "bound", "oscillator", "absorb", "walk", "bulk"]
    group: Optional[Literal["heisenberg", "affine"]] = None
    family: Literal["harper", "affine", "mp3"] = "harper"
    variant: Literal["theorem1", "improved", "smallest"] = "theorem1"
    n: Optional[int] = Field(default=None, ge=1)
    a: int = 1
    c: int = 1
    p: Optional[int] = None
    k: Optional[int] = Field(default=None, ge=1)
    k_prime: Optional[int] = Field(default=None, ge=1)
    b: int = Field(default=16, ge=0)
    trials: int = Field(default=10_000, ge=1)
    seed: int = Field(default=0, ge=0)
    start: int = Field(default=0, ge=0)
    bins: int = 100
    k_max: int = Field(default=30, ge=1)
    sizes: Optional[List[int]] = None
    horizon: Optional[float] = Field(default=None, gt=0)
    out_path: Optional[str] = None
    trace_out: Optional[str] = None
    matrix_out: Optional[str] = None
    format: Optional[Literal["csv", "json"]] = None

    @model_validator(mode="after")
    def _required(self):
        missing = [name for name in REQUIRED_FIELDS[self.command] if getattr(self, name) is None]
        if missing:
            raise ValueError(f"command '{self.command}' requires: {', '.join(missing)}")
        return self

    @property
    def output_format(self) -> str:
        return self.format or DEFAULT_FORMATS[self.command]


# Self-test Models
class CheckResult(BaseModel):
    name: str
    passed: bool
    detail: str
    seconds: float
