import itertools
import json
import logging
import math
import re
from pathlib import Path
from typing import Any, Literal

import numpy as np
import scipy.sparse as sp
import yaml
from pydantic import BaseModel, ConfigDict, Field, ValidationError, model_validator

from stairsolve.errors import InvalidArgumentError
from stairsolve.sparse import CanonicalChainMatrix, canonicalize, scalar_bandwidths

logger = logging.getLogger("Models")

ModelName = Literal["mutex", "hess", "ncd"]

MAX_MUTEX_PROCESSES = 30


class _Params(BaseModel):
    model_config = ConfigDict(frozen=True, extra="forbid")

    @classmethod
    def create(cls, **values):
        try:
            return cls(**values)
        except ValidationError as e:
            raise InvalidArgumentError(str(e)) from e


class MutexParams(_Params):
    """``lam`` are wake rates, ``mu`` release rates; a single value applies to every process.

    Per-process rates may be given as one string separated by ``;`` or ``,``.
    """

    n: int = Field(ge=1, le=MAX_MUTEX_PROCESSES)
    r: int = Field(ge=1)
    lam: list[float]
    mu: list[float]

    @model_validator(mode="before")
    @classmethod
    def _broadcast(cls, data: Any) -> Any:
        if not isinstance(data, dict):
            return data
        data = dict(data)
        n = int(data.get("n", 0))
        for name, default in (("lam", 1.0), ("mu", 2.0)):
            value = data.get(name, default)
            if isinstance(value, str):
                value = [float(v) for v in re.split(r"[,;]", value) if v.strip()]
            elif isinstance(value, (int, float)):
                value = [float(value)]
            if len(value) == 1:
                value = list(value) * n
            data[name] = value
        return data

    @model_validator(mode="after")
    def _check(self) -> "MutexParams":
        if self.r > self.n:
            raise ValueError(f"concurrency limit r={self.r} exceeds n={self.n}")
        for name in ("lam", "mu"):
            rates = getattr(self, name)
            if len(rates) != self.n:
                raise ValueError(f"{name} needs {self.n} rates, got {len(rates)}")
            if any(v <= 0 for v in rates):
                raise ValueError(f"{name} rates must be positive")
        return self


class HessParams(_Params):
    k: int = Field(ge=1)
    n: int = Field(ge=2)
    lower_bandwidth: int = Field(default=4, ge=1)
    density: float = Field(default=1.0, gt=0, le=1)
    seed: int = Field(default=0, ge=0)


class NcdParams(_Params):
    groups: int = Field(ge=2)
    group_size: int = Field(ge=2)
    scale: float = Field(default=1.0, gt=0)
    coupling: float = Field(default=1e-5, gt=0)
    coupling_ratio: float = Field(default=0.5, gt=0, le=1)
    seed: int = Field(default=0, ge=0)


def mutex_state_count(n: int, r: int) -> int:
    if n < 1 or not 1 <= r <= n:
        raise InvalidArgumentError(f"need 1 <= r <= n, got n={n}, r={r}")
    return sum(math.comb(n, k) for k in range(r + 1))


def _mutex_states(p: MutexParams) -> tuple[np.ndarray, np.ndarray]:
    # admissible subsets only, ordered by bitmask value
    masks = [
        sum(1 << b for b in subset) for size in range(p.r + 1) for subset in itertools.combinations(range(p.n), size)
    ]
    states = np.sort(np.asarray(masks, dtype=np.int64))
    count = np.zeros_like(states)
    for b in range(p.n):
        count += (states >> b) & 1
    return states, count


def _assemble(size: int, dst: np.ndarray, src: np.ndarray, rates: np.ndarray) -> CanonicalChainMatrix:
    out_rate = np.bincount(src, weights=rates, minlength=size)
    rows = np.concatenate([dst, np.arange(size)])
    cols = np.concatenate([src, np.arange(size)])
    vals = np.concatenate([-rates, out_rate])
    return canonicalize(sp.csc_matrix((vals, (rows, cols)), shape=(size, size)))


def gen_mutex(p: MutexParams) -> CanonicalChainMatrix:
    states, count = _mutex_states(p)
    size = states.size

    src, dst, rates = [], [], []
    for i in range(p.n):
        bit = 1 << i
        holding = (states & bit) != 0
        released = np.flatnonzero(holding)
        src.append(released)
        dst.append(np.searchsorted(states, states[released] ^ bit))
        rates.append(np.full(released.size, p.mu[i]))
        woken = np.flatnonzero(~holding & (count < p.r))
        src.append(woken)
        dst.append(np.searchsorted(states, states[woken] | bit))
        rates.append(np.full(woken.size, p.lam[i]))

    a = _assemble(size, np.concatenate(dst), np.concatenate(src), np.concatenate(rates))
    logger.info(f"mutex n={p.n} r={p.r}: N={a.n}, nnz={a.nnz}")
    return a


def mutex_product_form(p: MutexParams) -> np.ndarray:
    """Closed-form stationary vector, pi(S) proportional to the product of lam_i/mu_i over S."""
    states, _ = _mutex_states(p)
    log_ratio = np.log(np.asarray(p.lam) / np.asarray(p.mu))
    weights = np.zeros(states.size)
    for b in range(p.n):
        weights += ((states >> b) & 1) * log_ratio[b]
    weights = np.exp(weights - weights.max())
    return weights / weights.sum()


def gen_random_block_hessenberg(p: HessParams) -> CanonicalChainMatrix:
    rng = np.random.default_rng(p.seed)
    size = p.k * p.n
    dst, src, mags = [], [], []
    for block in range(p.n):
        r0 = block * p.k
        c0 = max(0, block - p.lower_bandwidth) * p.k
        c1 = min(p.n, block + 2) * p.k
        mask = rng.random((p.k, c1 - c0)) < p.density
        values = 1.0 - rng.random((p.k, c1 - c0))
        local = np.arange(p.k)
        diag_col = r0 + local - c0
        # first sub- and super-diagonal entries keep the chain irreducible
        for shift in (-1, 1):
            col = diag_col + shift
            ok = (col >= 0) & (col < c1 - c0) & (r0 + local + shift >= 0) & (r0 + local + shift < size)
            mask[local[ok], col[ok]] = True
        mask[local, diag_col] = False
        rr, cc = np.nonzero(mask)
        dst.append(r0 + rr)
        src.append(c0 + cc)
        mags.append(values[rr, cc])

    a = _assemble(size, np.concatenate(dst), np.concatenate(src), np.concatenate(mags))
    logger.info(f"hess k={p.k} n={p.n} seed={p.seed}: N={a.n}, nnz={a.nnz}")
    return a


def gen_ncd(p: NcdParams) -> CanonicalChainMatrix:
    rng = np.random.default_rng(p.seed)
    s = p.group_size
    size = p.groups * s
    local_dst, local_src = np.nonzero(~np.eye(s, dtype=bool))
    dst, src, mags = [], [], []
    for g in range(p.groups):
        values = (1.0 - 0.5 * rng.random((s, s))) * p.scale
        dst.append(g * s + local_dst)
        src.append(g * s + local_src)
        mags.append(values[local_dst, local_src])
    last = np.arange(p.groups - 1) * s + s - 1
    first = last + 1
    # the stronger direction of the coupling alternates from link to link
    even = np.arange(last.size) % 2 == 0
    forward = np.where(even, 1.0, p.coupling_ratio) * p.coupling
    backward = np.where(even, p.coupling_ratio, 1.0) * p.coupling
    dst += [first, last]
    src += [last, first]
    mags += [forward, backward]

    a = _assemble(size, np.concatenate(dst), np.concatenate(src), np.concatenate(mags))
    logger.info(f"ncd groups={p.groups} size={s} coupling={p.coupling:g}: N={a.n}")
    return a


_GENERATORS = {
    "mutex": (MutexParams, gen_mutex),
    "hess": (HessParams, gen_random_block_hessenberg),
    "ncd": (NcdParams, gen_ncd),
}


def parse_params(pairs: list[str]) -> dict[str, str]:
    params = {}
    for pair in pairs:
        key, sep, value = pair.partition("=")
        if not sep or not key.strip():
            raise InvalidArgumentError(f"expected key=value, got '{pair}'")
        params[key.strip()] = value.strip()
    return params


def load_params(path: str | Path) -> dict[str, Any]:
    path = Path(path)
    with open(path) as f:
        if path.suffix in (".yaml", ".yml"):
            data = yaml.safe_load(f) or {}
        elif path.suffix == ".json":
            data = json.load(f)
        else:
            lines = [ln.strip() for ln in f if ln.strip() and not ln.lstrip().startswith("#")]
            data = parse_params(lines)
    if not isinstance(data, dict):
        raise InvalidArgumentError(f"{path}: parameters must be a mapping")
    return data


def generate(model: ModelName, params: dict[str, Any]) -> tuple[CanonicalChainMatrix, dict[str, Any]]:
    try:
        params_cls, generator = _GENERATORS[model]
    except KeyError:
        raise InvalidArgumentError(f"unknown model '{model}', expected one of {sorted(_GENERATORS)}") from None
    p = params_cls.create(**params)
    a = generator(p)
    lower, upper = scalar_bandwidths(a)
    sidecar = {
        "model": model,
        "params": p.model_dump(),
        "seed": getattr(p, "seed", None),
        "N": a.n,
        "nnz": a.nnz,
        "lower_bandwidth": lower,
        "upper_bandwidth": upper,
    }
    return a, sidecar
