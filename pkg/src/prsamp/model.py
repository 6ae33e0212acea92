"""Shared domain types: signals, matrices, problem instances, configs, records."""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass, field
from typing import Optional, Union

import numpy as np

from .channels import CHANNEL_AWGN, CHANNEL_RICIAN, PRIOR_BINARY, PRIOR_GAUSSIAN

BINARY01 = "binary01"
COMPLEX_GAUSSIAN = "complex_gaussian"
CUSTOM = "custom"
MATRIX_KINDS = (BINARY01, COMPLEX_GAUSSIAN, CUSTOM)


@dataclass(frozen=True)
class ComplexSignal:
    values: np.ndarray
    shape2d: Optional[tuple[int, int]] = None

    def __post_init__(self):
        object.__setattr__(self, "values", np.asarray(self.values, dtype=complex).ravel())
        if self.shape2d is not None:
            object.__setattr__(self, "shape2d", tuple(int(d) for d in self.shape2d))

    @property
    def n(self) -> int:
        return self.values.size

    def violations(self, name: str = "signal") -> list[str]:
        out = []
        if self.n < 1:
            out.append(f"{name}.values: length N >= 1")
        if not np.all(np.isfinite(self.values)):
            out.append(f"{name}.values: entries finite")
        if self.shape2d is not None and self.shape2d[0] * self.shape2d[1] != self.n:
            out.append(f"{name}.shape2d: rows*cols = N")
        return out


@dataclass(frozen=True)
class MeasurementMatrix:
    """Dense M x N projection matrix with its cached elementwise |H|^2."""

    entries: np.ndarray
    kind: str = CUSTOM
    abs2: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        h = np.ascontiguousarray(np.atleast_2d(np.asarray(self.entries, dtype=complex)))
        object.__setattr__(self, "entries", h)
        object.__setattr__(self, "abs2", h.real**2 + h.imag**2)

    @property
    def shape(self) -> tuple[int, int]:
        return self.entries.shape

    def violations(self) -> list[str]:
        out = []
        m, n = self.shape
        if m < 1 or n < 1:
            out.append("matrix: M >= 1 and N >= 1")
        if self.kind not in MATRIX_KINDS:
            out.append(f"matrix.kind: one of {MATRIX_KINDS}")
        if not np.all(np.isfinite(self.entries)):
            out.append("matrix.entries: entries finite")
        elif self.kind == BINARY01 and not np.all(
            (self.entries == 0) | (self.entries == 1)
        ):
            out.append("matrix.entries: entries in {0,1}")
        return out


@dataclass(frozen=True)
class ProblemInstance:
    """Measurements of ``H x + w`` with ``w ~ CN(0, delta)``.

    ``y`` holds magnitudes ``|H x + w|`` (real) for phase retrieval, or the
    complex projections themselves for a linear (AWGN) instance.
    """

    matrix: MeasurementMatrix
    y: np.ndarray
    delta: float = 0.0
    ground_truth: Optional[ComplexSignal] = None

    def __post_init__(self):
        y = np.asarray(self.y)
        y = y.astype(complex if np.iscomplexobj(y) else float).ravel()
        object.__setattr__(self, "y", y)

    @property
    def linear(self) -> bool:
        return np.iscomplexobj(self.y)

    @property
    def m(self) -> int:
        return self.matrix.shape[0]

    @property
    def n(self) -> int:
        return self.matrix.shape[1]


def validate(instance: ProblemInstance) -> list[str]:
    """List every broken invariant of ``instance``; empty when well-formed."""
    out = instance.matrix.violations()
    y = instance.y
    if y.size != instance.m:
        out.append("y: length(y) = M")
    if not np.all(np.isfinite(y)):
        out.append("y: entries finite")
    if not instance.linear and np.any(y < 0):
        out.append("y: y[mu] >= 0")
    if not (np.isfinite(instance.delta) and instance.delta >= 0):
        out.append("delta: delta >= 0")
    if instance.ground_truth is not None:
        out.extend(instance.ground_truth.violations("ground_truth"))
        if instance.ground_truth.n != instance.n:
            out.append("ground_truth: length N matches matrix")
    return out


@dataclass(frozen=True)
class GaussianPrior:
    mean: complex = 0.0
    sigma: float = 1.0

    code = PRIOR_GAUSSIAN

    def __post_init__(self):
        if not self.sigma > 0:
            raise ValueError("GaussianPrior needs sigma > 0")

    @property
    def params(self) -> tuple[complex, float]:
        return complex(self.mean), float(self.sigma)


@dataclass(frozen=True)
class BinaryPrior:
    rho: float = 0.5

    code = PRIOR_BINARY

    def __post_init__(self):
        if not 0 < self.rho < 1:
            raise ValueError("BinaryPrior needs 0 < rho < 1")

    @property
    def params(self) -> tuple[complex, float]:
        return 0j, float(self.rho)


PriorSpec = Union[GaussianPrior, BinaryPrior]


@dataclass(frozen=True)
class ChannelSpec:
    """Output channel; ``delta=None`` takes the noise level from the instance."""

    kind: str = "rician"
    delta: Optional[float] = None

    def __post_init__(self):
        if self.kind not in ("rician", "awgn"):
            raise ValueError(f"unknown channel {self.kind!r}")
        if self.delta is not None and not self.delta >= 0:
            raise ValueError("channel delta must be >= 0")

    @property
    def code(self) -> int:
        return CHANNEL_RICIAN if self.kind == "rician" else CHANNEL_AWGN


@dataclass(frozen=True)
class SolverConfig:
    """prSAMP tunables.

    ``x0`` is ``"random"`` (draws from the input prior with the run seed),
    ``"constant"`` (every entry equal to ``x0_value``) or an explicit vector.
    """

    alpha: float = 0.9
    alpha2d: float = 0.0
    t_max: int = 64
    epsilon: Optional[float] = None
    v0: Optional[float] = None
    restarts: int = 1
    input_prior: PriorSpec = GaussianPrior()
    output_channel: ChannelSpec = ChannelSpec()
    x0: Union[str, np.ndarray] = "random"
    x0_value: complex = 0.0
    xv0: float = 0.5
    seed: int = 0
    clamp_vmin: float = 1e-12
    damp_output: bool = False

    def __post_init__(self):
        if not 0 <= self.alpha < 1:
            raise ValueError("alpha must lie in [0, 1)")
        if not 0 <= self.alpha2d < 1:
            raise ValueError("alpha2d must lie in [0, 1)")
        if not 0 < self.xv0 <= 1:
            raise ValueError("xv0 must lie in (0, 1]")
        if self.t_max < 1:
            raise ValueError("t_max must be positive")
        if self.restarts < 1:
            raise ValueError("restarts must be >= 1")
        if self.epsilon is not None and not self.epsilon > 0:
            raise ValueError("epsilon must be > 0")
        if self.v0 is not None and not self.v0 > 0:
            raise ValueError("v0 must be > 0")
        if not self.clamp_vmin > 0:
            raise ValueError("clamp_vmin must be > 0")
        if not 0 <= self.seed < 2**64:
            raise ValueError("seed must be a 64-bit unsigned integer")
        if isinstance(self.x0, str) and self.x0 not in ("random", "constant"):
            raise ValueError("x0 must be 'random', 'constant' or a vector")

    def replace(self, **changes) -> "SolverConfig":
        return dataclasses.replace(self, **changes)

    def resolved_epsilon(self, n: int) -> float:
        return self.epsilon if self.epsilon is not None else 1e-8 * n

    def resolved_v0(self) -> float:
        return self.v0 if self.v0 is not None else self.xv0

    def summary(self) -> dict:
        """Flat scalar view, used for run records and config files."""
        prior = self.input_prior
        out = {
            "alpha": self.alpha,
            "alpha2d": self.alpha2d,
            "t_max": self.t_max,
            "epsilon": self.epsilon,
            "v0": self.v0,
            "restarts": self.restarts,
            "prior": "gaussian" if isinstance(prior, GaussianPrior) else "binary",
            "channel": self.output_channel.kind,
            "channel_delta": self.output_channel.delta,
            "x0": self.x0 if isinstance(self.x0, str) else "vector",
            "xv0": self.xv0,
            "seed": self.seed,
            "clamp_vmin": self.clamp_vmin,
            "damp_output": self.damp_output,
        }
        if isinstance(prior, GaussianPrior):
            out["prior_mean"] = complex(prior.mean)
            out["prior_sigma"] = prior.sigma
        else:
            out["rho"] = prior.rho
        return out


@dataclass
class SolverState:
    """Mutable per-run fields.  ``g_prev`` is the score used by the Onsager
    term of ``omega`` during the current iteration."""

    x_a: np.ndarray
    x_v: np.ndarray
    omega: np.ndarray
    v: np.ndarray
    g: np.ndarray
    dg: np.ndarray
    g_prev: np.ndarray
    r: np.ndarray
    s: np.ndarray
    t: int = 0

    def copy(self) -> "SolverState":
        return dataclasses.replace(
            self, **{f.name: np.copy(getattr(self, f.name))
                     for f in dataclasses.fields(self) if f.name != "t"}
        )


@dataclass
class TrialRecord:
    config: dict
    converged: bool
    iterations_used: int
    nr: float
    seed: int
    wall_time: float
    nmse: Optional[float] = None
    correlation: Optional[float] = None

    def to_text(self) -> str:
        lines = [
            f"converged={int(self.converged)}",
            f"iterations_used={self.iterations_used}",
            f"nr={self.nr!r}",
            f"nmse={'' if self.nmse is None else repr(self.nmse)}",
            f"correlation={'' if self.correlation is None else repr(self.correlation)}",
            f"seed={self.seed}",
            f"wall_time={self.wall_time!r}",
        ]
        lines += [f"config.{k}={'' if v is None else v}" for k, v in self.config.items()]
        return "\n".join(lines) + "\n"
