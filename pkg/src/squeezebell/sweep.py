"""Grid search over real two-mode single-rail networks.

Each grid point fixes (θ1, r1, r2) and one of the four ψ constraints, which
determines θ2. Work is split into chunks of one (constraint, r1, r2) triple
holding the whole θ1 axis; chunk boundaries never depend on the worker
count, so the output is bit-identical however it is scheduled.
"""

from __future__ import annotations

import csv
import json
import math
import warnings
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Iterator, Sequence

import numpy as np

from .discrimination import Ratio, Rule, parse_rule, success_from_probs
from .errors import InvalidConfigurationError, InvalidInputError
from .fock import BELL_STATES
from .kernels import (
    Constraint,
    apply_poly,
    db_from_r,
    exp_quadratic_tensor,
    fock_scale,
    solve_theta2,
    sr_coefficients,
    sr_polys,
)

CSV_HEADER = (
    "theta1", "r1", "r2", "constraint", "theta2",
    "p_psi_plus", "p_psi_minus", "p_phi_plus", "p_phi_minus", "p_overall", "deficit",
)
ALL_CONSTRAINTS = tuple(Constraint)


@dataclass(frozen=True)
class SweepConfig:
    """Grid definition. θ1 runs over ``[0, theta1_stop)``; r grids include both ends."""

    theta1_step: float = 0.01 * math.pi
    theta1_stop: float = 2 * math.pi
    r_start: float = 0.0
    r_stop: float = 1.0
    r_step: float = 0.05
    constraints: tuple[Constraint, ...] = ALL_CONSTRAINTS
    cap: int = 26
    rule: Rule = Ratio(400)
    workers: int = 1

    def __post_init__(self):
        object.__setattr__(self, "constraints", tuple(Constraint(c) for c in self.constraints))
        object.__setattr__(self, "rule", parse_rule(self.rule))
        if not self.constraints:
            raise InvalidConfigurationError("at least one constraint is required")
        if self.cap < 2:
            raise InvalidConfigurationError(f"cap must be >= 2, got {self.cap}")
        if not (self.theta1_step > 0 and self.theta1_stop > 0):
            raise InvalidConfigurationError("theta1 step and stop must be positive")
        if not (self.r_step > 0 and 0 <= self.r_start <= self.r_stop):
            raise InvalidConfigurationError("need r_step > 0 and 0 <= r_start <= r_stop")
        if self.workers < 1:
            raise InvalidConfigurationError("workers must be >= 1")

    @classmethod
    def quick(cls, **overrides) -> "SweepConfig":
        base = dict(theta1_step=0.1 * math.pi, r_step=0.1, cap=16)
        base.update(overrides)
        return cls(**base)

    def theta1_grid(self) -> np.ndarray:
        n = int(round(self.theta1_stop / self.theta1_step))
        return np.arange(n) * self.theta1_step

    def r_grid(self) -> np.ndarray:
        n = int(round((self.r_stop - self.r_start) / self.r_step))
        return np.round(self.r_start + self.r_step * np.arange(n + 1), 12)

    def size(self) -> int:
        return len(self.theta1_grid()) * len(self.r_grid()) ** 2 * len(self.constraints)

    def to_dict(self) -> dict:
        """Config-file form; ``config_from_mapping(cfg.to_dict()) == cfg``."""
        return {
            "theta1_step_pi": self.theta1_step / math.pi,
            "theta1_stop_pi": self.theta1_stop / math.pi,
            "r_start": self.r_start,
            "r_stop": self.r_stop,
            "r_step": self.r_step,
            "constraints": [c.value for c in self.constraints],
            "cap": self.cap,
            "rule": str(self.rule),
            "workers": self.workers,
        }


# Keys accepted in a config file; theta values are given in units of π.
CONFIG_KEYS = {
    "theta1_step_pi", "theta1_stop_pi", "r_start", "r_stop", "r_step",
    "constraints", "cap", "rule", "workers", "quick",
}


def config_from_mapping(data: dict) -> SweepConfig:
    unknown = set(data) - CONFIG_KEYS
    if unknown:
        raise InvalidConfigurationError(f"unknown sweep config keys: {sorted(unknown)}")
    kwargs = {}
    for key in ("r_start", "r_stop", "r_step", "cap", "workers", "constraints", "rule"):
        if key in data:
            kwargs[key] = data[key]
    if "theta1_step_pi" in data:
        kwargs["theta1_step"] = float(data["theta1_step_pi"]) * math.pi
    if "theta1_stop_pi" in data:
        kwargs["theta1_stop"] = float(data["theta1_stop_pi"]) * math.pi
    try:
        return SweepConfig.quick(**kwargs) if data.get("quick") else SweepConfig(**kwargs)
    except (TypeError, ValueError) as exc:
        raise InvalidConfigurationError(f"bad sweep config: {exc}") from exc


def load_config(path: str | Path) -> SweepConfig:
    try:
        data = json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise InvalidConfigurationError(f"{path}: not valid JSON ({exc})") from exc
    if not isinstance(data, dict):
        raise InvalidConfigurationError(f"{path}: expected a JSON object")
    return config_from_mapping(data)


@dataclass(frozen=True)
class SweepRecord:
    theta1: float
    r1: float
    r2: float
    constraint: str
    theta2: float
    p_psi_plus: float
    p_psi_minus: float
    p_phi_plus: float
    p_phi_minus: float
    p_overall: float
    deficit: float
    residual: float = 0.0

    def csv_row(self) -> list[str]:
        return [
            repr(self.theta1), repr(self.r1), repr(self.r2), self.constraint, repr(self.theta2),
            repr(self.p_psi_plus), repr(self.p_psi_minus), repr(self.p_phi_plus), repr(self.p_phi_minus),
            repr(self.p_overall), repr(self.deficit),
        ]


def evaluate_points(theta1, r1, r2, constraint, cap: int, rule: Rule) -> dict[str, np.ndarray]:
    """Success probabilities for a batch of θ1 values at fixed squeezing and constraint."""
    theta1 = np.atleast_1d(np.asarray(theta1, dtype=float))
    theta2 = np.atleast_1d(solve_theta2(theta1, r1, r2, constraint))
    co = sr_coefficients(theta1, theta2, r1, r2)
    e = exp_quadratic_tensor({(0, 0): co.x, (1, 1): co.y, (0, 1): co.z}, 2, cap)
    scale = fock_scale(2, cap) * np.asarray(co.prefactor).reshape(-1, 1, 1)
    polys = sr_polys(co)
    probs = np.stack(
        [(np.abs(apply_poly(e, polys[b], 2) * scale) ** 2).reshape(len(theta1), -1) for b in BELL_STATES], axis=1
    )
    success = success_from_probs(probs, rule)
    overall = (success[:, 0] + success[:, 1] + success[:, 2] + success[:, 3]) / 4
    deficit = (1 - probs.sum(axis=-1)).max(axis=-1)
    residual = np.abs(co.constraint_value(constraint)) * np.ones_like(theta1)
    return {"theta2": theta2, "success": success, "overall": overall, "deficit": deficit, "residual": residual}


def _run_chunk(args):
    theta1, r1, r2, constraint, cap, rule = args
    return evaluate_points(theta1, r1, r2, constraint, cap, rule)


@dataclass
class SweepResult(Sequence):
    """Sweep output stored column-wise; indexing yields :class:`SweepRecord`.

    Rows are ordered lexicographically by (θ1, r1, r2, constraint) grid index.
    """

    config: SweepConfig
    theta1: np.ndarray = field(repr=False)
    r1: np.ndarray = field(repr=False)
    r2: np.ndarray = field(repr=False)
    constraint: np.ndarray = field(repr=False)  # index into config.constraints
    theta2: np.ndarray = field(repr=False)
    success: np.ndarray = field(repr=False)  # (n, 4)
    overall: np.ndarray = field(repr=False)
    deficit: np.ndarray = field(repr=False)
    residual: np.ndarray = field(repr=False)

    def __len__(self) -> int:
        return len(self.overall)

    def __getitem__(self, i):
        if isinstance(i, slice):
            return [self[k] for k in range(*i.indices(len(self)))]
        if i < 0:
            i += len(self)
        if not 0 <= i < len(self):
            raise IndexError(i)
        s = self.success[i]
        return SweepRecord(
            float(self.theta1[i]), float(self.r1[i]), float(self.r2[i]),
            self.config.constraints[self.constraint[i]].value, float(self.theta2[i]),
            float(s[0]), float(s[1]), float(s[2]), float(s[3]),
            float(self.overall[i]), float(self.deficit[i]), float(self.residual[i]),
        )

    def __iter__(self) -> Iterator[SweepRecord]:
        for i in range(len(self)):
            yield self[i]


def run_sweep(config: SweepConfig) -> SweepResult:
    th = config.theta1_grid()
    rs = config.r_grid()
    nt, nr, nc = len(th), len(rs), len(config.constraints)
    if not (nt and nr):
        raise InvalidConfigurationError("empty sweep grid")
    jobs = [
        (th, float(r1), float(r2), c, config.cap, config.rule)
        for r1 in rs for r2 in rs for c in config.constraints
    ]
    if config.workers == 1:
        results = list(map(_run_chunk, jobs))
    else:
        with ProcessPoolExecutor(max_workers=config.workers) as pool:
            results = list(pool.map(_run_chunk, jobs, chunksize=max(1, len(jobs) // (4 * config.workers))))

    def gather(key, extra=()):
        # jobs are ordered (r1, r2, c); each holds the θ1 axis
        stacked = np.stack([res[key] for res in results]).reshape((nr, nr, nc, nt) + extra)
        order = (3, 0, 1, 2) + tuple(range(4, 4 + len(extra)))
        return stacked.transpose(order).reshape((-1,) + extra)

    it, i1, i2, ic = np.meshgrid(np.arange(nt), np.arange(nr), np.arange(nr), np.arange(nc), indexing="ij")
    return SweepResult(
        config=config,
        theta1=th[it.ravel()],
        r1=rs[i1.ravel()],
        r2=rs[i2.ravel()],
        constraint=ic.ravel(),
        theta2=gather("theta2"),
        success=gather("success", (4,)),
        overall=gather("overall"),
        deficit=gather("deficit"),
        residual=gather("residual"),
    )


def find_optimum(records: Sequence[SweepRecord]) -> SweepRecord:
    """Record with the largest overall success; the earliest one wins ties."""
    if len(records) == 0:
        raise InvalidInputError("no sweep records to search")
    if isinstance(records, SweepResult):
        return records[int(np.argmax(records.overall))]
    best = None
    for rec in records:
        if best is None or rec.p_overall > best.p_overall:
            best = rec
    return best


@dataclass
class PlotDataset:
    x_label: str
    y_label: str
    rows: list[tuple[float, float, float]]
    title: str = ""
    empty: bool = False

    def to_csv(self) -> str:
        lines = [f"{self.x_label},{self.y_label},P"]
        lines += [f"{x!r},{y!r},{p!r}" for x, y, p in self.rows]
        return "\n".join(lines) + "\n"


def slice_for_plot(
    records: Sequence[SweepRecord],
    kind: str = "surface",
    theta1: float = 0.0,
    constraint: Constraint | str = Constraint.OMEGA_PLUS,
    atol: float = 1e-9,
) -> PlotDataset:
    """Extract plotting triples.

    ``surface``: (S1 dB, S2 dB, P) at the θ1 grid value closest to ``theta1``.
    ``equal``: (θ1/π, S dB, P) restricted to r1 == r2.
    """
    constraint = Constraint(constraint).value
    if kind == "surface":
        chosen = [r for r in records if r.constraint == constraint]
        if chosen:
            nearest = min({r.theta1 for r in chosen}, key=lambda t: abs(t - theta1))
            chosen = [r for r in chosen if abs(r.theta1 - nearest) <= atol]
        rows = [(db_from_r(r.r1), db_from_r(r.r2), r.p_overall) for r in chosen]
        title = f"theta1 = {theta1 / math.pi:.3g} pi, {constraint} = 0"
        x, y = "S1_dB", "S2_dB"
    elif kind == "equal":
        rows = [(r.theta1 / math.pi, db_from_r(r.r1), r.p_overall) for r in records if r.constraint == constraint and r.r1 == r.r2]
        title = f"r1 = r2, {constraint} = 0"
        x, y = "theta1_over_pi", "S_dB"
    else:
        raise InvalidInputError(f"unknown plot kind {kind!r}")
    if not rows:
        warnings.warn("no sweep records match the requested slice", RuntimeWarning, stacklevel=2)
    return PlotDataset(x, y, rows, title, empty=not rows)


def write_csv(records: Sequence[SweepRecord], path: str | Path) -> Path:
    path = Path(path)
    with path.open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(CSV_HEADER)
        for rec in records:
            writer.writerow(rec.csv_row())
    return path


def read_csv(path: str | Path) -> list[SweepRecord]:
    with Path(path).open(newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        if tuple(reader.fieldnames or ()) != CSV_HEADER:
            raise InvalidInputError(f"{path}: unexpected sweep CSV header")
        return [
            SweepRecord(**{k: (v if k == "constraint" else float(v)) for k, v in row.items()}) for row in reader
        ]


def write_json(result: SweepResult, path: str | Path) -> Path:
    path = Path(path)
    payload = {
        "config": result.config.to_dict(),
        "columns": list(CSV_HEADER) + ["residual"],
        "rows": [list(asdict(r).values()) for r in result],
    }
    path.write_text(json.dumps(payload, separators=(",", ":")) + "\n", encoding="utf-8")
    return path
