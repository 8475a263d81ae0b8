"""Unambiguous classification of photon-number patterns and success probabilities."""

from __future__ import annotations

import csv
import io
import json
import math
from collections import defaultdict
from dataclasses import dataclass, field
from typing import Mapping, Sequence, Union

import numpy as np

from .errors import InvalidInputError
from .fock import StateVector

# Patterns whose every input probability sits at or below this are round-off, not signal.
DEFAULT_FLOOR = 1e-30


@dataclass(frozen=True)
class ExactZero:
    """Unambiguous for ``s`` iff every competing probability is ``<= tol * P(s)``."""

    tol: float = 1e-10

    def __str__(self):
        return f"exact:{self.tol:g}"


@dataclass(frozen=True)
class Ratio:
    """Unambiguous for ``s`` iff ``P(s) >= k * P(other)`` for every other input."""

    k: float = 400.0

    def __str__(self):
        return f"ratio:{self.k:g}"


Rule = Union[ExactZero, Ratio]


def parse_rule(text: str | Rule) -> Rule:
    """``"exact"``, ``"exact:1e-12"``, ``"ratio"`` or ``"ratio:400"``."""
    if isinstance(text, (ExactZero, Ratio)):
        return text
    name, _, value = str(text).strip().lower().partition(":")
    try:
        if name == "exact":
            return ExactZero(float(value)) if value else ExactZero()
        if name == "ratio":
            return Ratio(float(value)) if value else Ratio()
    except ValueError as exc:
        raise InvalidInputError(f"bad rule parameter in {text!r}") from exc
    raise InvalidInputError(f"unknown classification rule {text!r}")


@dataclass(frozen=True)
class OutcomeTable:
    """Detection statistics of every Bell input over a shared list of patterns.

    Attributes:
        labels: input names, e.g. ``("psi+", "psi-", "phi+", "phi-")``.
        patterns: photon counts per mode; with ``saturated_at = M`` a count of
            ``M + 1`` means "more than M".
        probs: ``(len(labels), len(patterns))`` array.
        cap: simulation truncation per mode.
        deficit: ``1 - sum(probs[s])`` per input, measured before any detector model.
    """

    labels: tuple[str, ...]
    patterns: tuple[tuple[int, ...], ...]
    probs: np.ndarray = field(repr=False)
    cap: int
    deficit: Mapping[str, float]
    saturated_at: int | None = None

    def __post_init__(self):
        if self.probs.shape != (len(self.labels), len(self.patterns)):
            raise InvalidInputError("probability array does not match labels x patterns")
        if np.any(self.probs < 0):
            raise InvalidInputError("negative probability in outcome table")

    @classmethod
    def from_states(cls, states: Mapping[str, StateVector]) -> "OutcomeTable":
        if not states:
            raise InvalidInputError("no input states given")
        per = {label: {p: abs(a) ** 2 for p, a in sv} for label, sv in states.items()}
        caps = {sv.cap for sv in states.values()}
        return cls.from_probabilities(per, cap=max(caps))

    @classmethod
    def from_probabilities(cls, per: Mapping[str, Mapping[tuple, float]], cap: int) -> "OutcomeTable":
        labels = tuple(per)
        patterns = tuple(sorted(set().union(*(d.keys() for d in per.values()))))
        index = {p: i for i, p in enumerate(patterns)}
        probs = np.zeros((len(labels), len(patterns)))
        for s, label in enumerate(labels):
            for p, v in per[label].items():
                probs[s, index[p]] = v
        deficit = {label: float(1 - probs[s].sum()) for s, label in enumerate(labels)}
        return cls(labels, patterns, probs, cap, deficit)

    def probability(self, label: str, pattern: Sequence[int]) -> float:
        try:
            i = self.patterns.index(tuple(pattern))
        except ValueError:
            return 0.0
        return float(self.probs[self.labels.index(label), i])

    def total(self) -> dict[str, float]:
        return {label: float(self.probs[s].sum()) for s, label in enumerate(self.labels)}

    def pattern_str(self, pattern: Sequence[int]) -> str:
        m = self.saturated_at
        return ",".join(f"{m}+" if m is not None and n > m else str(n) for n in pattern)


@dataclass(frozen=True)
class Verdict:
    pattern: tuple[int, ...]
    classification: str  # "unambiguous" | "ambiguous" | "below-threshold"
    state: str | None = None

    def __str__(self):
        return f"unambiguous({self.state})" if self.state else self.classification


@dataclass
class DiscriminationReport:
    rule: str
    per_state: dict[str, float]
    overall: float
    verdicts: list[Verdict] = field(repr=False, default_factory=list)

    def to_dict(self, table: OutcomeTable | None = None) -> dict:
        fmt = table.pattern_str if table is not None else (lambda p: ",".join(map(str, p)))
        return {
            "rule": self.rule,
            "per_state": self.per_state,
            "overall": self.overall,
            "verdicts": [
                {"pattern": fmt(v.pattern), "verdict": v.classification, "state": v.state} for v in self.verdicts
            ],
        }

    def to_json(self, table: OutcomeTable | None = None) -> str:
        return json.dumps(self.to_dict(table), indent=2, ensure_ascii=False) + "\n"

    def to_csv(self, table: OutcomeTable) -> str:
        verdict_of = {v.pattern: str(v) for v in self.verdicts}
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["pattern", *(f"p_{label}" for label in table.labels), "verdict"])
        for i, p in enumerate(table.patterns):
            if p not in verdict_of:
                continue
            writer.writerow([table.pattern_str(p), *(repr(float(x)) for x in table.probs[:, i]), verdict_of[p]])
        return buf.getvalue()


def unambiguous_mask(probs: np.ndarray, rule: Rule, floor: float = DEFAULT_FLOOR) -> np.ndarray:
    """Boolean ``(..., S, P)`` mask: pattern ``p`` identifies input ``s`` unambiguously.

    ``probs`` has the inputs on axis -2 and the patterns on axis -1; leading
    axes are batch dimensions.
    """
    probs = np.asarray(probs, dtype=float)
    n_inputs = probs.shape[-2]
    out = np.zeros(probs.shape, dtype=bool)
    for s in range(n_inputs):
        mine = probs[..., s, :]
        others = np.delete(probs, s, axis=-2).max(axis=-2) if n_inputs > 1 else np.zeros_like(mine)
        if isinstance(rule, ExactZero):
            ok = others <= rule.tol * mine
        elif isinstance(rule, Ratio):
            ok = mine >= rule.k * others
        else:
            raise InvalidInputError(f"unknown rule {rule!r}")
        out[..., s, :] = ok & (mine > floor)
    return out


def success_from_probs(probs: np.ndarray, rule: Rule, floor: float = DEFAULT_FLOOR) -> np.ndarray:
    """Per-input success ``(..., S)``: probability mass on that input's unambiguous patterns."""
    mask = unambiguous_mask(probs, rule, floor)
    return np.where(mask, probs, 0.0).sum(axis=-1)


def classify(table: OutcomeTable, rule: Rule | str = ExactZero(), floor: float = DEFAULT_FLOOR) -> list[Verdict]:
    rule = parse_rule(rule)
    if not table.patterns or not table.labels:
        raise InvalidInputError("cannot classify an empty outcome table")
    mask = unambiguous_mask(table.probs, rule, floor)
    peak = table.probs.max(axis=0)
    verdicts = []
    for i, p in enumerate(table.patterns):
        if peak[i] == 0:
            continue
        winners = np.nonzero(mask[:, i])[0]
        if len(winners):
            verdicts.append(Verdict(p, "unambiguous", table.labels[winners[0]]))
        elif peak[i] <= floor:
            verdicts.append(Verdict(p, "below-threshold"))
        else:
            verdicts.append(Verdict(p, "ambiguous"))
    return verdicts


def success_probability(
    table: OutcomeTable, verdicts: Sequence[Verdict], rule: Rule | str = ExactZero()
) -> DiscriminationReport:
    index = {p: i for i, p in enumerate(table.patterns)}
    per_state = {label: 0.0 for label in table.labels}
    for v in verdicts:
        if v.state is not None:
            s = table.labels.index(v.state)
            per_state[v.state] += float(table.probs[s, index[v.pattern]])
    overall = math.fsum(per_state.values()) / len(per_state)
    return DiscriminationReport(str(parse_rule(rule)), per_state, overall, list(verdicts))


def evaluate(table: OutcomeTable, rule: Rule | str = ExactZero()) -> DiscriminationReport:
    rule = parse_rule(rule)
    return success_probability(table, classify(table, rule), rule)


def apply_pnrd_cap(table: OutcomeTable, max_resolvable: int, mode: str = "discard") -> OutcomeTable:
    """Model detectors that resolve at most ``max_resolvable`` photons (unit efficiency).

    ``discard``: patterns with any count above the limit are dropped and count as failures.
    ``merge``: counts above the limit collapse into one saturated outcome ``M+``
    and the merged probabilities are summed before classification.
    """
    if max_resolvable < 1:
        raise InvalidInputError(f"max_resolvable must be >= 1, got {max_resolvable}")
    if mode not in ("discard", "merge"):
        raise InvalidInputError(f"unknown saturation model {mode!r}")
    if max_resolvable >= table.cap and table.saturated_at is None:
        return table
    m = max_resolvable
    if mode == "discard":
        keep = [i for i, p in enumerate(table.patterns) if max(p) <= m]
        return OutcomeTable(
            table.labels,
            tuple(table.patterns[i] for i in keep),
            table.probs[:, keep],
            table.cap,
            dict(table.deficit),
        )
    merged: dict[tuple[int, ...], np.ndarray] = defaultdict(lambda: np.zeros(len(table.labels)))
    for i, p in enumerate(table.patterns):
        merged[tuple(n if n <= m else m + 1 for n in p)] += table.probs[:, i]
    patterns = tuple(sorted(merged))
    probs = np.stack([merged[p] for p in patterns], axis=1) if patterns else np.zeros((len(table.labels), 0))
    return OutcomeTable(table.labels, patterns, probs, table.cap, dict(table.deficit), saturated_at=m)


def parity_loss_flag(pattern: Sequence[int]) -> bool:
    """True when a dual-rail pattern reveals a lost photon: an odd number of modes with even counts."""
    if len(pattern) != 4:
        raise InvalidInputError(f"parity flag is defined for 4-mode patterns, got {len(pattern)} modes")
    return sum(1 for n in pattern if n % 2 == 0) % 2 == 1
