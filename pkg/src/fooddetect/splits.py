"""Deterministic train/val/test assignment protocols over manifests.

Protocols:

* ``fcd``: stratified-by-label seeded shuffle; 20% test, then 80/20
  train/val on the rest. Totals are exact via largest-remainder
  allocation across classes.
* ``fractional``: same machinery with caller-chosen fractions.
* ``ragusa``: group-driven. UNICT entries shuffle into 80/20 train/val,
  Flickr-Food goes to test whole, and Flickr-NonFood splits by file
  order with the first block (one entry per UNICT image) in train and
  the rest in test.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ValidationError
from .tensorio import DatasetManifest

PROTOCOLS = ("fcd", "ragusa", "fractional")

RAGUSA_GROUPS = ("unict", "flickr-nonfood", "flickr-food")


@dataclass(frozen=True)
class SplitSpec:
    protocol: str
    test_fraction: float = 0.2
    val_fraction: float = 0.2  # applied to the non-test remainder
    seed: int = 42

    def __post_init__(self):
        if self.protocol not in PROTOCOLS:
            raise ValidationError(f"unknown split protocol {self.protocol!r}")
        for name, frac in (("test", self.test_fraction), ("val", self.val_fraction)):
            if not (0.0 < frac < 1.0):
                raise ValidationError(f"{name} fraction must lie in (0,1), got {frac}")


def _largest_remainder(targets: list[float], total: int) -> list[int]:
    """Integer allocation that sums exactly to ``total``; ties keep list order."""
    base = [int(np.floor(t)) for t in targets]
    leftover = total - sum(base)
    remainders = sorted(
        range(len(targets)), key=lambda i: (-(targets[i] - base[i]), i)
    )
    for i in remainders[:leftover]:
        base[i] += 1
    return base


def _fractional_assign(
    man: DatasetManifest, test_fraction: float, val_fraction: float, seed: int
) -> dict[str, str]:
    rng = np.random.default_rng(seed)
    by_label: dict[str, list[str]] = {"food": [], "nonfood": []}
    for e in man.entries:
        by_label[e.label].append(e.id)
    classes = [label for label in ("food", "nonfood") if by_label[label]]

    n = len(man)
    test_total = int(np.floor(n * test_fraction + 0.5))
    test_counts = _largest_remainder(
        [len(by_label[label]) * test_fraction for label in classes], test_total
    )
    remainder = n - test_total
    val_total = int(np.floor(remainder * val_fraction + 0.5))
    val_counts = _largest_remainder(
        [
            (len(by_label[label]) - test_counts[i]) * val_fraction
            for i, label in enumerate(classes)
        ],
        val_total,
    )

    split_of: dict[str, str] = {}
    for i, label in enumerate(classes):
        ids = by_label[label]
        order = rng.permutation(len(ids))
        shuffled = [ids[j] for j in order]
        t, v = test_counts[i], val_counts[i]
        for sample_id in shuffled[:t]:
            split_of[sample_id] = "test"
        for sample_id in shuffled[t : t + v]:
            split_of[sample_id] = "val"
        for sample_id in shuffled[t + v :]:
            split_of[sample_id] = "train"
    return split_of


def ragusa_group(path: str) -> str | None:
    """Source group inferred from the sample path; None when unrecognized."""
    lowered = path.lower()
    if "flickr-nonfood" in lowered:
        return "flickr-nonfood"
    if "flickr-food" in lowered:
        return "flickr-food"
    if "unict" in lowered:
        return "unict"
    return None


def _ragusa_assign(man: DatasetManifest, val_fraction: float, seed: int) -> dict[str, str]:
    groups: dict[str, list[str]] = {g: [] for g in RAGUSA_GROUPS}
    for e in man.entries:
        group = ragusa_group(e.path)
        if group is None:
            raise ValidationError(
                f"entry {e.id!r}: path {e.path!r} matches no ragusa source group"
            )
        groups[group].append(e.id)
    for g in RAGUSA_GROUPS:
        if not groups[g]:
            raise ValidationError(f"ragusa protocol: source group {g!r} is missing")

    split_of: dict[str, str] = {}

    unict = groups["unict"]
    rng = np.random.default_rng(seed)
    order = rng.permutation(len(unict))
    val_count = int(np.floor(len(unict) * val_fraction + 0.5))
    for pos, j in enumerate(order):
        split_of[unict[j]] = "val" if pos < val_count else "train"

    for sample_id in groups["flickr-food"]:
        split_of[sample_id] = "test"

    # nonfood: first block sized to the UNICT group trains, rest tests
    cut = len(unict)
    for pos, sample_id in enumerate(groups["flickr-nonfood"]):
        split_of[sample_id] = "train" if pos < cut else "test"
    return split_of


def assign_splits(man: DatasetManifest, spec: SplitSpec, force: bool = False) -> DatasetManifest:
    """Return a manifest copy with splits assigned per the protocol."""
    if not force:
        assigned = [e.id for e in man.entries if e.split is not None]
        if assigned:
            raise ValidationError(
                f"{len(assigned)} entries already carry splits; pass force to reassign"
            )
    if spec.protocol == "ragusa":
        split_of = _ragusa_assign(man, spec.val_fraction, spec.seed)
    else:
        split_of = _fractional_assign(
            man, spec.test_fraction, spec.val_fraction, spec.seed
        )
    return man.with_splits(split_of)
