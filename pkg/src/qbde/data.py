"""Dataset ingestion, validation, outlier filtering, sampling and splitting.

Every CSV row ends up either as a :class:`~qbde.chem.BondRecord` or as a
:class:`Rejection` with one of the reasons in :data:`REJECTION_REASONS`, so
``rows == len(records) + len(rejections)`` always holds.
"""

from __future__ import annotations

import csv
import logging
import math
import os
from collections import Counter
from dataclasses import dataclass, field

import numpy as np

from .chem import BondRecord, bond_features, bond_label, parse_smiles
from .errors import ConfigurationError, IngestionError, ParseError
from .seeding import rng_for

log = logging.getLogger(__name__)

REJECTION_REASONS = ("parse error", "bad index", "non-finite BDE", "missing field")
DEFAULT_COLUMNS = {"smiles": "molecule", "bond_index": "bond_index", "bond_type": "bond_type",
                   "bde": "bde"}
FEATURE_NAMES = ("z_a", "z_b", "hyb_a", "hyb_b", "bond_order", "env")


@dataclass(frozen=True)
class Rejection:
    row: int
    record_id: str
    reason: str
    message: str


@dataclass
class IngestResult:
    records: list[BondRecord]
    rejections: list[Rejection]
    n_rows: int
    source: str = ""

    def reason_counts(self) -> dict[str, int]:
        counts = Counter(r.reason for r in self.rejections)
        return {reason: counts.get(reason, 0) for reason in REJECTION_REASONS}


def _resolve_columns(column_map: dict | None, header: list[str]) -> dict:
    cmap = dict(DEFAULT_COLUMNS if column_map is None else column_map)
    if "atom_a" in cmap or "atom_b" in cmap:
        cmap.pop("bond_index", None)
        need = ("smiles", "atom_a", "atom_b", "bde")
    else:
        need = ("smiles", "bond_index", "bde")
    missing_keys = [k for k in need if k not in cmap]
    if missing_keys:
        raise IngestionError(f"column_map lacks {missing_keys}")
    absent = [cmap[k] for k in need if cmap[k] not in header]
    if cmap.get("bond_type") and cmap["bond_type"] not in header:
        if column_map is not None and "bond_type" in column_map:
            absent.append(cmap["bond_type"])
        cmap.pop("bond_type")
    if cmap.get("id") and cmap["id"] not in header:
        absent.append(cmap["id"])
    if absent:
        raise IngestionError(f"CSV is missing mapped column(s) {absent}")
    return cmap


def ingest_csv(path, column_map: dict | None = None, dedupe: bool = False) -> IngestResult:
    """Read and validate a bond table.

    ``column_map`` maps ``smiles``, ``bde`` and either ``bond_index`` or the
    endpoint pair ``atom_a``/``atom_b`` to header names; ``bond_type`` and
    ``id`` are optional.  A missing type is derived from the parsed bond.
    """
    path = os.fspath(path)
    if not os.path.isfile(path):
        raise IngestionError(f"no such file: {path}")
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        header = list(reader.fieldnames or [])
        cmap = _resolve_columns(column_map, header)
        rows = list(reader)
    records, rejections, seen = [], [], set()
    for i, row in enumerate(rows, start=1):
        rid = row.get(cmap["id"], "").strip() if cmap.get("id") else f"row{i}"
        outcome = _validate_row(row, cmap, rid)
        if isinstance(outcome, tuple):
            rejections.append(Rejection(i, rid, *outcome))
            continue
        key = (outcome.smiles, outcome.bond_index, outcome.bde)
        if dedupe and key in seen:
            continue
        seen.add(key)
        records.append(outcome)
    if dedupe:
        n_dup = len(rows) - len(records) - len(rejections)
        log.info("dropped %d duplicate rows", n_dup)
        n_rows = len(rows) - n_dup
    else:
        n_rows = len(rows)
    for r in rejections:
        log.info("rejected %s: %s (%s)", r.record_id, r.reason, r.message)
    return IngestResult(records, rejections, n_rows, path)


def _cell(row, col):
    value = row.get(col)
    return None if value is None or not value.strip() else value.strip()


def _validate_row(row, cmap, rid):
    keys = ["smiles", "bde"] + (["atom_a", "atom_b"] if "atom_a" in cmap else ["bond_index"])
    values = {k: _cell(row, cmap[k]) for k in keys}
    empty = [cmap[k] for k, v in values.items() if v is None]
    if empty:
        return "missing field", f"empty {empty}"
    try:
        mol = parse_smiles(values["smiles"])
    except ParseError as exc:
        return "parse error", str(exc)
    try:
        if "atom_a" in cmap:
            index = mol.find_bond(int(values["atom_a"]), int(values["atom_b"]))
        else:
            index = int(values["bond_index"])
    except (ValueError, IndexError) as exc:
        return "bad index", str(exc)
    if not 0 <= index < len(mol.bonds):
        return "bad index", f"bond index {index} outside 0..{len(mol.bonds) - 1}"
    try:
        bde = float(values["bde"])
    except ValueError:
        return "non-finite BDE", f"not a number: {values['bde']!r}"
    if not math.isfinite(bde) or bde <= 0:
        return "non-finite BDE", f"BDE must be finite and positive, got {bde}"
    label = _cell(row, cmap["bond_type"]) if cmap.get("bond_type") else None
    return BondRecord(values["smiles"], index, label or bond_label(mol, index), bde, rid)


# -- outliers -----------------------------------------------------------------


@dataclass
class FilterResult:
    kept: list[BondRecord]
    removed: list[BondRecord]
    log: dict = field(default_factory=dict)

    @property
    def fraction_removed(self) -> float:
        total = len(self.kept) + len(self.removed)
        return len(self.removed) / total if total else 0.0


MIN_CLASS_FOR_FILTER = 4


def filter_outliers(records, method: str = "iqr", k: float = 3.0, t: float = 3.0) -> FilterResult:
    """Per-class outlier removal by Tukey fences (``iqr``) or z-score (``zscore``).

    Classes with fewer than four members are exempt.  Quartiles use linear
    interpolation between order statistics.
    """
    records = list(records)
    if len(records) < 10:
        raise ConfigurationError(f"outlier filtering needs at least 10 records, got {len(records)}")
    if method not in ("iqr", "zscore"):
        raise ConfigurationError(f"unknown outlier method {method!r}")
    by_class: dict[str, list[int]] = {}
    for i, r in enumerate(records):
        by_class.setdefault(r.bond_type, []).append(i)
    drop = set()
    per_class, exempt = {}, []
    for label, idx in by_class.items():
        y = np.array([records[i].bde for i in idx])
        if len(idx) < MIN_CLASS_FOR_FILTER:
            exempt.append(label)
            log.info("class %s has %d members; exempt from outlier filtering", label, len(idx))
            continue
        if method == "iqr":
            q1, q3 = np.percentile(y, [25, 75])
            lo, hi = q1 - k * (q3 - q1), q3 + k * (q3 - q1)
        else:
            mu, sd = y.mean(), y.std()
            lo, hi = (mu - t * sd, mu + t * sd) if sd > 0 else (-np.inf, np.inf)
        out = [i for i, v in zip(idx, y) if v < lo or v > hi]
        drop.update(out)
        per_class[label] = {"n": len(idx), "removed": len(out), "lower": float(lo), "upper": float(hi)}
    kept = [r for i, r in enumerate(records) if i not in drop]
    removed = [r for i, r in enumerate(records) if i in drop]
    result = FilterResult(kept, removed)
    result.log = {"method": method, "k": k if method == "iqr" else None,
                  "t": t if method == "zscore" else None, "n_in": len(records),
                  "n_removed": len(removed), "fraction_removed": result.fraction_removed,
                  "per_class": per_class, "exempt_classes": sorted(exempt)}
    log.info("outlier filter (%s) removed %d of %d records (%.2f%%)", method, len(removed),
             len(records), 100 * result.fraction_removed)
    return result


# -- stratified sampling ------------------------------------------------------


def allocate(class_sizes: dict[str, int], n_total: int, min_per_class: int) -> dict[str, int]:
    """Per-class quotas: proportional shares, floored at ``min_per_class``, capped at class size.

    Classes whose share falls below the floor (or exceeds its size) are fixed
    there and the rest of the budget is re-shared among the others until
    stable; the final fractional quotas are rounded by largest remainder.
    """
    total = sum(class_sizes.values())
    if n_total > total:
        raise ConfigurationError(f"n_total={n_total} exceeds the {total} available records")
    floors = {c: min(min_per_class, s) for c, s in class_sizes.items()}
    if n_total < sum(floors.values()):
        short = sorted(c for c, f in floors.items() if f > 0)
        raise ConfigurationError(
            f"n_total={n_total} cannot give {min_per_class} records to each class: {short}")
    fixed: dict[str, int] = {}
    while True:
        free = {c: s for c, s in class_sizes.items() if c not in fixed}
        budget = n_total - sum(fixed.values())
        weight = sum(free.values())
        share = {c: budget * s / weight for c, s in free.items()} if weight else {}
        changed = False
        for c, q in share.items():
            if q < floors[c]:
                fixed[c], changed = floors[c], True
            elif q > class_sizes[c]:
                fixed[c], changed = class_sizes[c], True
        if not changed:
            break
    quotas = dict(fixed)
    base = {c: math.floor(q) for c, q in share.items()}
    leftover = budget - sum(base.values())
    order = sorted(share, key=lambda c: (-(share[c] - base[c]), c))
    for c in order[:leftover]:
        base[c] += 1
    quotas.update(base)
    return {c: quotas[c] for c in class_sizes}


def stratified_sample(records, n_total: int, min_per_class: int = 0, seed: int = 0) -> list[BondRecord]:
    """Class-stratified subset, returned in the original record order."""
    records = list(records)
    by_class: dict[str, list[int]] = {}
    for i, r in enumerate(records):
        by_class.setdefault(r.bond_type, []).append(i)
    quotas = allocate({c: len(v) for c, v in by_class.items()}, n_total, min_per_class)
    chosen = []
    for c, idx in by_class.items():
        pick = rng_for(seed, "sample", c).permutation(len(idx))[: quotas[c]]
        chosen.extend(idx[j] for j in pick)
    return [records[i] for i in sorted(chosen)]


# -- dataset ------------------------------------------------------------------


@dataclass
class Dataset:
    records: list[BondRecord]
    features: np.ndarray
    targets: np.ndarray
    classes: list[str]
    provenance: dict = field(default_factory=dict)

    def __post_init__(self):
        n = len(self.records)
        if self.features.shape != (n, len(FEATURE_NAMES)) or self.targets.shape != (n,):
            raise ValueError("features, targets and records disagree in length")
        if not (np.isfinite(self.features).all() and np.isfinite(self.targets).all()):
            raise ValueError("dataset contains non-finite values")

    def __len__(self):
        return len(self.records)

    @classmethod
    def from_records(cls, records, provenance: dict | None = None) -> "Dataset":
        records = list(records)
        feats = [bond_features(parse_smiles(r.smiles), r.bond_index) for r in records]
        X = np.array(feats, dtype=float).reshape(len(records), len(FEATURE_NAMES))
        y = np.array([r.bde for r in records], dtype=float)
        return cls(records, X, y, [r.bond_type for r in records], dict(provenance or {}))

    def subset(self, idx) -> "Dataset":
        idx = list(idx)
        return Dataset([self.records[i] for i in idx], self.features[idx], self.targets[idx],
                       [self.classes[i] for i in idx], dict(self.provenance))


def split(dataset: Dataset, test_fraction: float = 0.2, seed: int = 0) -> tuple[Dataset, Dataset]:
    """Class-stratified disjoint train/test split.

    The test size is ``round(test_fraction * N)``, shared across classes by
    largest remainder; inside each class the members are drawn with a seeded
    permutation.  Both parts keep the original record order.
    """
    if not 0.0 < test_fraction < 1.0:
        raise ConfigurationError("test_fraction must be in (0, 1)")
    by_class: dict[str, list[int]] = {}
    for i, c in enumerate(dataset.classes):
        by_class.setdefault(c, []).append(i)
    n_test = int(round(test_fraction * len(dataset)))
    share = {c: test_fraction * len(v) for c, v in by_class.items()}
    base = {c: math.floor(q) for c, q in share.items()}
    for c in sorted(share, key=lambda c: (-(share[c] - base[c]), c))[: n_test - sum(base.values())]:
        base[c] += 1
    test = []
    for c, idx in by_class.items():
        pick = rng_for(seed, "split", c).permutation(len(idx))[: base[c]]
        test.extend(idx[j] for j in pick)
    test_set = set(test)
    train = [i for i in range(len(dataset)) if i not in test_set]
    return dataset.subset(train), dataset.subset(sorted(test))


def records_csv_rows(records, split_labels=None) -> list[list]:
    head = ["id", "molecule", "bond_index", "bond_type", "bde"]
    rows = [head + (["split"] if split_labels is not None else [])]
    for i, r in enumerate(records):
        row = [r.record_id, r.smiles, r.bond_index, r.bond_type, repr(float(r.bde))]
        rows.append(row + ([split_labels[i]] if split_labels is not None else []))
    return rows
