"""Dataset CSV schema and provenance sidecars.

The on-disk schema is one row per reported switch point:

    subject_id,product_id,treatment,block,switch_point,market_price

with integer ids, treatment in {mp, pm}, block in {m, p}, and both money
columns printed with exactly two decimals.  Files are written in canonical
(subject, product, block) order with LF line endings, so parsing and
re-serializing a canonical file is byte-identical.
"""

from __future__ import annotations

import hashlib
import json
import re
from pathlib import Path

from .cohort import Dataset, Product, SubjectRecord

__all__ = [
    "DatasetFormatError",
    "HEADER",
    "read_dataset",
    "write_dataset",
    "dataset_to_csv",
    "write_provenance",
]

HEADER = "subject_id,product_id,treatment,block,switch_point,market_price"

_INT = re.compile(r"^\d+$")
_MONEY = re.compile(r"^\d+\.\d{2}$")


class DatasetFormatError(ValueError):
    """A dataset file violates the schema; the message carries line numbers."""


def _parse_row(line_no: int, line: str) -> SubjectRecord:
    parts = line.split(",")
    if len(parts) != 6:
        raise DatasetFormatError(f"line {line_no}: expected 6 columns, got {len(parts)}")
    sid, pid, treatment, block, switch, price = parts
    if not _INT.match(sid) or not _INT.match(pid):
        raise DatasetFormatError(f"line {line_no}: ids must be nonnegative integers")
    if treatment not in ("mp", "pm"):
        raise DatasetFormatError(f"line {line_no}: bad treatment {treatment!r}")
    if block not in ("m", "p"):
        raise DatasetFormatError(f"line {line_no}: bad block {block!r}")
    if not _MONEY.match(switch):
        raise DatasetFormatError(
            f"line {line_no}: switch_point {switch!r} needs exactly 2 decimals"
        )
    if not _MONEY.match(price):
        raise DatasetFormatError(
            f"line {line_no}: market_price {price!r} needs exactly 2 decimals"
        )
    try:
        return SubjectRecord(
            subject_id=int(sid),
            product_id=int(pid),
            treatment=treatment,
            block=block,
            switch_point=float(switch),
            market_price=float(price),
        )
    except ValueError as exc:
        raise DatasetFormatError(f"line {line_no}: {exc}") from exc


def read_dataset(path: str | Path) -> Dataset:
    """Parse and validate a dataset CSV; malformed rows name their line."""
    text = Path(path).read_text(encoding="utf-8")
    lines = text.split("\n")
    if lines and lines[-1] == "":
        lines.pop()
    if not lines or lines[0] != HEADER:
        raise DatasetFormatError(f"line 1: header must be {HEADER!r}")
    records = []
    prices: dict[int, tuple[float, int]] = {}
    for line_no, line in enumerate(lines[1:], start=2):
        rec = _parse_row(line_no, line)
        known = prices.get(rec.product_id)
        if known is not None and known[0] != rec.market_price:
            raise DatasetFormatError(
                f"line {line_no}: market_price {rec.market_price} conflicts with "
                f"line {known[1]} for product {rec.product_id}"
            )
        prices.setdefault(rec.product_id, (rec.market_price, line_no))
        records.append(rec)
    if not records:
        raise DatasetFormatError("line 2: dataset has no records")
    products = tuple(
        Product(pid, f"product-{pid}", prices[pid][0]) for pid in sorted(prices)
    )
    try:
        return Dataset(tuple(records), products)
    except ValueError as exc:
        raise DatasetFormatError(str(exc)) from exc


def dataset_to_csv(dataset: Dataset) -> str:
    """Canonical CSV text: sorted records, LF endings, 2-decimal money."""
    lines = [HEADER]
    for r in dataset.sorted_records():
        lines.append(
            f"{r.subject_id},{r.product_id},{r.treatment},{r.block},"
            f"{r.switch_point:.2f},{r.market_price:.2f}"
        )
    return "\n".join(lines) + "\n"


def write_dataset(dataset: Dataset, path: str | Path) -> None:
    Path(path).write_text(dataset_to_csv(dataset), encoding="utf-8", newline="")


def write_provenance(
    dataset_path: str | Path, master_seed: int, config_text: str
) -> Path:
    """Sidecar JSON recording the seed and a digest of the run config."""
    digest = hashlib.sha256(config_text.encode("utf-8")).hexdigest()
    sidecar = Path(str(dataset_path) + ".provenance.json")
    payload = {
        "config_digest": digest,
        "master_seed": master_seed,
        "schema": HEADER,
    }
    sidecar.write_text(
        json.dumps(payload, indent=2, sort_keys=True) + "\n",
        encoding="utf-8",
        newline="",
    )
    return sidecar
