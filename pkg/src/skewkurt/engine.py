"""Partitioning of long series into fixed-size blocks and bulk moments.

A source (an observed series file or a synthetic stream) is cut into
floor(N/n) consecutive non-overlapping blocks; each block yields one
moment summary row. Work proceeds in fixed chunks of blocks so that peak
memory stays O(threads * chunk + output rows) and so that results are
byte-identical for any thread count: chunk boundaries and chunk RNG
streams depend only on indices, never on scheduling.
"""

from __future__ import annotations

import hashlib
import json
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Iterator

import numpy as np

from .errors import InvalidParameterError, SeriesError
from .moments import BlockSummaries, summarize_blocks
from .samplers import DistributionSpec, draw_values, make_generator, validate_spec

# One generation chunk covers about this many raw values; the chunk size
# in blocks is a pure function of n, so parallel schedules cannot change
# which values a block sees.
CHUNK_VALUES = 1 << 20
# Chunk streams live far above per-block stream ids to avoid overlap.
ENGINE_STREAM_BASE = 1 << 62

STATS_COLUMNS = ("block_index", "n", "mean", "m2", "S", "K", "R")


@dataclass(frozen=True)
class SyntheticSource:
    """A stream of n_blocks blocks drawn from one distribution."""

    spec: DistributionSpec
    n_blocks: int
    master_seed: int = 0

    def describe(self) -> dict:
        return {
            "kind": "synthetic",
            "family": self.spec.family,
            "params": {k: v for k, v in sorted(self.spec.params.items())},
            "n_blocks": int(self.n_blocks),
            "master_seed": int(self.master_seed),
        }


@dataclass(frozen=True)
class FileSource:
    """An observed series on disk, with optional value filtering.

    ``value_filter`` is one of "none", "positive" (keep values > 0) or
    "threshold" (keep values > ``threshold``). Values equal to
    ``missing_value`` are dropped before filtering and counted.
    """

    path: str | Path
    column: int | None = None
    value_filter: str = "none"
    threshold: float = 0.0
    delimiter: str | None = None
    missing_value: float = -9999.0

    def describe(self) -> dict:
        return {
            "kind": "file",
            "path": str(self.path),
            "column": self.column,
            "value_filter": self.value_filter,
            "threshold": self.threshold,
            "missing_value": self.missing_value,
        }


@dataclass
class IngestResult:
    """Retained values of a series plus the bookkeeping counts."""

    values: np.ndarray
    n_rows: int
    n_missing: int
    n_filtered: int


@dataclass
class BlockStatsTable:
    """Per-block moment statistics with degenerate blocks filtered out.

    ``m3``/``m4`` are None when the table was loaded from a stats CSV,
    which persists only (mean, m2, S, K, R).
    """

    n: int
    block_index: np.ndarray
    mean: np.ndarray
    m2: np.ndarray
    skewness: np.ndarray
    kurtosis: np.ndarray
    ratio: np.ndarray
    degenerate_count: int
    n_blocks: int
    source_digest: str
    m3: np.ndarray | None = None
    m4: np.ndarray | None = None
    discarded_values: int = 0
    meta: dict = field(default_factory=dict)

    def __len__(self) -> int:
        return int(self.block_index.size)


def ingest_series(
    path,
    column: int | None = None,
    value_filter: str = "none",
    threshold: float = 0.0,
    delimiter: str | None = None,
    missing_value: float = -9999.0,
) -> IngestResult:
    """Read one numeric series from a text/CSV file, in file order.

    Lines starting with '#' and blank lines are skipped. A leading run of
    unparseable lines is treated as a header; unparseable lines after the
    first data line raise. ``column`` selects a 0-based field (default:
    the last field, which covers both one-column and (date, value)
    layouts). Values equal to ``missing_value`` are dropped and counted,
    then the filter is applied.
    """
    path = Path(path)
    if not path.exists():
        raise SeriesError(f"cannot read series: {path}")
    keep: Callable[[np.ndarray], np.ndarray]
    if value_filter == "none":
        keep = None
    elif value_filter == "positive":
        threshold = 0.0
        keep = lambda v: v > 0.0  # noqa: E731
    elif value_filter == "threshold":
        t = float(threshold)
        keep = lambda v: v > t  # noqa: E731
    else:
        raise InvalidParameterError(f"unknown filter '{value_filter}'")

    raw: list[float] = []
    n_missing = 0
    seen_data = False
    with open(path, "r", encoding="utf-8", errors="replace") as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            fields = line.split(delimiter) if delimiter else (
                line.split(",") if "," in line else line.split()
            )
            idx = column if column is not None else len(fields) - 1
            try:
                value = float(fields[idx])
            except (ValueError, IndexError):
                if seen_data:
                    raise SeriesError(f"cannot parse line {lineno} of {path}: {line!r}")
                continue  # header line(s)
            seen_data = True
            if value == missing_value:
                n_missing += 1
                continue
            raw.append(value)

    values = np.asarray(raw, dtype=np.float64)
    n_filtered = 0
    if keep is not None and values.size:
        mask = keep(values)
        n_filtered = int(values.size - mask.sum())
        values = values[mask]
    if values.size == 0:
        raise SeriesError("empty series after filtering")
    return IngestResult(values, len(raw) + n_missing, n_missing, n_filtered)


def partition(values: np.ndarray, n: int) -> tuple[np.ndarray, int]:
    """Cut a series into floor(N/n) consecutive blocks of size n.

    Returns (blocks, discarded) where ``blocks`` has one block per row in
    source order and ``discarded`` is the size of the trailing remainder.
    """
    if n < 2:
        raise InvalidParameterError("block size must be at least 2")
    values = np.asarray(values, dtype=np.float64)
    n_total = values.size
    if n_total < n:
        raise SeriesError("series shorter than one block")
    n_blocks = n_total // n
    discarded = n_total - n_blocks * n
    return values[: n_blocks * n].reshape(n_blocks, n), discarded


def blocks_per_chunk(n: int) -> int:
    return max(1, CHUNK_VALUES // n)


def _source_digest(payload: dict) -> str:
    text = json.dumps(payload, sort_keys=True, default=str)
    return hashlib.sha256(text.encode()).hexdigest()[:16]


def iter_block_stats(
    source,
    n: int,
    threads: int = 1,
    validate: bool | None = None,
) -> Iterator[tuple[int, BlockSummaries]]:
    """Yield (start_block_index, summaries) chunk by chunk, in order.

    The chunk layout is a pure function of (source, n); ``threads`` only
    controls how many chunks are in flight, so outputs are identical for
    any thread count. Degenerate rows are still present in each chunk's
    summaries (callers filter by the mask).
    """
    if n < 2:
        raise InvalidParameterError("block size must be at least 2")
    if threads < 1:
        raise InvalidParameterError("threads must be >= 1")

    if isinstance(source, SyntheticSource):
        validate_spec(source.spec)
        if source.n_blocks < 1:
            raise InvalidParameterError("n_blocks must be positive")
        per = blocks_per_chunk(n)
        n_chunks = -(-source.n_blocks // per)

        def work(c: int) -> tuple[int, BlockSummaries]:
            start = c * per
            count = min(per, source.n_blocks - start)
            rng = make_generator(source.master_seed, ENGINE_STREAM_BASE + c)
            values = draw_values(source.spec, count * n, rng).reshape(count, n)
            return start, summarize_blocks(values, validate=False)

    elif isinstance(source, FileSource):
        ingest = ingest_series(
            source.path,
            column=source.column,
            value_filter=source.value_filter,
            threshold=source.threshold,
            delimiter=source.delimiter,
            missing_value=source.missing_value,
        )
        blocks, _ = partition(ingest.values, n)
        per = blocks_per_chunk(n)
        n_chunks = -(-blocks.shape[0] // per)
        do_validate = True if validate is None else validate

        def work(c: int) -> tuple[int, BlockSummaries]:
            start = c * per
            chunk = blocks[start : start + per]
            return start, summarize_blocks(chunk, validate=do_validate)

    else:
        raise InvalidParameterError(f"unsupported source type: {type(source).__name__}")

    if threads == 1:
        for c in range(n_chunks):
            yield work(c)
    else:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            yield from pool.map(work, range(n_chunks))


def source_block_count(source, n: int) -> tuple[int, int]:
    """(number of blocks, discarded trailing values) for a source."""
    if isinstance(source, SyntheticSource):
        return int(source.n_blocks), 0
    ingest = ingest_series(
        source.path,
        column=source.column,
        value_filter=source.value_filter,
        threshold=source.threshold,
        delimiter=source.delimiter,
        missing_value=source.missing_value,
    )
    blocks, discarded = partition(ingest.values, n)
    return int(blocks.shape[0]), int(discarded)


def map_moments(source, n: int, threads: int = 1) -> BlockStatsTable:
    """Moment summaries for every non-degenerate block of a source.

    Deterministic for any ``threads``: block i always sees the same
    values (stream index for synthetic sources, file slice otherwise).
    """
    idx_parts = []
    cols: dict[str, list[np.ndarray]] = {
        k: [] for k in ("mean", "m2", "m3", "m4", "skewness", "kurtosis", "ratio")
    }
    degenerate_count = 0
    n_blocks = 0
    for start, s in iter_block_stats(source, n, threads=threads):
        ok = ~s.degenerate
        degenerate_count += int(s.degenerate.sum())
        n_blocks += len(s)
        idx_parts.append(start + np.flatnonzero(ok).astype(np.int64))
        for k in cols:
            cols[k].append(getattr(s, k)[ok])

    def cat(parts):
        return np.concatenate(parts) if parts else np.empty(0)

    payload = source.describe() | {"n": int(n), "chunk_values": CHUNK_VALUES}
    discarded = 0
    if isinstance(source, FileSource):
        _, discarded = source_block_count(source, n)

    table = BlockStatsTable(
        n=n,
        block_index=cat(idx_parts),
        mean=cat(cols["mean"]),
        m2=cat(cols["m2"]),
        m3=cat(cols["m3"]),
        m4=cat(cols["m4"]),
        skewness=cat(cols["skewness"]),
        kurtosis=cat(cols["kurtosis"]),
        ratio=cat(cols["ratio"]),
        degenerate_count=degenerate_count,
        n_blocks=n_blocks,
        discarded_values=discarded,
        source_digest=_source_digest(payload),
        meta=payload,
    )
    if __debug__ and len(table):
        _assert_row_invariants(table)
    return table


def _assert_row_invariants(table: BlockStatsTable) -> None:
    # Identity K*R = n^(1/3)|S|^(4/3) and the Pearson floor, per row.
    rhs = np.cbrt(table.n) * np.abs(table.skewness) ** (4.0 / 3.0)
    lhs = table.kurtosis * table.ratio
    scale = np.maximum(np.abs(rhs), 1e-300)
    if not np.all(np.abs(lhs - rhs) <= 1e-9 * scale):
        raise AssertionError("moment identity violated in block stats")
    if not np.all(table.kurtosis >= 1.0 + table.skewness**2 - 1e-9):
        raise AssertionError("Pearson floor violated in block stats")


def table_from_summaries(n: int, start: int, s: BlockSummaries, digest: str = "") -> BlockStatsTable:
    """Small helper mainly for tests: wrap one chunk into a table."""
    ok = ~s.degenerate
    return BlockStatsTable(
        n=n,
        block_index=start + np.flatnonzero(ok).astype(np.int64),
        mean=s.mean[ok],
        m2=s.m2[ok],
        m3=s.m3[ok],
        m4=s.m4[ok],
        skewness=s.skewness[ok],
        kurtosis=s.kurtosis[ok],
        ratio=s.ratio[ok],
        degenerate_count=int(s.degenerate.sum()),
        n_blocks=len(s),
        source_digest=digest,
    )


def write_stats_csv(table: BlockStatsTable, path, meta_sidecar: bool = True) -> None:
    """Persist a table as CSV (17 significant digits) plus a JSON sidecar."""
    path = Path(path)
    data = np.column_stack([
        table.block_index.astype(np.float64),
        np.full(len(table), float(table.n)),
        table.mean,
        table.m2,
        table.skewness,
        table.kurtosis,
        table.ratio,
    ])
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(",".join(STATS_COLUMNS) + "\n")
        np.savetxt(fh, data, delimiter=",", fmt=["%d", "%d"] + ["%.17g"] * 5)
    if meta_sidecar:
        meta = {
            "n": table.n,
            "rows": len(table),
            "n_blocks": table.n_blocks,
            "degenerate_count": table.degenerate_count,
            "discarded_values": table.discarded_values,
            "source_digest": table.source_digest,
            "source": table.meta,
        }
        with open(path.with_suffix(path.suffix + ".meta.json"), "w", encoding="utf-8") as fh:
            json.dump(meta, fh, indent=2, sort_keys=True)
            fh.write("\n")


def read_stats_csv(path) -> BlockStatsTable:
    """Load a stats CSV written by :func:`write_stats_csv`."""
    path = Path(path)
    data = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
    if data.shape[1] != len(STATS_COLUMNS):
        raise SeriesError(f"unexpected column count in {path}")
    meta = {}
    degenerate_count = 0
    n_blocks = data.shape[0]
    sidecar = path.with_suffix(path.suffix + ".meta.json")
    if sidecar.exists():
        with open(sidecar, "r", encoding="utf-8") as fh:
            meta = json.load(fh)
        degenerate_count = int(meta.get("degenerate_count", 0))
        n_blocks = int(meta.get("n_blocks", n_blocks))
    n = int(data[0, 1]) if data.size else 0
    return BlockStatsTable(
        n=n,
        block_index=data[:, 0].astype(np.int64),
        mean=data[:, 2],
        m2=data[:, 3],
        skewness=data[:, 4],
        kurtosis=data[:, 5],
        ratio=data[:, 6],
        degenerate_count=degenerate_count,
        n_blocks=n_blocks,
        source_digest=str(meta.get("source_digest", "")),
        meta=meta.get("source", {}),
    )
