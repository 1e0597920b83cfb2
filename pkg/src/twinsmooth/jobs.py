"""Result lines, checkpoints, shard partitioning and the resumable batch runner."""

from __future__ import annotations

import hashlib
import json
import logging
import os
import tempfile
from dataclasses import dataclass, field
from datetime import datetime, timezone
from typing import Any, Callable, Iterable, Iterator

from .arith import Factorization
from .search import TwinRecord

log = logging.getLogger(__name__)


class ConfigMismatchError(RuntimeError):
    pass


def utc_now() -> str:
    return datetime.now(timezone.utc).isoformat(timespec="seconds").replace("+00:00", "Z")


# -- result lines -----------------------------------------------------------

def record_to_dict(rec: TwinRecord, timestamp: str | None = None) -> dict[str, Any]:
    return {
        "m": str(rec.m),
        "bits": rec.bits,
        "smoothness": rec.smoothness,
        "delta": str(rec.delta),
        "x": str(rec.x),
        "y": str(rec.y),
        "n": rec.n,
        "m_factors": rec.m_factors.as_lists(),
        "m1_factors": rec.m1_factors.as_lists(),
        "sum_prime": rec.sum_prime,
        "strategy": rec.strategy,
        "under_range": rec.under_range,
        "timestamp": timestamp or utc_now(),
    }


def record_to_line(rec: TwinRecord, timestamp: str | None = None) -> str:
    return json.dumps(record_to_dict(rec, timestamp), separators=(",", ":")) + "\n"


def _factorization(pairs) -> Factorization:
    return Factorization(tuple((int(p), int(e)) for p, e in pairs), 1)


def record_from_dict(d: dict[str, Any]) -> TwinRecord:
    return TwinRecord(
        m=int(d["m"]), bits=int(d["bits"]), smoothness=int(d["smoothness"]),
        delta=int(d["delta"]), x=int(d["x"]), y=int(d["y"]), n=int(d["n"]),
        strategy=d["strategy"], sum_prime=bool(d["sum_prime"]),
        under_range=bool(d["under_range"]),
        m_factors=_factorization(d["m_factors"]),
        m1_factors=_factorization(d["m1_factors"]),
    )


def read_lines(path: str) -> Iterator[dict[str, Any]]:
    with open(path, encoding="utf-8") as f:
        for lineno, line in enumerate(f, 1):
            line = line.strip()
            if not line:
                continue
            try:
                yield json.loads(line)
            except json.JSONDecodeError as exc:
                raise ValueError(f"{path}:{lineno}: not a JSON object ({exc})") from None


def read_ms(path: str) -> set[int]:
    if not os.path.exists(path):
        return set()
    return {int(d["m"]) for d in read_lines(path)}


# -- sharding ---------------------------------------------------------------

def partition(lo: int, hi: int, shard_id: int, shard_count: int) -> tuple[int, int]:
    """Contiguous slice of [lo, hi] for one shard.

    Sizes differ by at most one; the first (size mod shard_count) shards take
    the extra element, so [1, 7] over 3 shards is [1, 3], [4, 5], [6, 7].
    An empty slice comes back as (x, x - 1).
    """
    if shard_count < 1 or not 0 <= shard_id < shard_count:
        raise ValueError(f"shard {shard_id}/{shard_count} out of range")
    size = hi - lo + 1
    base, extra = divmod(size, shard_count)
    start = lo + shard_id * base + min(shard_id, extra)
    length = base + (1 if shard_id < extra else 0)
    return start, start + length - 1


def parse_shard(text: str) -> tuple[int, int]:
    i, _, n = text.partition("/")
    shard_id, shard_count = int(i), int(n)
    if shard_count < 1 or not 0 <= shard_id < shard_count:
        raise ValueError(f"shard {text!r} out of range")
    return shard_id, shard_count


# -- checkpoints ------------------------------------------------------------

def config_digest(params: dict[str, Any]) -> str:
    blob = json.dumps(params, sort_keys=True, default=str).encode()
    return hashlib.sha256(blob).hexdigest()


def write_checkpoint(path: str, state: dict[str, Any]) -> None:
    d = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=d, prefix=".ckpt-")
    try:
        with os.fdopen(fd, "w", encoding="utf-8") as f:
            json.dump(state, f, default=str)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def read_checkpoint(path: str) -> dict[str, Any] | None:
    if not os.path.exists(path):
        return None
    with open(path, encoding="utf-8") as f:
        return json.load(f)


# -- runner -----------------------------------------------------------------

@dataclass
class ItemResult:
    records: list[TwinRecord]
    cursor: Any
    unresolved: list[int] = field(default_factory=list)


@dataclass
class JobSpec:
    strategy: str
    params: dict[str, Any]
    shard: tuple[int, int] = (0, 1)

    @property
    def digest(self) -> str:
        return config_digest({"strategy": self.strategy, "shard": list(self.shard), **self.params})


@dataclass
class JobSummary:
    items: int = 0
    written: int = 0
    duplicates: int = 0
    unresolved: list[int] = field(default_factory=list)


def _mapper(workers: int) -> tuple[Callable, Callable[[], None]]:
    if workers <= 1:
        return map, lambda: None
    import multiprocessing

    pool = multiprocessing.Pool(workers)

    def imap(fn, items):
        return pool.imap(fn, items, chunksize=1)

    def close():
        pool.terminate()
        pool.join()

    return imap, close


def run_job(job: JobSpec, items: Iterable[Any], process: Callable[[Any], ItemResult],
            out, checkpoint: str | None = None, resume: bool = False,
            workers: int = 1) -> JobSummary:
    """Process work items in order, appending results and checkpointing after each.

    `out` is a path or a text stream.  With a path, the checkpoint records the
    byte length of the results file after every completed item; resuming
    truncates the file back to that length and skips the completed items, so
    an interrupted item is redone exactly once and nothing is emitted twice.
    """
    summary = JobSummary()
    done, offset = 0, None
    to_path = isinstance(out, (str, os.PathLike))
    if checkpoint and not to_path:
        raise ValueError("checkpointing needs a results file, not a stream")
    if resume:
        if not checkpoint:
            raise ValueError("--resume needs --checkpoint")
        state = read_checkpoint(checkpoint)
        if state is not None:
            if state["config_digest"] != job.digest:
                raise ConfigMismatchError("checkpoint was written for a different configuration")
            done, offset = state["items_done"], state["out_offset"]
            summary.unresolved = [int(v) for v in state.get("unresolved", [])]
            if state.get("finished"):
                log.info("checkpoint says the job already finished")
                return summary
            log.info("resuming after %d items at byte %d", done, offset)

    seen: set[int] = set()
    if to_path:
        fh = open(out, "a+b")
        if offset is not None:
            fh.truncate(offset)
        fh.seek(0)
        for raw in fh:
            if raw.strip():
                seen.add(int(json.loads(raw)["m"]))
        fh.seek(0, os.SEEK_END)
    else:
        fh = out

    def snapshot(cursor, finished=False):
        return {
            "strategy": job.strategy,
            "cursor": cursor,
            "items_done": done,
            "shard": job.shard[0],
            "shard_count": job.shard[1],
            "config_digest": job.digest,
            "out_offset": fh.tell() if to_path else 0,
            "unresolved": [str(v) for v in summary.unresolved],
            "finished": finished,
            "timestamp": utc_now(),
        }

    def remaining():
        for i, item in enumerate(items):
            if i >= done:
                yield item

    imap, close = _mapper(workers)
    cursor = None
    try:
        for res in imap(process, remaining()):
            for rec in res.records:
                if rec.m in seen:
                    summary.duplicates += 1
                    log.debug("duplicate m=%d (%s)", rec.m, rec.strategy)
                    continue
                seen.add(rec.m)
                line = record_to_line(rec)
                fh.write(line.encode() if to_path else line)
                summary.written += 1
            fh.flush()
            summary.unresolved.extend(res.unresolved)
            done += 1
            summary.items += 1
            cursor = res.cursor
            if checkpoint:
                write_checkpoint(checkpoint, snapshot(cursor))
        if checkpoint:
            write_checkpoint(checkpoint, snapshot(cursor, finished=True))
    finally:
        close()
        if to_path:
            fh.close()
    return summary


def blocks(values: Iterable[Any], size: int) -> Iterator[list[Any]]:
    block = []
    for v in values:
        block.append(v)
        if len(block) == size:
            yield block
            block = []
    if block:
        yield block


def segments(lo: int, hi: int, size: int) -> Iterator[tuple[int, int]]:
    while lo <= hi:
        yield lo, min(lo + size - 1, hi)
        lo += size
