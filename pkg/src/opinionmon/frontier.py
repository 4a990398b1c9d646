"""Bloom-filter deduplication frontier for ingested items.

Keys (URLs or comment ids) are normalized, tested against a Bloom filter
and, when new, appended to a JSONL intake log.
"""

from __future__ import annotations

import hashlib
import json
import math
import struct
import threading
from dataclasses import asdict, dataclass, field
from datetime import datetime, timezone
from enum import Enum
from pathlib import Path
from urllib.parse import urlsplit, urlunsplit

MAGIC = b"BLMF"
VERSION = 1
_HEADER = struct.Struct("<4sIQIQQ")
_MASK64 = (1 << 64) - 1


class InvalidParameter(ValueError):
    pass


class FrontierIOError(OSError):
    pass


class Membership(str, Enum):
    NEW = "NEW"
    DUPLICATE = "DUPLICATE"


class OfferResult(str, Enum):
    ACCEPTED = "ACCEPTED"
    REJECTED_DUPLICATE = "REJECTED_DUPLICATE"


def _seed_bytes(seed: int) -> bytes:
    return (seed & _MASK64).to_bytes(8, "little")


class BloomFilter:
    """Bit-array membership set with k probes from double hashing.

    Probe i for a key is ``(h1 + i*h2) mod m`` where h1, h2 are the two
    64-bit halves of a seeded BLAKE2b digest of the key.
    """

    def __init__(self, m: int, k: int, seed: int = 0):
        if not isinstance(m, int) or m < 8:
            raise InvalidParameter(f"m must be >= 8, got {m!r}")
        if not isinstance(k, int) or not 1 <= k <= 16:
            raise InvalidParameter(f"k must be in [1, 16], got {k!r}")
        self.m = m
        self.k = k
        self.seed = seed & _MASK64
        self.n_inserted = 0
        self.bits = bytearray((m + 7) // 8)
        self._salt = _seed_bytes(self.seed)
        self._lock = threading.Lock()

    @property
    def hash_seeds(self) -> list[int]:
        """The k per-probe 64-bit seeds (offsets into the double-hash family)."""
        return [(self.seed + i * 0x9E3779B97F4A7C15) & _MASK64 for i in range(self.k)]

    def _probes(self, key: str) -> list[int]:
        digest = hashlib.blake2b(key.encode("utf-8"), digest_size=16, key=self._salt).digest()
        h1 = int.from_bytes(digest[:8], "little")
        h2 = int.from_bytes(digest[8:], "little") | 1
        m = self.m
        return [(h1 + i * h2) % m for i in range(self.k)]

    def __contains__(self, key: str) -> bool:
        bits = self.bits
        return all(bits[p >> 3] & (1 << (p & 7)) for p in self._probes(key))

    def test(self, key: str) -> bool:
        return key in self

    def check_and_insert(self, key: str) -> Membership:
        if not key:
            raise InvalidParameter("key must be non-empty")
        probes = self._probes(key)
        bits = self.bits
        with self._lock:
            new = False
            for p in probes:
                byte, mask = p >> 3, 1 << (p & 7)
                if not bits[byte] & mask:
                    new = True
                    bits[byte] |= mask
            if new:
                self.n_inserted += 1
                return Membership.NEW
            return Membership.DUPLICATE

    def expected_fpr(self, n: int | None = None) -> float:
        n = self.n_inserted if n is None else n
        return (1.0 - math.exp(-self.k * n / self.m)) ** self.k

    def to_bytes(self) -> bytes:
        with self._lock:
            header = _HEADER.pack(MAGIC, VERSION, self.m, self.k, self.seed, self.n_inserted)
            return header + bytes(self.bits)

    @classmethod
    def from_bytes(cls, data: bytes) -> "BloomFilter":
        if len(data) < _HEADER.size:
            raise InvalidParameter("snapshot truncated")
        magic, version, m, k, seed, n = _HEADER.unpack_from(data)
        if magic != MAGIC:
            raise InvalidParameter(f"bad snapshot magic {magic!r}")
        if version != VERSION:
            raise InvalidParameter(f"unsupported snapshot version {version}")
        body = data[_HEADER.size:]
        if len(body) != (m + 7) // 8:
            raise InvalidParameter("snapshot bit array length does not match m")
        bf = cls(m, k, seed)
        bf.bits[:] = body
        bf.n_inserted = n
        return bf

    def save(self, path: str | Path) -> None:
        path = Path(path)
        tmp = path.with_suffix(path.suffix + ".tmp")
        tmp.write_bytes(self.to_bytes())
        tmp.replace(path)

    @classmethod
    def load(cls, path: str | Path) -> "BloomFilter":
        return cls.from_bytes(Path(path).read_bytes())


def bloom_new(m: int, k: int, seed: int) -> BloomFilter:
    return BloomFilter(m, k, seed)


def normalize_key(key: str) -> str:
    """Canonical form for dedup: URLs get lowercase scheme/host and no fragment.

    Query strings keep their parameter order. Non-URL keys only lose
    surrounding whitespace.
    """
    key = key.strip()
    if "://" not in key:
        return key
    parts = urlsplit(key)
    netloc = parts.netloc
    if "@" in netloc:
        userinfo, _, host = netloc.rpartition("@")
        netloc = f"{userinfo}@{host.lower()}"
    else:
        netloc = netloc.lower()
    return urlunsplit((parts.scheme.lower(), netloc, parts.path, parts.query, ""))


@dataclass
class FrontierItem:
    key: str
    payload_path: str = ""
    enqueued_at: str = field(default_factory=lambda: datetime.now(timezone.utc).isoformat())

    def __post_init__(self):
        if not self.key or not self.key.strip():
            raise InvalidParameter("FrontierItem.key must be non-empty")
        self.key = normalize_key(self.key)


class Frontier:
    """Dedup gate in front of an append-only intake log.

    A key whose intake append fails stays marked in the filter: ingestion
    is at-most-once.
    """

    def __init__(self, bloom: BloomFilter, intake_log: str | Path):
        self.bloom = bloom
        self.intake_log = Path(intake_log)
        self.accepted = 0
        self.duplicates = 0
        self._log_lock = threading.Lock()

    def offer(self, item: FrontierItem) -> OfferResult:
        if self.bloom.check_and_insert(item.key) is Membership.DUPLICATE:
            self.duplicates += 1
            return OfferResult.REJECTED_DUPLICATE
        line = json.dumps(asdict(item), ensure_ascii=False) + "\n"
        try:
            with self._log_lock, open(self.intake_log, "a", encoding="utf-8") as fh:
                fh.write(line)
        except OSError as exc:
            raise FrontierIOError(f"cannot append to intake log {self.intake_log}: {exc}") from exc
        self.accepted += 1
        return OfferResult.ACCEPTED
