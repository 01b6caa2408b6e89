"""Sign assignments ``alpha(R) in {+1, -1}`` and the sign-file JSON format.

Sign file layout::

    {"d": 2, "n": 1, "shapes": [{"r": [0, 1], "signs_hex": "02"}, ...]}

``signs_hex`` packs ``2^n`` bits, bit ``j`` being
``(byte[j // 8] >> (j % 8)) & 1``; bit 1 means ``+1``.  Position ``j`` is the
flattened rectangle position with the first axis most significant.  Shapes
are listed in lexicographic order, each exactly once.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .dyadic import enumerate_shapes
from .errors import SignFileError
from .rng import Xoshiro256StarStar


@dataclass(frozen=True, eq=False)
class SignAssignment:
    """One ``+-1`` array of length ``2^n`` per shape in lexicographic order."""

    n: int
    d: int
    signs: dict = field(repr=False)

    def __post_init__(self):
        shapes = enumerate_shapes(self.n, self.d)
        if list(self.signs) != shapes:
            got = set(self.signs)
            missing = [r for r in shapes if r not in got]
            if missing:
                raise SignFileError(f"missing shape {missing[0]}")
            extra = [r for r in got if r not in set(shapes)]
            if extra:
                raise SignFileError(f"shape {extra[0]} does not have length {self.n}")
            # same keys, other order: normalize
        frozen = {}
        for r in shapes:
            arr = np.asarray(self.signs[r])
            if arr.size != 1 << self.n:
                raise SignFileError(f"shape {r}: expected {1 << self.n} signs, got {arr.size}")
            if not np.all(np.abs(arr) == 1):
                raise SignFileError(f"shape {r}: signs must be +1 or -1")
            arr = arr.astype(np.int8).ravel()
            arr.flags.writeable = False
            frozen[r] = arr
        object.__setattr__(self, "signs", frozen)

    @property
    def shapes(self) -> list[tuple[int, ...]]:
        return list(self.signs)

    @property
    def n_signs(self) -> int:
        return len(self.signs) << self.n

    def __getitem__(self, r) -> np.ndarray:
        try:
            return self.signs[tuple(r)]
        except KeyError:
            raise SignFileError(f"shape {tuple(r)} is not in this assignment (n={self.n}, d={self.d})") from None

    def __eq__(self, other):
        if not isinstance(other, SignAssignment):
            return NotImplemented
        return (self.n, self.d) == (other.n, other.d) and all(
            np.array_equal(self.signs[r], other.signs[r]) for r in self.signs
        )

    def bits(self) -> np.ndarray:
        """All signs as one 0/1 vector (shapes in order, positions in order)."""
        return np.concatenate([(a > 0).astype(np.uint8) for a in self.signs.values()])

    def flatten(self) -> np.ndarray:
        return np.concatenate(list(self.signs.values())).astype(np.int8)

    @classmethod
    def from_flat(cls, n: int, d: int, flat) -> "SignAssignment":
        flat = np.asarray(flat)
        shapes = enumerate_shapes(n, d)
        size = 1 << n
        if flat.size != len(shapes) * size:
            raise SignFileError(f"expected {len(shapes) * size} signs, got {flat.size}")
        return cls(n, d, {r: flat[i * size:(i + 1) * size] for i, r in enumerate(shapes)})

    @classmethod
    def from_bits(cls, n: int, d: int, bits) -> "SignAssignment":
        return cls.from_flat(n, d, 2 * np.asarray(bits, dtype=np.int8) - 1)

    def flipped(self, r, position: int) -> "SignAssignment":
        arrays = {s: a.copy() for s, a in self.signs.items()}
        arrays[tuple(r)][position] *= -1
        return SignAssignment(self.n, self.d, arrays)

    def negated(self) -> "SignAssignment":
        return SignAssignment(self.n, self.d, {r: -a for r, a in self.signs.items()})

    # serialization

    def to_dict(self) -> dict:
        return {
            "d": self.d,
            "n": self.n,
            "shapes": [{"r": list(r), "signs_hex": _pack_hex(a)} for r, a in self.signs.items()],
        }

    @classmethod
    def from_dict(cls, doc: dict) -> "SignAssignment":
        try:
            d, n, entries = int(doc["d"]), int(doc["n"]), doc["shapes"]
        except (KeyError, TypeError, ValueError) as exc:
            raise SignFileError(f"sign file needs integer 'd', 'n' and a 'shapes' list ({exc})") from None
        if d < 1 or n < 0:
            raise SignFileError(f"invalid d={d} or n={n}")
        if not isinstance(entries, list):
            raise SignFileError("'shapes' must be a list")
        expected = enumerate_shapes(n, d)
        seen = {}
        for i, entry in enumerate(entries):
            try:
                r = tuple(int(k) for k in entry["r"])
                hexstr = entry["signs_hex"]
            except (KeyError, TypeError, ValueError):
                raise SignFileError(f"shape entry {i} needs 'r' and 'signs_hex'") from None
            if len(r) != d or sum(r) != n or min(r) < 0:
                raise SignFileError(f"shape {r} is not in H_{n} for d={d}")
            if r in seen:
                raise SignFileError(f"duplicate shape {r}")
            if seen and r < list(seen)[-1]:
                raise SignFileError(f"shape {r} is out of lexicographic order")
            seen[r] = _unpack_hex(hexstr, n, r)
        for r in expected:
            if r not in seen:
                raise SignFileError(f"missing shape {r}")
        return cls(n, d, seen)

    def dumps(self, metadata: dict | None = None) -> str:
        doc = self.to_dict()
        if metadata is not None:
            doc["metadata"] = metadata
        return json.dumps(doc, indent=1) + "\n"

    def save(self, path, metadata: dict | None = None) -> None:
        Path(path).write_text(self.dumps(metadata), encoding="utf-8", newline="\n")

    @classmethod
    def loads(cls, text: str) -> "SignAssignment":
        try:
            doc = json.loads(text)
        except json.JSONDecodeError as exc:
            raise SignFileError(f"sign file is not valid JSON: {exc}") from None
        if not isinstance(doc, dict):
            raise SignFileError("sign file must be a JSON object")
        return cls.from_dict(doc)

    @classmethod
    def load(cls, path) -> "SignAssignment":
        return cls.loads(Path(path).read_text(encoding="utf-8"))


def _pack_hex(signs: np.ndarray) -> str:
    bits = (np.asarray(signs) > 0).astype(np.uint8)
    return np.packbits(bits, bitorder="little").tobytes().hex()


def _unpack_hex(hexstr, n: int, r) -> np.ndarray:
    count = 1 << n
    nbytes = -(-count // 8)
    try:
        raw = bytes.fromhex(hexstr)
    except (TypeError, ValueError):
        raise SignFileError(f"shape {r}: signs_hex is not a hex string") from None
    if len(raw) != nbytes:
        raise SignFileError(f"shape {r}: expected {nbytes} bytes of signs, got {len(raw)}")
    bits = np.unpackbits(np.frombuffer(raw, dtype=np.uint8), bitorder="little")
    if bits[count:].any():
        raise SignFileError(f"shape {r}: padding bits must be zero")
    return 2 * bits[:count].astype(np.int8) - 1


def random_signs(seed: int, n: int, d: int) -> SignAssignment:
    """Fair independent signs from xoshiro256** seeded with ``seed``.

    One bit per sign, consumed shape by shape (lexicographic) and position by
    position, 64 bits per generator output, least significant bit first.
    """
    total = len(enumerate_shapes(n, d)) << n
    bits = Xoshiro256StarStar(seed).bits(total)
    return SignAssignment.from_bits(n, d, bits)


def all_plus(n: int, d: int) -> SignAssignment:
    return SignAssignment.from_flat(n, d, np.ones(len(enumerate_shapes(n, d)) << n, dtype=np.int8))
