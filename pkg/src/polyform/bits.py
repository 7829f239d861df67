"""Static bit vectors with rank and select.

Positions are 1-based and ``rank1(i)`` counts ones among positions ``1..i``.
Two storage modes are offered:

``plain``
    The raw bits in fixed-size chunks (Python ints), a two-level rank
    directory (superblock totals, block offsets) and sampled select hints.
    Block and superblock widths grow with ``log2(n)`` so the directory
    shrinks relative to the payload as the vector gets longer.

``sparse``
    Elias-Fano coding of the one positions: a packed array of low bits and
    a unary-coded plain vector of high parts.  Good when ones are rare.

``payload_bits`` counts what would be written to disk; ``index_bits``
counts the rank/select directory, which is rebuilt on load.
"""

from __future__ import annotations

import struct
from bisect import bisect_left, bisect_right
from typing import Iterable, Sequence

import numpy as np

from .errors import ContainerError, IndexOutOfRange

PLAIN = "plain"
SPARSE = "sparse"
MODES = (PLAIN, SPARSE)
_MODE_BYTE = {PLAIN: 0, SPARSE: 1}
_BYTE_MODE = {v: k for k, v in _MODE_BYTE.items()}


def _width(value: int) -> int:
    """Bits needed to store integers in ``[0, value]``."""
    return max(1, int(value).bit_length())


def _to_array(bits) -> np.ndarray:
    """Coerce a bit source into a uint8 array of zeros and ones."""
    if isinstance(bits, BitVector):
        return bits.to_numpy()
    if isinstance(bits, str):
        raw = np.frombuffer(bits.encode("ascii"), dtype=np.uint8)
        if raw.size and not np.all((raw == 48) | (raw == 49)):
            raise ValueError("bit strings may only contain '0' and '1'")
        return (raw == 49).astype(np.uint8)
    arr = np.asarray(bits)
    if arr.size == 0:
        return np.zeros(0, dtype=np.uint8)
    return (arr.reshape(-1) != 0).astype(np.uint8)


class BitVector:
    """Immutable bit sequence answering rank/select queries.

    >>> bv = BitVector("10110")
    >>> bv.rank1(3), bv.select1(3), bv.select1(4)
    (2, 4, None)
    """

    def __init__(self, bits: Iterable[int] | str | np.ndarray = (), mode: str = PLAIN):
        if mode not in MODES:
            raise ValueError(f"unknown bitvector mode {mode!r}")
        arr = _to_array(bits)
        self.mode = mode
        self.length = int(arr.size)
        if mode == PLAIN:
            self._init_plain(np.packbits(arr).tobytes(), self.length)
        else:
            self._init_sparse(np.flatnonzero(arr), self.length)

    # construction helpers -------------------------------------------------

    @classmethod
    def from_positions(cls, positions: Sequence[int], length: int, mode: str = PLAIN) -> "BitVector":
        """Build from sorted 1-based positions of the ones."""
        pos = np.asarray(positions, dtype=np.int64)
        if pos.size and (pos[0] < 1 or pos[-1] > length or np.any(np.diff(pos) <= 0)):
            raise ValueError("positions must be strictly increasing within [1, length]")
        obj = cls.__new__(cls)
        obj.mode = mode
        obj.length = int(length)
        if mode == PLAIN:
            arr = np.zeros(length, dtype=np.uint8)
            arr[pos - 1] = 1
            obj._init_plain(np.packbits(arr).tobytes(), obj.length)
        elif mode == SPARSE:
            obj._init_sparse(pos - 1, obj.length)
        else:
            raise ValueError(f"unknown bitvector mode {mode!r}")
        return obj

    def _init_plain(self, packed: bytes, n: int) -> None:
        lg = _width(n)
        self._B = B = 16 * lg
        self._m = m = max(1, (lg + 1) // 2)
        step = B // 8
        nblocks = -(-n // B)
        packed = packed + bytes(nblocks * step - len(packed))
        chunks = [int.from_bytes(packed[i * step:(i + 1) * step], "big") for i in range(nblocks)]
        sb_cum: list[int] = []
        blk: list[int] = []
        total = 0
        inner = 0
        for b, c in enumerate(chunks):
            if b % m == 0:
                sb_cum.append(total)
                inner = 0
            blk.append(inner)
            cnt = c.bit_count()
            inner += cnt
            total += cnt
        self._chunks = chunks
        self._sb = sb_cum
        self._blk = blk
        self.ones = total
        # select hints: superblock holding every S-th one (and zero)
        self._S = S = lg * lg
        sbbits = B * m
        s1: list[int] = []
        s0: list[int] = []
        want1 = 1
        want0 = 1
        for s, before in enumerate(sb_cum):
            ones_here = (sb_cum[s + 1] if s + 1 < len(sb_cum) else total) - before
            zeros_before = s * sbbits - before
            zeros_here = min(sbbits, n - s * sbbits) - ones_here
            while want1 <= before + ones_here:
                s1.append(s)
                want1 += S
            while want0 <= zeros_before + zeros_here:
                s0.append(s)
                want0 += S
        self._s1 = s1
        self._s0 = s0

    def _init_sparse(self, zero_based: np.ndarray, n: int) -> None:
        pos = np.asarray(zero_based, dtype=np.int64)
        m = int(pos.size)
        w = int(n // m).bit_length() - 1 if m and n > m else 0
        self._w = w
        self._mask = (1 << w) - 1
        self._lows = (pos & self._mask).tolist() if w else [0] * m
        high_len = m + (n >> w) + 1
        high = np.zeros(high_len, dtype=np.uint8)
        if m:
            high[(pos >> w) + np.arange(m)] = 1
        self._high = BitVector(high, PLAIN)
        self.ones = m

    # accounting -----------------------------------------------------------

    @property
    def payload_bits(self) -> int:
        if self.mode == PLAIN:
            return self.length
        return 64 + self.ones * self._w + self._high.length

    @property
    def index_bits(self) -> int:
        if self.mode == SPARSE:
            return self._high.index_bits
        nsb = len(self._sb)
        sbbits = self._B * self._m
        hint = _width(nsb)
        return (
            nsb * _width(self.length)
            + len(self._blk) * _width(sbbits)
            + (len(self._s1) + len(self._s0)) * hint
        )

    @property
    def zeros(self) -> int:
        return self.length - self.ones

    def __len__(self) -> int:
        return self.length

    def __repr__(self) -> str:
        return f"BitVector(length={self.length}, ones={self.ones}, mode={self.mode!r})"

    def __eq__(self, other) -> bool:
        if not isinstance(other, BitVector):
            return NotImplemented
        return self.length == other.length and np.array_equal(self.to_numpy(), other.to_numpy())

    # queries --------------------------------------------------------------

    def __getitem__(self, i: int) -> int:
        if not 1 <= i <= self.length:
            raise IndexOutOfRange(f"position {i} outside [1, {self.length}]")
        if self.mode == PLAIN:
            b, r = divmod(i - 1, self._B)
            return (self._chunks[b] >> (self._B - 1 - r)) & 1
        return self._sparse_get(i)

    def rank1(self, i: int) -> int:
        if i == 0:
            return 0
        if not 0 < i <= self.length:
            raise IndexOutOfRange(f"rank argument {i} outside [0, {self.length}]")
        if self.mode == SPARSE:
            return self._sparse_rank(i)
        B = self._B
        b, r = divmod(i, B)
        if r == 0:
            b -= 1
            r = B
        return self._sb[b // self._m] + self._blk[b] + (self._chunks[b] >> (B - r)).bit_count()

    def rank0(self, i: int) -> int:
        return i - self.rank1(i)

    def select1(self, j: int) -> int | None:
        if j < 1 or j > self.ones:
            return None
        if self.mode == SPARSE:
            p = self._high.select1(j)
            return (((p - j) << self._w) | self._lows[j - 1]) + 1
        B, m = self._B, self._m
        sb = self._sb
        t = (j - 1) // self._S
        lo = self._s1[t]
        hi = self._s1[t + 1] if t + 1 < len(self._s1) else len(sb) - 1
        s = bisect_left(sb, j, lo, hi + 1) - 1
        rem = j - sb[s]
        b0 = s * m
        b = bisect_left(self._blk, rem, b0, min(b0 + m, len(self._blk))) - 1
        return b * B + self._chunk_select(self._chunks[b], rem - self._blk[b], True)

    def select0(self, j: int) -> int | None:
        if j < 1 or j > self.zeros:
            return None
        if self.mode == SPARSE:
            lo, hi = 1, self.length
            while lo < hi:
                mid = (lo + hi) // 2
                if mid - self.rank1(mid) >= j:
                    hi = mid
                else:
                    lo = mid + 1
            return lo
        B, m = self._B, self._m
        sbbits = B * m
        sb = self._sb
        t = (j - 1) // self._S
        lo = self._s0[t]
        hi = self._s0[t + 1] if t + 1 < len(self._s0) else len(sb) - 1
        # last superblock whose preceding zero count is below j
        while lo < hi:
            mid = (lo + hi + 1) // 2
            if mid * sbbits - sb[mid] < j:
                lo = mid
            else:
                hi = mid - 1
        s = lo
        rem = j - (s * sbbits - sb[s])
        b = s * m
        end = min(b + m, len(self._blk))
        while b + 1 < end and (b + 1 - s * m) * B - self._blk[b + 1] < rem:
            b += 1
        return b * B + self._chunk_select(self._chunks[b], rem - ((b - s * m) * B - self._blk[b]), False)

    def _chunk_select(self, chunk: int, t: int, one: bool) -> int:
        """Smallest r in [1, B] whose r-bit prefix holds t ones (or zeros)."""
        B = self._B
        lo, hi = 1, B
        while lo < hi:
            mid = (lo + hi) // 2
            c = (chunk >> (B - mid)).bit_count()
            if (c if one else mid - c) >= t:
                hi = mid
            else:
                lo = mid + 1
        return lo

    def _ones_run(self, pos: int) -> int:
        """Length of the run of ones starting at ``pos`` (plain mode)."""
        B = self._B
        run = 0
        b, off = divmod(pos - 1, B)
        while b < len(self._chunks):
            avail = B - off
            inv = ~self._chunks[b] & ((1 << avail) - 1)
            if inv:
                return run + avail - inv.bit_length()
            run += avail
            b += 1
            off = 0
        return min(run, max(0, self.length - pos + 1))

    def _bucket(self, x: int) -> tuple[int, int]:
        """Index range of ``lows`` holding the ones whose high part is ``x >> w``."""
        bucket = x >> self._w
        high = self._high
        p = high.select0(bucket) if bucket else 0
        start = p - bucket
        return start, start + high._ones_run(p + 1)

    def _sparse_rank(self, i: int) -> int:
        x = i - 1
        start, end = self._bucket(x)
        return bisect_right(self._lows, x & self._mask, start, end)

    def _sparse_get(self, i: int) -> int:
        x = i - 1
        start, end = self._bucket(x)
        low = x & self._mask
        k = bisect_left(self._lows, low, start, end)
        return int(k < end and self._lows[k] == low)

    def read_bits(self, pos: int, width: int) -> int:
        """Integer formed by ``width`` bits starting at ``pos`` (MSB first), zero-padded past the end."""
        val = 0
        if self.mode == PLAIN:
            B = self._B
            start = pos - 1
            b, off = divmod(start, B)
            got = 0
            while got < width:
                chunk = self._chunks[b] if b < len(self._chunks) else 0
                take = min(width - got, B - off)
                val = (val << take) | ((chunk >> (B - off - take)) & ((1 << take) - 1))
                got += take
                b += 1
                off = 0
            return val
        for p in range(pos, pos + width):
            val = (val << 1) | (self[p] if p <= self.length else 0)
        return val

    # conversion -----------------------------------------------------------

    def to_numpy(self) -> np.ndarray:
        if self.mode == PLAIN:
            raw = np.frombuffer(b"".join(c.to_bytes(self._B // 8, "big") for c in self._chunks), dtype=np.uint8)
            return np.unpackbits(raw)[: self.length].copy()
        out = np.zeros(self.length, dtype=np.uint8)
        for j in range(1, self.ones + 1):
            out[self.select1(j) - 1] = 1
        return out

    def positions(self) -> list[int]:
        """1-based positions of every one, ascending."""
        if self.mode == PLAIN:
            return (np.flatnonzero(self.to_numpy()) + 1).tolist()
        return [self.select1(j) for j in range(1, self.ones + 1)]

    def to01(self) -> str:
        return "".join("1" if b else "0" for b in self.to_numpy())

    # serialization --------------------------------------------------------

    def _body_bits(self) -> np.ndarray:
        if self.mode == PLAIN:
            return self.to_numpy()
        head = np.unpackbits(np.frombuffer(struct.pack(">Q", self.ones), dtype=np.uint8))
        w = self._w
        if w and self.ones:
            lows = np.asarray(self._lows, dtype=np.uint64)
            shifts = np.arange(w - 1, -1, -1, dtype=np.uint64)
            low_bits = ((lows[:, None] >> shifts) & np.uint64(1)).astype(np.uint8).reshape(-1)
        else:
            low_bits = np.zeros(0, dtype=np.uint8)
        return np.concatenate([head, low_bits, self._high.to_numpy()])

    def serialize(self) -> tuple[bytes, int]:
        """Return ``(data, bit_length)``: mode byte, u64 LE length, MSB-first body."""
        body = self._body_bits()
        data = bytes([_MODE_BYTE[self.mode]]) + struct.pack("<Q", self.length) + np.packbits(body).tobytes()
        return data, 72 + int(body.size)

    @classmethod
    def deserialize(cls, data: bytes, bit_length: int) -> "BitVector":
        if bit_length < 72 or len(data) < 9:
            raise ContainerError("bitvector section too short")
        mode = _BYTE_MODE.get(data[0])
        if mode is None:
            raise ContainerError(f"unknown bitvector mode byte {data[0]}")
        (n,) = struct.unpack("<Q", data[1:9])
        body = np.unpackbits(np.frombuffer(data[9:], dtype=np.uint8))[: bit_length - 72]
        if mode == PLAIN:
            if body.size != n:
                raise ContainerError("plain bitvector length mismatch")
            return cls(body, PLAIN)
        if body.size < 64:
            raise ContainerError("sparse bitvector missing count")
        m = int(np.packbits(body[:64]).view(">u8")[0])
        w = int(n // m).bit_length() - 1 if m and n > m else 0
        low_end = 64 + m * w
        high = body[low_end:]
        if high.size != m + (n >> w) + 1 or int(high.sum()) != m:
            raise ContainerError("sparse bitvector body is inconsistent")
        if w:
            weights = (1 << np.arange(w - 1, -1, -1, dtype=np.int64))
            lows = body[64:low_end].reshape(m, w).astype(np.int64) @ weights
        else:
            lows = np.zeros(m, dtype=np.int64)
        idx = np.flatnonzero(high)
        pos = ((idx - np.arange(m)) << w) | lows
        return cls.from_positions(pos + 1, n, SPARSE)


def best_mode(bits) -> BitVector:
    """Build in whichever mode has the smaller payload."""
    plain = BitVector(bits, PLAIN)
    sparse = BitVector(plain.to_numpy(), SPARSE)
    return sparse if sparse.payload_bits < plain.payload_bits else plain
