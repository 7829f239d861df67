"""Binary container for encoded structures, plus space reports.

Layout: ``b"PFS1"``, version byte, kind byte, section count byte, then
for every section a tag byte, the section length in bits (u64 LE) and the
MSB-first payload.  Bit vectors are stored as mode byte, u64 LE length
and raw bits (plain) or Elias-Fano bits (sparse).  Rank/select indexes
are rebuilt on load and never written.
"""

from __future__ import annotations

import struct
from dataclasses import asdict, dataclass, field

from .bars import BarGraphStructure
from .bfslabel import LabeledBfsTree
from .bits import BitVector
from .covering import CoveringStructure
from .errors import ContainerError
from .sliced import SlicedStructure
from .treekit import COMPACT, OrdinalTree

MAGIC = b"PFS1"
VERSION = 1
KIND_CODES = {"bfs": 1, "nice": 2, "sliced": 3, "bar": 4}
KIND_NAMES = {v: k for k, v in KIND_CODES.items()}

TAG_META = 0x01
TAG_ROOT = 0x02
TAG_TREE = 0x10
TAG_LEFT = 0x11
TAG_TOP = 0x12
TAG_BOT = 0x13
TAG_LABELS = 0x14
TAG_S = 0x20
TAG_B = 0x21
TAG_CTREE = 0x22

TAG_NAMES = {
    TAG_META: "meta", TAG_ROOT: "root", TAG_TREE: "tree", TAG_LEFT: "left",
    TAG_TOP: "top", TAG_BOT: "bot", TAG_LABELS: "labels", TAG_S: "s_g",
    TAG_B: "b_g", TAG_CTREE: "ctree",
}


def kind_of(structure) -> str:
    if isinstance(structure, LabeledBfsTree):
        return "bfs"
    if isinstance(structure, SlicedStructure):
        return "sliced"
    if isinstance(structure, CoveringStructure):
        return "nice"
    if isinstance(structure, BarGraphStructure):
        return "bar"
    raise TypeError(f"cannot serialize {type(structure).__name__}")


def _ints(values, fmt: str = "<Q") -> tuple[bytes, int]:
    data = b"".join(struct.pack(fmt, int(v)) for v in values)
    return data, 8 * len(data)


def _bv(bv: BitVector) -> tuple[bytes, int]:
    return bv.serialize()


def sections(structure) -> list[tuple[int, bytes, int]]:
    """``(tag, payload, bit_length)`` for every section of ``structure``."""
    kind = kind_of(structure)
    out: list[tuple[int, bytes, int]] = []
    if kind == "bfs":
        out.append((TAG_META, *_ints([structure.n])))
        out.append((TAG_ROOT, *_ints(structure.root_coord, "<q")))
        out.append((TAG_TREE, *_bv(structure.tree.shape_bits())))
        out.append((TAG_LABELS, *_bv(structure.labels)))
    elif kind == "nice":
        out.append((TAG_META, *_ints([structure.n, structure.strip_height])))
        out.append((TAG_TREE, *_bv(structure.tree.shape_bits())))
        out.append((TAG_LEFT, *_bv(structure.left_bits)))
    elif kind == "sliced":
        s = structure
        meta = [s.n, s.f, s.i_star, s.first_top, s.first_bot, s.slice_count]
        out.append((TAG_META, *_ints(meta)))
        out.append((TAG_TREE, *_bv(s.base.tree.shape_bits())))
        out.append((TAG_LEFT, *_bv(s.base.left_bits)))
        out.append((TAG_TOP, *_bv(s.top_bits)))
        out.append((TAG_BOT, *_bv(s.bot_bits)))
    else:
        g = structure
        out.append((TAG_META, *_ints([g.n, g.k])))
        out.append((TAG_S, *_bv(g.s_bits)))
        out.append((TAG_B, *_bv(g.b_bits)))
        out.append((TAG_CTREE, *_bv(g.ctree.shape_bits())))
    return out


def dump(structure) -> bytes:
    secs = sections(structure)
    head = MAGIC + bytes([VERSION, KIND_CODES[kind_of(structure)], len(secs)])
    body = b"".join(bytes([tag]) + struct.pack("<Q", nbits) + data for tag, data, nbits in secs)
    return head + body


def read_sections(data: bytes) -> tuple[str, dict[int, tuple[bytes, int]]]:
    if len(data) < 7 or data[:4] != MAGIC:
        raise ContainerError("not a polyform container (bad magic)")
    if data[4] != VERSION:
        raise ContainerError(f"unsupported container version {data[4]}")
    kind = KIND_NAMES.get(data[5])
    if kind is None:
        raise ContainerError(f"unknown structure kind {data[5]}")
    count = data[6]
    pos = 7
    found: dict[int, tuple[bytes, int]] = {}
    for _ in range(count):
        if pos + 9 > len(data):
            raise ContainerError("truncated section header")
        tag = data[pos]
        (nbits,) = struct.unpack("<Q", data[pos + 1:pos + 9])
        nbytes = -(-nbits // 8)
        payload = data[pos + 9:pos + 9 + nbytes]
        if len(payload) != nbytes:
            raise ContainerError("truncated section payload")
        found[tag] = (payload, nbits)
        pos += 9 + nbytes
    if pos != len(data):
        raise ContainerError("trailing bytes after last section")
    return kind, found


def _need(found, tag):
    try:
        return found[tag]
    except KeyError:
        raise ContainerError(f"missing section {TAG_NAMES.get(tag, tag)}") from None


def _read_ints(found, tag, count: int, fmt: str = "<Q") -> list[int]:
    payload, nbits = _need(found, tag)
    if nbits != 64 * count:
        raise ContainerError(f"section {TAG_NAMES[tag]} should hold {count} integers")
    return [struct.unpack(fmt, payload[8 * i:8 * i + 8])[0] for i in range(count)]


def _read_bv(found, tag) -> BitVector:
    return BitVector.deserialize(*_need(found, tag))


def _read_tree(found, tag, mode: str) -> OrdinalTree:
    try:
        return OrdinalTree.from_shape(_read_bv(found, tag), mode)
    except ValueError as exc:
        raise ContainerError(f"bad tree shape: {exc}") from None


def load(data: bytes, mode: str = COMPACT):
    kind, found = read_sections(data)
    try:
        if kind == "bfs":
            (n,) = _read_ints(found, TAG_META, 1)
            root = _read_ints(found, TAG_ROOT, 2, "<q")
            tree = _read_tree(found, TAG_TREE, mode)
            if tree.node_count != n:
                raise ContainerError("node count does not match n")
            return LabeledBfsTree(tree, _read_bv(found, TAG_LABELS), tuple(root))
        if kind == "nice":
            n, h = _read_ints(found, TAG_META, 2)
            cs = CoveringStructure(_read_tree(found, TAG_TREE, mode), _read_bv(found, TAG_LEFT), h)
            if cs.n != n:
                raise ContainerError("cell count does not match n")
            return cs
        if kind == "sliced":
            n, f, i_star, first_top, first_bot, slices = _read_ints(found, TAG_META, 6)
            base = CoveringStructure(_read_tree(found, TAG_TREE, mode), _read_bv(found, TAG_LEFT), f)
            if base.n != n:
                raise ContainerError("cell count does not match n")
            return SlicedStructure(base, _read_bv(found, TAG_TOP), _read_bv(found, TAG_BOT),
                                   f, i_star, first_top, first_bot, slices)
        n, k = _read_ints(found, TAG_META, 2)
        g = BarGraphStructure(_read_bv(found, TAG_S), _read_bv(found, TAG_B), k, _read_tree(found, TAG_CTREE, mode))
        if g.n != n:
            raise ContainerError("cell count does not match n")
        return g
    except ContainerError:
        raise
    except (ValueError, IndexError) as exc:
        raise ContainerError(f"inconsistent container: {exc}") from None


def _trees(structure) -> list[OrdinalTree]:
    kind = kind_of(structure)
    if kind == "bar":
        return [structure.ctree]
    return [structure.tree]


@dataclass
class SpaceReport:
    """``payload_bits`` sums the framed sections; ``raw_bits`` drops the framing."""

    n: int
    kind: str
    payload_bits: int
    bits_per_cell: float
    raw_bits: int
    sections: dict[str, int]
    runtime_index_bits: int
    translation_bits: int
    params: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return asdict(self)


def space_report(structure) -> SpaceReport:
    kind = kind_of(structure)
    secs = sections(structure)
    breakdown: dict[str, int] = {}
    for tag, _, nbits in secs:
        breakdown[TAG_NAMES[tag]] = breakdown.get(TAG_NAMES[tag], 0) + nbits
    total = sum(breakdown.values())
    n = structure.n
    params: dict = {}
    if kind == "nice":
        params = {"strip_height": structure.strip_height}
    elif kind == "sliced":
        params = {"f": structure.f, "i_star": structure.i_star, "slice_count": structure.slice_count,
                  "top": structure.top_bits.length, "bot": structure.bot_bits.length}
    elif kind == "bar":
        params = {"k": structure.k, "blocks": structure.block_count, "bars": structure.bar_count,
                  "lookup_bits": structure.lookup.bit_size}
    return SpaceReport(
        n=n, kind=kind, payload_bits=total, bits_per_cell=total / n, raw_bits=structure.payload_bits,
        sections=breakdown, runtime_index_bits=structure.index_bits,
        translation_bits=sum(t.translation_bits for t in _trees(structure)), params=params,
    )
