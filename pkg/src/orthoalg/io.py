"""Instance file format, DOT export, and line export.

Instance JSON: {"n": int, "b": [4 bits], "c": [4 bits],
"elements": [{"u": int, "phi": int}, ...] (optional, recomputable),
"relation": base64 of the row-major bit-packed adjacency (optional)}.
"""

from __future__ import annotations

import base64
import json
from typing import Dict, List, Optional, Sequence, Tuple

from .family import FamilyInstance, FamilyParams, build_family
from .gf2 import iter_bits


def pack_relation(rows: Sequence[int], m: int) -> str:
    bits = bytearray((m * m + 7) // 8)
    for i, row in enumerate(rows):
        base = i * m
        for j in iter_bits(row):
            pos = base + j
            bits[pos >> 3] |= 1 << (7 - (pos & 7))
    return base64.b64encode(bytes(bits)).decode("ascii")


def unpack_relation(data: str, m: int) -> List[int]:
    raw = base64.b64decode(data)
    rows = [0] * m
    for i in range(m):
        base = i * m
        for j in range(m):
            pos = base + j
            if raw[pos >> 3] & (1 << (7 - (pos & 7))):
                rows[i] |= 1 << j
    return rows


def instance_to_dict(
    inst: FamilyInstance, with_elements: bool = True, with_relation: bool = False
) -> Dict:
    out: Dict = {
        "n": inst.n,
        "b": list(inst.params.b),
        "c": list(inst.params.c),
    }
    if with_elements:
        out["elements"] = [{"u": u, "phi": phi} for u, phi in inst.elements]
    if with_relation:
        out["relation"] = pack_relation(inst.adjacency(), inst.size)
    return out


def instance_from_dict(data: Dict, allow_invalid: bool = False) -> FamilyInstance:
    params = FamilyParams(tuple(data["b"]), tuple(data["c"]))
    inst = build_family(int(data["n"]), params, allow_invalid=allow_invalid)
    if "elements" in data:
        stored = [(e["u"], e["phi"]) for e in data["elements"]]
        if stored != inst.elements:
            raise ValueError("stored elements disagree with recomputation")
    if "relation" in data:
        rows = unpack_relation(data["relation"], inst.size)
        if rows != inst.adjacency():
            raise ValueError("stored relation disagrees with recomputation")
        inst._adjacency = rows
    return inst


def save_instance(path: str, inst: FamilyInstance, with_elements=True, with_relation=False):
    with open(path, "w") as fh:
        json.dump(instance_to_dict(inst, with_elements, with_relation), fh)
        fh.write("\n")


def load_instance(path: str, allow_invalid: bool = False) -> FamilyInstance:
    with open(path) as fh:
        return instance_from_dict(json.load(fh), allow_invalid=allow_invalid)


def export_dot(inst: FamilyInstance) -> str:
    """Graph of the relation; vertices labeled "U|phi" in hex bitmasks."""
    lines = ["graph relation {"]
    for i, (u, phi) in enumerate(inst.elements):
        lines.append(f'  v{i} [label="{u:x}|{phi:x}"];')
    adj = inst.adjacency()
    for i in range(inst.size):
        for j in iter_bits(adj[i]):
            if j > i:
                lines.append(f"  v{i} -- v{j};")
    lines.append("}")
    return "\n".join(lines) + "\n"


def export_lines_json(lines: Sequence[Tuple[int, ...]]) -> str:
    return json.dumps([list(v) for v in lines])


__all__ = [
    "export_dot",
    "export_lines_json",
    "instance_from_dict",
    "instance_to_dict",
    "load_instance",
    "pack_relation",
    "save_instance",
    "unpack_relation",
]
