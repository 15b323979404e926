"""Reader for EIKFLD01 field files.

Implemented straight from the documented byte layout so this package stays
independent of the producer: 8-byte magic, little-endian uint64 header
length, UTF-8 JSON header, then a row-major little-endian float64 payload.
"""

from __future__ import annotations

import json
import struct
from dataclasses import dataclass

import numpy as np

MAGIC = b"EIKFLD01"


@dataclass(frozen=True)
class Field:
    header: dict
    values: np.ndarray  # shaped to the grid counts

    @property
    def counts(self) -> tuple:
        return tuple(self.header["grid"]["counts"])

    @property
    def origin(self) -> tuple:
        return tuple(self.header["grid"]["origin"])

    @property
    def spacing(self) -> float:
        return float(self.header["grid"]["spacing"])

    @property
    def dim(self) -> int:
        return int(self.header["grid"]["dim"])

    def axis(self, a: int) -> np.ndarray:
        return self.origin[a] + self.spacing * np.arange(self.counts[a])

    def flagged_mask(self) -> np.ndarray:
        mask = np.zeros(self.values.size, dtype=bool)
        flagged = self.header.get("flagged_nodes") or []
        mask[np.asarray(flagged, dtype=np.int64)] = True
        return mask.reshape(self.values.shape)


def load_field(path: str) -> Field:
    with open(path, "rb") as fh:
        if fh.read(8) != MAGIC:
            raise ValueError(f"{path}: not an EIKFLD01 file")
        (length,) = struct.unpack("<Q", fh.read(8))
        header = json.loads(fh.read(length).decode("utf-8"))
        payload = fh.read()
    counts = tuple(header["grid"]["counts"])
    values = np.frombuffer(payload, dtype="<f8")
    expected = int(np.prod(counts))
    if values.size != expected:
        raise ValueError(f"{path}: payload {values.size} != grid {expected}")
    return Field(header=header, values=values.reshape(counts))
