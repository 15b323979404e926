import numpy as np
import pytest

from eikfld.errors import ValidationError
from eikfld.fieldio import MAGIC, read_field, read_header, write_csv, write_field
from eikfld.grid import GridSpec, ScalarField
from eikfld.precision import PrecisionConfig

from conftest import rng_for


def sample_field():
    grid = GridSpec(origin=(-0.5, 0.25, 1.0), spacing=0.125, counts=(4, 5, 6))
    vals = rng_for(8).standard_normal(grid.num_nodes)
    return ScalarField(grid, vals, flagged_nodes=[3, 77])


class TestFieldFile:
    def test_bit_exact_roundtrip(self, tmp_path):
        field = sample_field()
        path = str(tmp_path / "s.fld")
        cfg = PrecisionConfig.bigfloat(2.5e-4, 512)
        write_field(path, field, "S", cfg, params={"method": "fft"})
        header, back = read_field(path)
        assert np.array_equal(back.values, field.values)
        assert back.grid == field.grid
        assert header["field"] == "S"
        assert header["tau"] == 2.5e-4
        assert header["precision"] == "big:512"
        assert header["precision_bits"] == 512
        assert header["params"]["method"] == "fft"
        assert list(back.flagged_nodes) == [3, 77]

    def test_layout(self, tmp_path):
        # magic, uint64 LE header length, JSON, row-major <f8 payload.
        field = sample_field()
        path = str(tmp_path / "s.fld")
        write_field(path, field, "S")
        blob = open(path, "rb").read()
        assert blob[:8] == MAGIC
        hlen = int.from_bytes(blob[8:16], "little")
        import json

        header = json.loads(blob[16 : 16 + hlen])
        assert header["dtype"] == "<f8"
        payload = np.frombuffer(blob[16 + hlen :], dtype="<f8")
        assert np.array_equal(payload, field.values)

    def test_deterministic_bytes(self, tmp_path):
        field = sample_field()
        p1, p2 = str(tmp_path / "a.fld"), str(tmp_path / "b.fld")
        write_field(p1, field, "S", PrecisionConfig.native64(0.1), {"k": 1})
        write_field(p2, field, "S", PrecisionConfig.native64(0.1), {"k": 1})
        assert open(p1, "rb").read() == open(p2, "rb").read()

    def test_rejects_bad_magic(self, tmp_path):
        path = tmp_path / "bad.fld"
        path.write_bytes(b"NOTAFILE" + b"\x00" * 32)
        with pytest.raises(ValidationError):
            read_header(str(path))

    def test_rejects_truncated_payload(self, tmp_path):
        field = sample_field()
        path = str(tmp_path / "s.fld")
        write_field(path, field, "S")
        blob = open(path, "rb").read()
        open(path, "wb").write(blob[:-16])
        with pytest.raises(ValidationError):
            read_field(path)

    def test_csv_export(self, tmp_path):
        field = sample_field()
        path = str(tmp_path / "s.csv")
        write_csv(path, field)
        vals = np.loadtxt(path)
        assert np.abs(vals - field.values).max() < 1e-16
