"""Tests for the plain-text cone program dump."""

import numpy as np
import pytest

from mimo_power.domain.entities.cone_program import ConeDims, ConeProgram
from mimo_power.domain.errors import ConfigurationError
from mimo_power.infrastructure.conic.program_dump import dumps_program, loads_program, read_program, write_program


class TestProgramDump:
    """Test suite for dumping and loading cone programs."""

    def test_round_trip_with_equalities(self, tmp_path):
        """Test every array and the cone layout survive a file round trip."""
        rng = np.random.default_rng(0)
        program = ConeProgram(
            c=rng.normal(size=3),
            G=rng.normal(size=(5, 3)),
            h=rng.normal(size=5),
            dims=ConeDims(nonneg=2, soc=(3,)),
            A=rng.normal(size=(1, 3)),
            b=rng.normal(size=1),
        )
        loaded = read_program(write_program(tmp_path / "program.txt", program))
        assert loaded.dims == program.dims
        for name in ("c", "G", "h", "A", "b"):
            assert np.array_equal(getattr(loaded, name), getattr(program, name))

    def test_orthant_only_without_equalities(self):
        """Test an LP without equality rows."""
        program = ConeProgram(c=[1.0, 2.0], G=-np.eye(2), h=np.zeros(2), dims=ConeDims(nonneg=2))
        text = dumps_program(program)
        assert text.startswith("dims nonneg=2 soc=\n")
        loaded = loads_program(text)
        assert loaded.p == 0
        assert loaded.dims.is_orthant_only

    def test_invalid_header(self):
        """Test text without a dims line is rejected."""
        with pytest.raises(ConfigurationError):
            loads_program("# c 1 1\n1\n")

    def test_missing_file(self, tmp_path):
        """Test reading a missing dump."""
        with pytest.raises(FileNotFoundError):
            read_program(tmp_path / "missing.txt")
