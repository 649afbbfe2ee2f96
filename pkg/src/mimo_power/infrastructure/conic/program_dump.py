"""Plain-text matrix dump of cone programs for external cross-checking.

Format: a ``dims`` header line followed by one section per array. Each
section starts with ``# name rows cols`` and holds the matrix rows as
whitespace-separated floats.
"""

import io
from pathlib import Path
from typing import Dict, Union

import numpy as np

from mimo_power.domain.entities.cone_program import ConeDims, ConeProgram
from mimo_power.domain.errors import ConfigurationError

_SECTIONS = ("c", "G", "h", "A", "b")


def dumps_program(program: ConeProgram) -> str:
    """Serialize a program to text."""
    out = io.StringIO()
    soc = " ".join(str(q) for q in program.dims.soc)
    out.write(f"dims nonneg={program.dims.nonneg} soc={soc}\n")
    for name in _SECTIONS:
        matrix = np.atleast_2d(getattr(program, name))
        if name in ("c", "h", "b"):
            matrix = matrix.reshape(-1, 1)
        out.write(f"# {name} {matrix.shape[0]} {matrix.shape[1]}\n")
        if matrix.size:
            np.savetxt(out, matrix, fmt="%.17g")
    return out.getvalue()


def write_program(path: Union[str, Path], program: ConeProgram) -> Path:
    """Write a program dump to a file."""
    path = Path(path)
    path.write_text(dumps_program(program))
    return path


def loads_program(text: str) -> ConeProgram:
    """Parse a program dump produced by :func:`dumps_program`.

    Raises:
        ConfigurationError: If the text is not a valid dump
    """
    lines = text.splitlines()
    if not lines or not lines[0].startswith("dims "):
        raise ConfigurationError("Program dump must start with a dims line")
    nonneg_part, soc_part = lines[0][len("dims "):].split(" soc=")
    nonneg = int(nonneg_part.split("=", 1)[1])
    soc = tuple(int(q) for q in soc_part.split())

    arrays: Dict[str, np.ndarray] = {}
    index = 1
    while index < len(lines):
        line = lines[index]
        if not line.startswith("# "):
            raise ConfigurationError(f"Unexpected line {index + 1} in program dump: {line!r}")
        _, name, rows, cols = line.split()
        rows, cols = int(rows), int(cols)
        body = lines[index + 1:index + 1 + rows]
        values = np.array([[float(v) for v in row.split()] for row in body]).reshape(rows, cols)
        arrays[name] = values
        index += 1 + rows

    return ConeProgram(
        c=arrays["c"].ravel(),
        G=arrays["G"],
        h=arrays["h"].ravel(),
        dims=ConeDims(nonneg=nonneg, soc=soc),
        A=arrays["A"],
        b=arrays["b"].ravel(),
    )


def read_program(path: Union[str, Path]) -> ConeProgram:
    """Read a program dump from a file.

    Raises:
        FileNotFoundError: If the file does not exist
    """
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(f"Program dump not found: {path}")
    return loads_program(path.read_text())
