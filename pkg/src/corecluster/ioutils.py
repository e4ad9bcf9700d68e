"""Small shared I/O helpers: lossless float formatting, atomic writes, digests."""

from __future__ import annotations

import hashlib
import os
import tempfile
from pathlib import Path


def fmt_float(x: float) -> str:
    """Format with 17 significant digits so values round-trip losslessly."""
    return format(float(x), ".17g")


def write_text_atomic(path, text: str) -> None:
    """Write text to path via a temp file + rename in the same directory."""
    path = Path(path)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def sha256_file(path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 20), b""):
            h.update(chunk)
    return h.hexdigest()


def read_tsv_rows(path) -> list[list[str]]:
    """Read a TSV file into rows of string fields, skipping blank lines."""
    with open(path, encoding="utf-8") as fh:
        return [line.rstrip("\n").split("\t") for line in fh if line.strip() != ""]
