"""CSV and manifest writers.

Output contract: comma-separated, one header row, UTF-8, LF newlines,
floats at 12 significant digits.  Every frequency-dimensioned column
carries an explicit _rad_s or _hz suffix (exponential rates are
e-folding rates; their _rad_s values coincide numerically with 1/s).
Each run directory gets a manifest.json recording the command, the
fully-resolved configuration, the seed, and a checksum per output file
so scans can be audited and reproduced byte for byte.
"""

from __future__ import annotations

import hashlib
import json
import math
from datetime import datetime, timezone
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np


def format_value(value) -> str:
    if value is None:
        return ""
    if isinstance(value, bool):
        return "1" if value else "0"
    if isinstance(value, int):
        return str(value)
    if isinstance(value, float):
        if math.isnan(value):
            return "nan"
        return f"{value:.12g}"
    return str(value)


def write_csv(path, header: Sequence[str], rows: Iterable[Sequence]) -> int:
    """Write rows under a header; returns the number of data rows."""
    path = Path(path)
    count = 0
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(",".join(header) + "\n")
        for row in rows:
            if len(row) != len(header):
                raise ValueError(
                    f"row of width {len(row)} does not match header width {len(header)}"
                )
            fh.write(",".join(format_value(v) for v in row) + "\n")
            count += 1
    return count


def utc_stamp() -> str:
    return datetime.now(timezone.utc).isoformat(timespec="seconds")


def _sha256(path: Path) -> str:
    digest = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 16), b""):
            digest.update(chunk)
    return digest.hexdigest()


def write_manifest(
    outdir,
    command: str,
    config_sections: dict,
    seed: int | None,
    workers: int,
    outputs: Sequence[str],
    started: str | None = None,
) -> Path:
    """Write manifest.json next to the outputs; returns its path.

    The manifest itself carries wall-clock timestamps; reproducibility
    guarantees apply to the listed output files, whose digests it pins.
    """
    from . import __version__

    outdir = Path(outdir)
    entries = []
    for name in outputs:
        path = outdir / name
        entries.append(
            {"name": name, "sha256": _sha256(path), "bytes": path.stat().st_size}
        )
    config_blob = json.dumps(config_sections, sort_keys=True).encode("utf-8")
    manifest = {
        "tool": "shakenbec",
        "versions": {"shakenbec": __version__, "numpy": np.__version__},
        "command": command,
        "seed": seed,
        "workers": workers,
        "config": config_sections,
        "config_sha256": hashlib.sha256(config_blob).hexdigest(),
        "started": started,
        "finished": utc_stamp(),
        "outputs": entries,
    }
    path = outdir / "manifest.json"
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True)
        fh.write("\n")
    return path


def config_as_dict(cp) -> dict:
    return {section: dict(cp.items(section)) for section in cp.sections()}
