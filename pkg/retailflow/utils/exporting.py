"""Utilities for writing result files."""


import hashlib
import json
import pathlib

import numpy as np
import pandas as pd

from .importing import PRICE_SCALE


__all__ = [
    'format_fixed_point',
    'frame_to_csv',
    'file_digest',
    'write_manifest'
]


def format_fixed_point(values, digits=4):
    """Renders integers scaled by 10**digits as decimal strings.

    Missing values become empty strings, so that parsing the output again
    yields the very same integers.
    """
    values = pd.Series(values)
    missing = values.isna()
    out = pd.Series('', index=values.index, dtype=object)
    if (~missing).any():
        scale = 10 ** digits
        ints = values[~missing].astype(np.int64)
        sign = pd.Series(np.where(ints < 0, '-', ''), index=ints.index)
        magnitude = ints.abs()
        whole = (magnitude // scale).astype(str)
        frac = (magnitude % scale).astype(str).str.zfill(digits)
        out[~missing] = sign + whole + '.' + frac
    return out


def frame_to_csv(frame, path=None, float_format='%.10g'):
    """Writes a DataFrame as CSV with a fixed layout.

    Parameters
    ----------
    frame: pandas.DataFrame
        Data to write, the index is dropped.

    path: str or pathlib.Path, optional (default=None)
        Destination. When None the CSV text is returned.

    float_format: str, optional (default='%.10g')
        Format of float columns.

    Returns
    -------
    text: str or None

    """
    text = frame.to_csv(
        index=False, float_format=float_format, lineterminator='\n'
    )
    if path is None:
        return text
    path = pathlib.Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_bytes(text.encode('utf-8'))
    return None


def file_digest(path):
    """SHA-256 digest of a file's bytes."""
    digest = hashlib.sha256()
    with open(path, 'rb') as f:
        for block in iter(lambda: f.read(1 << 20), b''):
            digest.update(block)
    return digest.hexdigest()


def write_manifest(path, spec, config_digest, inputs, outputs=None):
    """Writes the provenance manifest of a run.

    Parameters
    ----------
    path: str or pathlib.Path
        Destination of the JSON manifest.

    spec: dict
        JSON-serialisable description of what was computed.

    config_digest: str
        Digest of the resolved run configuration.

    inputs: dict
        Maps input roles (e.g. 'trades') onto file paths.

    outputs: list, optional (default=None)
        Paths of the files written by the run.

    Returns
    -------
    manifest: dict

    """
    manifest = {
        'spec': spec,
        'config_digest': config_digest,
        'inputs': {
            role: {'path': str(p), 'sha256': file_digest(p)}
            for role, p in sorted(inputs.items()) if p is not None
        },
        'outputs': {
            pathlib.Path(p).name: file_digest(p) for p in sorted(outputs or [])
        },
        'price_scale': PRICE_SCALE
    }
    path = pathlib.Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(
        json.dumps(manifest, indent=2, sort_keys=True, default=str) + '\n'
    )
    return manifest
