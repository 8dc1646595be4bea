# cache.py
#
# Small versioned .npz cache so repeated runs skip the ground-state and
# eigenmode solves.  Location: $NLSLAB_CACHE if set, else ./.nlslab-cache.

from __future__ import annotations

import os
from pathlib import Path

import numpy as np

CACHE_VERSION = 1


def cache_dir() -> Path:
    d = Path(os.environ.get("NLSLAB_CACHE", ".nlslab-cache"))
    d.mkdir(parents=True, exist_ok=True)
    return d


def save(key: str, **arrays) -> Path:
    path = cache_dir() / f"{key}.npz"
    np.savez(path, __version__=np.array(CACHE_VERSION), **arrays)
    return path


def load(key: str) -> dict | None:
    path = cache_dir() / f"{key}.npz"
    if not path.exists():
        return None
    try:
        with np.load(path) as z:
            if int(z["__version__"]) != CACHE_VERSION:
                return None
            return {k: z[k] for k in z.files if k != "__version__"}
    except Exception:
        return None
