"""Artifact files: atomic writes kept inside one output directory."""
import os
import json
import tempfile
import numpy as np
import pandas as pd


class OutputDir:
    """Writes files atomically (temp file + rename) under a single root.

    Args:
        root (str): output directory, created if missing
        force (bool): allow replacing existing files
    """

    def __init__(self, root: str, force: bool = True):
        self.root = os.path.realpath(root)
        self.force = force
        os.makedirs(self.root, exist_ok=True)

    def path(self, name: str):
        full = os.path.realpath(os.path.join(self.root, name))
        if os.path.commonpath([full, self.root]) != self.root:
            raise ValueError(f"refusing to write {name} outside {self.root}")
        return full

    def write_text(self, name: str, text: str, force: bool = None):
        full = self.path(name)
        force = self.force if force is None else force
        if not force and os.path.exists(full):
            raise FileExistsError(f"{full} exists, pass --force to overwrite")
        os.makedirs(os.path.dirname(full), exist_ok=True)
        fd, tmp = tempfile.mkstemp(dir=os.path.dirname(full), prefix='.tmp_')
        try:
            with os.fdopen(fd, 'w', encoding='utf-8', newline='') as f:
                f.write(text)
            os.replace(tmp, full)
        except BaseException:
            if os.path.exists(tmp):
                os.remove(tmp)
            raise
        return full

    def write_json(self, name: str, obj, force: bool = None):
        return self.write_text(name, dumps(obj) + "\n", force=force)

    def write_csv(self, name: str, df: pd.DataFrame, index: bool = True, force: bool = None):
        return self.write_text(
            name, df.to_csv(index=index, float_format='%.10g', lineterminator='\n'), force=force
        )

    def write_bytes_via(self, name: str, writer, force: bool = None):
        """Atomic write for callers that need a file path (figures)."""
        full = self.path(name)
        force = self.force if force is None else force
        if not force and os.path.exists(full):
            raise FileExistsError(f"{full} exists, pass --force to overwrite")
        os.makedirs(os.path.dirname(full), exist_ok=True)
        suffix = os.path.splitext(full)[1]
        fd, tmp = tempfile.mkstemp(dir=os.path.dirname(full), prefix='.tmp_', suffix=suffix)
        os.close(fd)
        try:
            writer(tmp)
            os.replace(tmp, full)
        except BaseException:
            if os.path.exists(tmp):
                os.remove(tmp)
            raise
        return full


def _default(obj):
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.floating):
        return float(obj)
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if isinstance(obj, (np.bool_,)):
        return bool(obj)
    if isinstance(obj, pd.Timestamp):
        return obj.strftime('%Y-%m-%d')
    raise TypeError(f"{type(obj)} is not JSON serializable")


def dumps(obj):
    """Stable JSON (sorted keys) so repeated runs give identical bytes."""
    return json.dumps(obj, default=_default, sort_keys=True, indent=1, allow_nan=True)


def read_json(path: str):
    if not os.path.exists(path):
        raise FileNotFoundError(f"{path} not found")
    with open(path, 'r', encoding='utf-8') as f:
        return json.load(f)


def slugify(name: str):
    """'Korea, South' -> 'korea_south'"""
    keep = [c.lower() if c.isalnum() else '_' for c in str(name)]
    return '_'.join(x for x in ''.join(keep).split('_') if x)
