"""Run configuration: defaults, a minimal key = value file format, and the
TWOCUT_CONFIG environment hook.

The file format is a flat TOML-style subset: optional [section] headers,
one `key = value` per line, `#` comments.  Sections only namespace the key
(section.key); values are parsed as int, float, string, or bool.  This is
all the reproducibility of acceptance runs needs.
"""

import os

DEFAULTS = {
    "precision.surface_digits": 64,
    "precision.oracle_digits": 200,
    "precision.lattice_tol": 1e-10,
    "precision.boundary_tol": 1e-8,
    "precision.cross_tol": 1e-8,
    "geometry.t_radius": 30.0,
    "geometry.reference_rho": 4.0,
    "geometry.escape_factor": 12.0,
    "compare.n_min": 10,
    "compare.n_max": 30,
    "compare.eps": 0.1,
}

ENV_VAR = "TWOCUT_CONFIG"


def _parse_value(raw):
    raw = raw.strip()
    if raw.lower() in ("true", "false"):
        return raw.lower() == "true"
    if raw.startswith('"') and raw.endswith('"'):
        return raw[1:-1]
    try:
        return int(raw)
    except ValueError:
        pass
    try:
        return float(raw)
    except ValueError:
        pass
    return raw


def load_config(path=None):
    """DEFAULTS overlaid with the file at path (or $TWOCUT_CONFIG)."""
    cfg = dict(DEFAULTS)
    path = path or os.environ.get(ENV_VAR)
    if not path:
        return cfg
    section = ""
    with open(path, "r", encoding="utf-8") as fh:
        for line in fh:
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            if line.startswith("[") and line.endswith("]"):
                section = line[1:-1].strip()
                continue
            if "=" not in line:
                raise ValueError(f"malformed config line: {line!r}")
            key, _, raw = line.partition("=")
            full = f"{section}.{key.strip()}" if section else key.strip()
            cfg[full] = _parse_value(raw)
    return cfg
