"""Config loading with schema validation, and output writing."""

import json
import os
from functools import lru_cache
from importlib import resources
from pathlib import Path

import jsonschema
from referencing import Registry, Resource

#: default directory for relative output paths
OUTPUT_DIR_ENV = "BERNSTEIN_ORLICZ_OUTPUT_DIR"
SCHEMAS = ("distribution", "function_class", "tree", "profile", "simulation", "report")


class ConfigError(ValueError):
    """Config failed schema validation; ``path`` points at the offending field."""

    def __init__(self, schema, path, message):
        self.schema = schema
        self.path = path
        super().__init__(f"{schema}.json at {path}: {message}")


@lru_cache(maxsize=None)
def _registry():
    docs = {}
    for name in SCHEMAS:
        text = resources.files("bernstein_orlicz").joinpath("schemas", f"{name}.json").read_text()
        docs[f"{name}.json"] = Resource.from_contents(json.loads(text))
    return Registry().with_resources(docs.items())


def schema(name):
    return _registry().contents(f"{name}.json")


def validate(doc, name):
    validator = jsonschema.Draft202012Validator(schema(name), registry=_registry())
    errors = sorted(validator.iter_errors(doc), key=lambda e: list(e.absolute_path))
    if errors:
        err = errors[0]
        path = "$" + "".join(f"[{p!r}]" if isinstance(p, str) else f"[{p}]" for p in err.absolute_path)
        raise ConfigError(name, path, err.message)
    return doc


def load_json(path, schema_name=None):
    with open(path) as fh:
        doc = json.load(fh)
    if schema_name:
        validate(doc, schema_name)
    return doc


def resolve_output(path):
    """Relative paths land in $BERNSTEIN_ORLICZ_OUTPUT_DIR when it is set."""
    if path is None:
        return None
    p = Path(path)
    base = os.environ.get(OUTPUT_DIR_ENV)
    if base and not p.is_absolute():
        p = Path(base) / p
    p.parent.mkdir(parents=True, exist_ok=True)
    return p


def fmt9(x):
    """Nine significant digits, the TSV convention."""
    if isinstance(x, bool):
        return str(int(x))
    if isinstance(x, int):
        return str(x)
    return f"{x:#.9g}"


def tsv(header, rows):
    lines = ["\t".join(header)]
    lines += ["\t".join(fmt9(v) if not isinstance(v, str) else v for v in row) for row in rows]
    return "\n".join(lines) + "\n"


def dumps(obj):
    """JSON with shortest round-trip float formatting (Python's repr)."""
    return json.dumps(obj, indent=2, default=_default) + "\n"


def _default(o):
    import numpy as np

    if isinstance(o, np.bool_):
        return bool(o)
    if isinstance(o, np.integer):
        return int(o)
    if isinstance(o, np.floating):
        return float(o)
    if isinstance(o, np.ndarray):
        return o.tolist()
    raise TypeError(f"cannot serialize {type(o).__name__}")
