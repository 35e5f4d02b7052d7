"""Krichever-Novikov bases, residue tables and the higher-genus Heisenberg vertex algebra.

Indices are given as strings ("3", "-1/2", "g/2-1"); scalars come back in the library's
string encoding ("3/1" exact, "(re,im)@digits" approximate) and can be decoded with
:func:`to_number`.
"""

import json
from fractions import Fraction

from ._knva import (
    Atlas,
    ConfigError,
    FieldContext,
    KnvaError,
    ParseError,
    SchemaError,
    Tables,
    WindowError,
    affine_bracket,
    compute_tables,
    load_atlas,
    load_tables,
    state_field,
)
from . import _knva

__all__ = [
    "Atlas", "Tables", "FieldContext", "KnvaError", "ConfigError", "WindowError", "ParseError",
    "SchemaError", "build_atlas", "load_atlas", "compute_tables", "load_tables", "state_field",
    "affine_bracket", "genus0", "genus1", "to_number", "duality", "bands", "vacuum", "translation",
    "locality", "wick", "affine_jacobi", "dP_delta", "apply", "cli",
]


def _doubled(x):
    d = round(2 * Fraction(str(x)))
    return int(d)


def build_atlas(config):
    """Builds an atlas from a config dict (same keys as an atlas file's "config")."""
    return _knva.build_atlas(json.dumps(config))


def genus0(window=12, lambdas=(-1, 0, 1, 2)):
    w = _doubled(window)
    return build_atlas({"genus": 0, "window": w, "trunc": 3 * w + 6, "lambdas": list(lambdas),
                        "scalar_mode": "exact"})


def genus1(window=6.5, precision=60, lambdas=(-1, 0, 1, 2), tau="0+1i", p_plus="0.17+0.31i",
           p_minus="-0.2317+0.1123i"):
    w = _doubled(window)
    return build_atlas({"genus": 1, "window": w, "trunc": 3 * w + 6, "lambdas": list(lambdas),
                        "scalar_mode": "bigcomplex", "precision": precision,
                        "geometry": {"tau": tau, "p_plus": p_plus, "p_minus": p_minus}})


def to_number(text):
    """Fraction for exact scalars, complex for approximate ones."""
    if text.startswith("("):
        re, im = text[1:text.index(")")].split(",")
        return complex(float(re), float(im))
    return Fraction(text)


def duality(atlas):
    return json.loads(atlas.verify_duality_json())


def bands(tables):
    return json.loads(tables.check_bands_json())


def vacuum(ctx, field):
    return json.loads(ctx.check_vacuum_json(field))


def translation(ctx, field, max_degree=2, range=4):
    return json.loads(ctx.check_translation_json(field, max_degree, _doubled(range)))


def locality(ctx, a, b, max_degree=2, range=3):
    return json.loads(ctx.check_locality_json(a, b, max_degree, _doubled(range)))


def wick(ctx, a, b, max_degree=2, range=2):
    return json.loads(ctx.check_wick_json(a, b, max_degree, _doubled(range)))


def affine_jacobi(tables, lie="sl2", range=1.5):
    return json.loads(_knva.check_affine_jacobi_json(tables, lie, _doubled(range)))


def dP_delta(atlas, tables):
    return json.loads(_knva.check_dP_delta_json(atlas, tables))


def apply(ctx, field, index, state):
    """Coefficient `index` of `field` applied to a state literal, as {state: scalar string}."""
    return {e["state"]: e["coeff"] for e in json.loads(ctx.apply_json(field, str(index), state))}


def cli(*args):
    """Runs the command-line front end in-process; returns (exit code, stdout, stderr)."""
    return _knva.cli([str(a) for a in args])
