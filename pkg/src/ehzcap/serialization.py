"""JSON schema for polytopes, products and report bundles."""
import json

import numpy as np

from .errors import SchemaError
from .polytope import HPolytope, from_halfspaces, from_vertices
from .products import KINDS, ProductPolytope, lagrangian_product


def _number(value, where):
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise SchemaError(f"{where} must be a number", where)
    value = float(value)
    if not np.isfinite(value):
        raise SchemaError(f"{where} must be finite", where)
    return value


def _vector(value, dim, where):
    if not isinstance(value, list) or len(value) != dim:
        raise SchemaError(f"{where} must be a list of {dim} numbers", where)
    return [_number(x, f"{where}[{i}]") for i, x in enumerate(value)]


def polytope_from_dict(data):
    """Build an :class:`HPolytope` (or :class:`ProductPolytope`) from the JSON schema."""
    if not isinstance(data, dict):
        raise SchemaError("polytope document must be a JSON object")
    dim = data.get("dim")
    if isinstance(dim, bool) or not isinstance(dim, int) or dim < 1:
        raise SchemaError("dim must be a positive integer", "dim")
    has_h, has_v = "halfspaces" in data, "vertices" in data
    if has_h == has_v:
        raise SchemaError("exactly one of 'halfspaces' and 'vertices' is required", "halfspaces")
    if has_h:
        raw = data["halfspaces"]
        if not isinstance(raw, list) or not raw:
            raise SchemaError("halfspaces must be a nonempty list", "halfspaces")
        pairs = []
        for i, item in enumerate(raw):
            where = f"halfspaces[{i}]"
            if not isinstance(item, dict) or "normal" not in item or "height" not in item:
                raise SchemaError(f"{where} needs 'normal' and 'height'", where)
            normal = _vector(item["normal"], dim, f"{where}.normal")
            if not any(normal):
                raise SchemaError(f"{where}.normal must be nonzero", f"{where}.normal")
            pairs.append((normal, _number(item["height"], f"{where}.height")))
        poly = from_halfspaces(dim, pairs)
    else:
        raw = data["vertices"]
        if not isinstance(raw, list) or not raw:
            raise SchemaError("vertices must be a nonempty list", "vertices")
        pts = [_vector(p, dim, f"vertices[{i}]") for i, p in enumerate(raw)]
        poly = from_vertices(np.array(pts))
    if "product" in data:
        return _product_from(poly, data["product"])
    return poly


def _product_from(poly, meta):
    if not isinstance(meta, dict):
        raise SchemaError("product annotation must be an object", "product")
    kind = meta.get("kind")
    if kind not in KINDS:
        raise SchemaError(f"product.kind must be one of {KINDS}", "product.kind")
    fdim = meta.get("factor_dim")
    if not isinstance(fdim, int) or fdim < 2 or fdim % 2 or 2 * fdim != poly.dim:
        raise SchemaError("product.factor_dim must be half of dim and even", "product.factor_dim")
    first = np.all(poly.normals[:, fdim:] == 0, axis=1)
    second = np.all(poly.normals[:, :fdim] == 0, axis=1)
    if not np.all(first | second):
        raise SchemaError("product facets must have block normals (n, 0) or (0, m)", "product")
    k = HPolytope(poly.normals[first][:, :fdim], poly.heights[first])
    t = HPolytope(poly.normals[second][:, fdim:], poly.heights[second])
    k = from_halfspaces(fdim, k.facets())
    t = from_halfspaces(fdim, t.facets())
    return lagrangian_product(k, t, kind=kind)


def polytope_to_dict(poly):
    base = poly.base if isinstance(poly, ProductPolytope) else poly
    out = {
        "dim": base.dim,
        "halfspaces": [
            {"normal": [float(x) for x in n], "height": float(h)}
            for n, h in zip(base.normals, base.heights)
        ],
    }
    if isinstance(poly, ProductPolytope):
        out["product"] = {"kind": poly.kind, "factor_dim": poly.factor_dim}
    return out


def load_polytope(path):
    try:
        with open(path) as fh:
            data = json.load(fh)
    except json.JSONDecodeError as exc:
        raise SchemaError(f"{path}: invalid JSON ({exc})") from exc
    return polytope_from_dict(data)


def dumps(obj):
    """Deterministic JSON text; floats use the shortest round-trip repr."""
    return json.dumps(obj, indent=2, sort_keys=True, allow_nan=False) + "\n"
