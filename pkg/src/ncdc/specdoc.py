"""JSON documents describing a presentation plus initial data.

The document format is the interchange contract: matrices are row-major
with canonical scalar strings, the basis of every tensor component is
enumerated lexicographically with the leftmost factor most significant,
and in particular

* ``b0`` rows are indexed by ``w_index * dimV + v_index`` and columns by
  ``v_index * dimW + w_index``;
* ``d0`` is ``dimW x dimV``;
* ``c`` is an endomorphism of V (x) V, both sides indexed by
  ``i1 * dimV + i2``.

A document may fix the deformation parameter to a rational value; every
scalar is then specialized at load time, and a pole in any input is a
load error.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

from gmpy2 import mpq

from ncdc.calculus import InitialData, Presentation, Relation
from ncdc.linalg import LinMap, Shape
from ncdc.scalars import (
    PoleError,
    Scalar,
    ScalarSyntaxError,
    eval_scalar,
    parse_scalar,
    scalar_str,
)


class SpecError(ValueError):
    """Document validation failure, tagged with the offending JSON path."""

    def __init__(self, path: str, message: str):
        super().__init__(f"{path}: {message}")
        self.path = path


def _need(obj, key, kind, path):
    if key not in obj:
        raise SpecError(path, f"missing required key {key!r}")
    value = obj[key]
    if kind is int and (not isinstance(value, int) or isinstance(value, bool)):
        raise SpecError(f"{path}.{key}", "expected an integer")
    if kind is list and not isinstance(value, list):
        raise SpecError(f"{path}.{key}", "expected a list")
    if kind is dict and not isinstance(value, dict):
        raise SpecError(f"{path}.{key}", "expected an object")
    return value


def _scalar(raw, path, point) -> Scalar:
    if isinstance(raw, bool) or not isinstance(raw, (int, str)):
        raise SpecError(path, "scalar entries must be integers or strings")
    try:
        value = parse_scalar(str(raw))
    except ScalarSyntaxError as err:
        raise SpecError(path, f"scalar syntax: {err}") from err
    except ZeroDivisionError as err:
        raise SpecError(path, f"scalar: {err}") from err
    if point is not None:
        try:
            value = eval_scalar(value, point)
        except PoleError as err:
            raise SpecError(path, f"specialization hits a pole: {err}") from err
    return value


def _matrix(raw, n_rows, n_cols, path, point, what):
    if not isinstance(raw, list) or len(raw) != n_rows:
        raise SpecError(path, f"expected {n_rows} rows ({what})")
    out = []
    for r, row in enumerate(raw):
        if not isinstance(row, list) or len(row) != n_cols:
            raise SpecError(f"{path}[{r}]", f"expected {n_cols} entries ({what})")
        out.append([_scalar(e, f"{path}[{r}][{c}]", point)
                    for c, e in enumerate(row)])
    return out


def _names(block, dim, default, path):
    if "names" not in block:
        return tuple(default(i) for i in range(dim))
    raw = block["names"]
    if not isinstance(raw, list) or len(raw) != dim:
        raise SpecError(f"{path}.names", f"expected {dim} names")
    names = []
    for i, name in enumerate(raw):
        if not isinstance(name, str) or not name.isidentifier():
            raise SpecError(f"{path}.names[{i}]", "names must be identifiers")
        if name == "q":
            raise SpecError(f"{path}.names[{i}]",
                            "'q' is reserved for the deformation parameter")
        names.append(name)
    if len(set(names)) != dim:
        raise SpecError(f"{path}.names", "names must be distinct")
    return tuple(names)


_TOP_KEYS = {"field", "V", "W", "relations", "c", "b0", "d0", "max_degree"}


@dataclass(frozen=True)
class SpecDocument:
    """Validated in-memory form of a calculus description."""

    q_value: object            # mpq or None for the symbolic field
    dim_v: int
    v_names: tuple
    dim_w: int
    w_names: tuple
    relations: tuple           # per relation: tuple of (coeff, word) terms
    d0: LinMap
    b0: LinMap
    twist: LinMap | None
    max_degree: int

    def presentation(self) -> Presentation:
        rels = []
        for terms in self.relations:
            degree = len(terms[0][1])
            vec: dict = {}
            shape = Shape(("V",) * degree, (self.dim_v,) * degree)
            for coeff, word in terms:
                idx = shape.index_of(word)
                cur = vec.get(idx)
                cur = coeff if cur is None else cur + coeff
                if cur:
                    vec[idx] = cur
                elif idx in vec:
                    del vec[idx]
            rels.append(Relation(degree, vec))
        try:
            return Presentation(self.dim_v, self.dim_w, relations=tuple(rels),
                                twist=self.twist, max_degree=self.max_degree,
                                v_names=self.v_names, w_names=self.w_names)
        except ValueError as err:
            raise SpecError("c", str(err)) from err

    def initial_data(self) -> InitialData:
        return InitialData(self.d0, self.b0)

    # -- canonical serialization -------------------------------------------

    def to_json(self) -> dict:
        field = ({"q_value": scalar_str(self.q_value)}
                 if self.q_value is not None else {"parameter": "q"})
        out = {
            "field": field,
            "V": {"dim": self.dim_v, "names": list(self.v_names)},
            "W": {"dim": self.dim_w, "names": list(self.w_names)},
            "relations": [
                [[scalar_str(coeff), list(word)] for coeff, word in terms]
                for terms in self.relations
            ],
            "b0": self.b0.to_string_rows(),
            "d0": self.d0.to_string_rows(),
            "max_degree": self.max_degree,
        }
        if self.twist is not None:
            out["c"] = self.twist.to_string_rows()
        return out

    def to_text(self) -> str:
        return json.dumps(self.to_json(), indent=2, sort_keys=True) + "\n"


def parse_spec(text: str, q_override=None) -> SpecDocument:
    """Validate document text into a :class:`SpecDocument`.

    ``q_override`` (a scalar string or rational) forces specialization of
    the deformation parameter regardless of the document's field block.
    """
    try:
        obj = json.loads(text)
    except json.JSONDecodeError as err:
        raise SpecError("$", f"not valid JSON: {err}") from err
    if not isinstance(obj, dict):
        raise SpecError("$", "top level must be an object")
    unknown = set(obj) - _TOP_KEYS
    if unknown:
        raise SpecError("$", f"unknown keys: {sorted(unknown)}")

    point = None
    field = obj.get("field", {"parameter": "q"})
    if not isinstance(field, dict):
        raise SpecError("field", "expected an object")
    if "q_value" in field:
        raw = field["q_value"]
        if isinstance(raw, bool) or not isinstance(raw, (int, str)):
            raise SpecError("field.q_value", "expected an integer or string")
        try:
            point = mpq(str(raw))
        except ValueError as err:
            raise SpecError("field.q_value", f"not a rational: {raw!r}") from err
    elif field not in ({"parameter": "q"}, {}):
        raise SpecError("field", "expected {'parameter': 'q'} or {'q_value': ...}")
    if q_override is not None:
        try:
            point = mpq(str(q_override))
        except ValueError as err:
            raise SpecError("field.q_value",
                            f"not a rational: {q_override!r}") from err

    vblock = _need(obj, "V", dict, "$")
    wblock = _need(obj, "W", dict, "$")
    dim_v = _need(vblock, "dim", int, "V")
    dim_w = _need(wblock, "dim", int, "W")
    if dim_v < 0 or dim_w < 0:
        raise SpecError("V.dim" if dim_v < 0 else "W.dim", "must be nonnegative")
    v_names = _names(vblock, dim_v, lambda i: f"x{i}", "V")
    w_names = _names(wblock, dim_w, lambda i: f"w{i}", "W")
    if set(v_names) & set(w_names):
        raise SpecError("W.names", "coefficient names collide with generators")

    max_degree = _need(obj, "max_degree", int, "$")
    if max_degree < 2:
        raise SpecError("max_degree", "must be at least 2")

    relations = []
    raw_rels = obj.get("relations", [])
    if not isinstance(raw_rels, list):
        raise SpecError("relations", "expected a list")
    for rix, raw_rel in enumerate(raw_rels):
        rpath = f"relations[{rix}]"
        if not isinstance(raw_rel, list) or not raw_rel:
            raise SpecError(rpath, "a relation is a nonempty list of terms")
        terms = []
        degree = None
        for tix, raw_term in enumerate(raw_rel):
            tpath = f"{rpath}[{tix}]"
            if not isinstance(raw_term, list) or len(raw_term) != 2:
                raise SpecError(tpath, "a term is a [coefficient, word] pair")
            coeff = _scalar(raw_term[0], f"{tpath}[0]", point)
            word = raw_term[1]
            if (not isinstance(word, list) or len(word) < 2
                    or any(isinstance(k, bool) or not isinstance(k, int)
                           for k in word)):
                raise SpecError(f"{tpath}[1]",
                                "a word is a list of at least 2 generator indices")
            if any(not 0 <= k < dim_v for k in word):
                raise SpecError(f"{tpath}[1]",
                                f"generator indices must lie in [0, {dim_v})")
            if degree is None:
                degree = len(word)
            elif len(word) != degree:
                raise SpecError(f"{tpath}[1]",
                                "all words in one relation must have equal length")
            terms.append((coeff, tuple(word)))
        if degree > max_degree:
            raise SpecError(rpath,
                            f"relation degree {degree} exceeds max_degree {max_degree}")
        relations.append(tuple(terms))

    shape_v = Shape(("V",), (dim_v,))
    shape_w = Shape(("W",), (dim_w,))
    shape_vw = Shape(("V", "W"), (dim_v, dim_w))
    shape_wv = Shape(("W", "V"), (dim_w, dim_v))
    d0 = LinMap.from_rows(shape_v, shape_w, _matrix(
        _need(obj, "d0", list, "$"), dim_w, dim_v, "d0", point,
        "dimW x dimV"))
    b0 = LinMap.from_rows(shape_vw, shape_wv, _matrix(
        _need(obj, "b0", list, "$"), dim_w * dim_v, dim_v * dim_w, "b0", point,
        "(dimW*dimV) rows x (dimV*dimW) columns"))
    twist = None
    if "c" in obj:
        vv = Shape(("V", "V"), (dim_v, dim_v))
        twist = LinMap.from_rows(vv, vv, _matrix(
            obj["c"], dim_v * dim_v, dim_v * dim_v, "c", point,
            "dimV^2 x dimV^2"))

    doc = SpecDocument(point, dim_v, v_names, dim_w, w_names,
                       tuple(relations), d0, b0, twist, max_degree)
    doc.presentation()  # validates twist image against the relation span
    return doc
