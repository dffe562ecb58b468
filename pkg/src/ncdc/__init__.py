"""Exact first-order differential calculi on finitely presented algebras."""

from ncdc.scalars import (
    PoleError,
    Q,
    RatFun,
    Scalar,
    ScalarSyntaxError,
    as_scalar,
    eval_scalar,
    normalized,
    numden,
    parse_scalar,
    scalar_str,
)

__all__ = [
    "PoleError",
    "Q",
    "RatFun",
    "Scalar",
    "ScalarSyntaxError",
    "as_scalar",
    "eval_scalar",
    "normalized",
    "numden",
    "parse_scalar",
    "scalar_str",
]
