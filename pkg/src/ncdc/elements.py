"""Algebra-element expressions: sums of scalar-weighted generator words.

Grammar: ``expr ::= term ((+|-) term)*``, a term being an optional scalar
prefix (full scalar grammar, ``*``/``/``-chained) followed by a ``*``-joined
word of generator names; a bare word or bare scalar is also a term.
Elements need not be homogeneous; they are kept as one coordinate vector
per word length.
"""

from __future__ import annotations

from ncdc.scalars import ONE, ScalarParser, ScalarSyntaxError, scalar_str, tokenize


class ElementSyntaxError(ValueError):
    """Malformed element text, or a name that is not a generator."""

    def __init__(self, message: str, position: int):
        super().__init__(f"{message} (at position {position})")
        self.position = position


def parse_element(text: str, v_names) -> dict:
    """Parse to ``{degree: {monomial index: Scalar}}`` (zeros dropped).

    Words are resolved against ``v_names``; the monomial index follows the
    global lexicographic convention.
    """
    gens = {name: i for i, name in enumerate(v_names)}
    dim_v = len(v_names)
    try:
        toks = tokenize(text)
    except ScalarSyntaxError as err:
        raise ElementSyntaxError("unexpected character", err.position) from err
    scalars = ScalarParser(toks)
    out: dict = {}
    i = 0
    sign = 1
    first = True
    while True:
        kind, value, pos = toks[i]
        if kind == "end":
            if first:
                raise ElementSyntaxError("empty expression", pos)
            break
        if not first:
            if kind != "op" or value not in "+-":
                raise ElementSyntaxError("expected '+' or '-' between terms", pos)
            sign = 1 if value == "+" else -1
            i += 1
        coeff, word, i = _parse_term(toks, scalars, gens, i)
        if sign < 0:
            coeff = -coeff
        if coeff:
            degree = len(word)
            idx = 0
            for g in word:
                idx = idx * dim_v + g
            bucket = out.setdefault(degree, {})
            cur = bucket.get(idx)
            cur = coeff if cur is None else cur + coeff
            if cur:
                bucket[idx] = cur
            elif idx in bucket:
                del bucket[idx]
        first = False
        sign = 1
    return {n: vec for n, vec in out.items() if vec}


def _parse_term(toks, scalars, gens, i):
    coeff = ONE
    word = []
    while toks[i][:2] == ("op", "-"):
        coeff = -coeff
        i += 1
    divide = False
    while True:
        kind, value, pos = toks[i]
        if kind == "name" and value in gens:
            if divide:
                raise ElementSyntaxError("cannot divide by a generator", pos)
            word.append(gens[value])
            i += 1
        elif kind == "int" or (kind == "name" and value == "q") \
                or (kind, value) == ("op", "("):
            if word:
                raise ElementSyntaxError(
                    "scalar factors must precede the generator word", pos)
            try:
                val, i = scalars.parse_power(i)
            except ScalarSyntaxError as err:
                raise ElementSyntaxError(str(err), err.position) from err
            if divide:
                if not val:
                    raise ElementSyntaxError("division by zero", pos)
                coeff = coeff / val
            else:
                coeff = coeff * val
        elif kind == "name":
            raise ElementSyntaxError(f"unknown generator {value!r}", pos)
        else:
            raise ElementSyntaxError("expected a generator or a scalar", pos)
        divide = False
        kind, value, pos = toks[i]
        if (kind, value) == ("op", "*"):
            i += 1
            continue
        if (kind, value) == ("op", "/"):
            if word:
                raise ElementSyntaxError("division must precede the word", pos)
            divide = True
            i += 1
            continue
        return coeff, word, i


def _has_top_level_sign(text: str) -> bool:
    depth = 0
    for k, ch in enumerate(text):
        if ch == "(":
            depth += 1
        elif ch == ")":
            depth -= 1
        elif ch in "+-" and depth == 0 and k > 0:
            return True
    return False


def format_element(element: dict, v_names) -> str:
    """Canonical text: terms by (degree, monomial index), coefficients in
    canonical scalar spelling.  ``parse_element`` recovers the coordinates."""
    dim_v = len(v_names)
    pieces = []
    for degree in sorted(element):
        vec = element[degree]
        for idx in sorted(vec):
            coeff = vec[idx]
            if not coeff:
                continue
            # decode left-to-right: leftmost letter is most significant
            letters = []
            rest = idx
            for k in range(degree - 1, -1, -1):
                div = dim_v ** k
                g, rest = divmod(rest, div)
                letters.append(v_names[g])
            word = "*".join(letters)
            cs = scalar_str(coeff)
            negative = False
            if cs.startswith("-") and not _has_top_level_sign(cs[1:]):
                negative = True
                cs = cs[1:]
            if _has_top_level_sign(cs):
                cs = f"({cs})"
            if word:
                body = word if cs == "1" else f"{cs}*{word}"
            else:
                body = cs
            pieces.append((negative, body))
    if not pieces:
        return "0"
    out = []
    for k, (negative, body) in enumerate(pieces):
        if k == 0:
            out.append(("-" if negative else "") + body)
        else:
            out.append(("- " if negative else "+ ") + body)
    return " ".join(out)
