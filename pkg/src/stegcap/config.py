"""Flat ``key = value`` config files, plus the tuple text format."""

import math

from .exceptions import ValidationError


def parse_config(text):
    """Parse ``key = value`` lines; ``#`` starts a comment, blank lines skipped."""
    out = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValidationError(f"line {lineno}: expected key = value, got {raw!r}")
        key, value = (part.strip() for part in line.split("=", 1))
        if not key:
            raise ValidationError(f"line {lineno}: empty key")
        out[key] = value
    return out


def load_config(path):
    with open(path) as fh:
        return parse_config(fh.read())


def parse_kv_list(text):
    """Parse the inline form ``c=3,se2=1,sa2=1`` used on the command line."""
    out = {}
    for item in filter(None, (s.strip() for s in text.split(","))):
        if "=" not in item:
            raise ValidationError(f"expected key=value, got {item!r}")
        k, v = item.split("=", 1)
        out[k.strip()] = v.strip()
    return out


def parse_number(text):
    """Integers stay integers (``"1"`` -> 1); anything else becomes a float."""
    try:
        return int(text)
    except (TypeError, ValueError):
        pass
    try:
        value = float(text)
    except (TypeError, ValueError):
        raise ValidationError(f"not a number: {text!r}") from None
    if math.isnan(value):
        raise ValidationError("NaN is not a valid parameter")
    return value


def parse_letters(text):
    """``"0, 1 2"`` -> ``(0, 1, 2)``; letters may be separated by commas or spaces."""
    return tuple(parse_number(tok) for tok in text.replace(",", " ").split())


def parse_tuples(text):
    """One tuple per line (letters separated by spaces/commas)."""
    return [parse_letters(line) for line in text.splitlines() if line.strip() and not line.lstrip().startswith("#")]


def format_tuple(t):
    return " ".join(str(a) for a in t)


def format_tuples(tuples):
    return "".join(format_tuple(t) + "\n" for t in tuples)
