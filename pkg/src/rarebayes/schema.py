"""Schema files: variable declarations, selection thresholds, window settings.

A schema is a small line-oriented text file.  ``#`` starts a comment.
Recognized directives::

    class <name>
    var <name> categorical
    var <name> continuous [entropy|quantile]
    t_prime <float>          # cumulative-MI threshold for class-to-field selection
    t_field <float>          # cumulative-CMI threshold for field-to-field edges
    window <int>
    group <name>
    max_parents <int>
    max_bins <int>
    smoothing <float>
    max_model_cells <int>
"""

from __future__ import annotations

from dataclasses import dataclass, replace

from .errors import SchemaError

DEFAULT_T_PRIME = 0.95
DEFAULT_T_FIELD = 0.35
DEFAULT_MAX_PARENTS = 1
DEFAULT_MAX_BINS = 16
DEFAULT_MAX_MODEL_CELLS = 10_000_000

_KINDS = ("categorical", "continuous")
_DISCRETIZERS = ("entropy", "quantile")


@dataclass(frozen=True)
class VariableSpec:
    """One field variable: a name, a kind, and (if continuous) a discretizer."""

    name: str
    kind: str
    discretizer: str | None = None

    def __post_init__(self):
        if self.kind not in _KINDS:
            raise SchemaError(f"unknown kind {self.kind!r} for variable {self.name!r}")
        if self.kind == "continuous":
            if self.discretizer not in _DISCRETIZERS:
                raise SchemaError(
                    f"continuous variable {self.name!r} needs a discretizer "
                    f"in {_DISCRETIZERS}, got {self.discretizer!r}"
                )
        elif self.discretizer is not None:
            raise SchemaError(
                f"categorical variable {self.name!r} must not declare a discretizer"
            )


@dataclass(frozen=True)
class Schema:
    """Parsed schema: class column, field variables, and training knobs."""

    class_var: str
    field_vars: tuple[VariableSpec, ...]
    t_prime: float = DEFAULT_T_PRIME
    t_field: float = DEFAULT_T_FIELD
    window: int = 1
    group_key: str | None = None
    max_parents: int = DEFAULT_MAX_PARENTS
    max_bins: int = DEFAULT_MAX_BINS
    smoothing: float = 0.0
    max_model_cells: int = DEFAULT_MAX_MODEL_CELLS

    def __post_init__(self):
        names = [v.name for v in self.field_vars]
        if len(set(names)) != len(names):
            dup = next(n for n in names if names.count(n) > 1)
            raise SchemaError(f"duplicate variable name {dup!r}")
        if self.class_var in names:
            raise SchemaError(f"class variable {self.class_var!r} also declared as a field")
        if not self.field_vars:
            raise SchemaError("schema declares no field variables")
        if not 0.0 <= self.t_prime <= 1.0:
            raise SchemaError(f"t_prime must lie in [0, 1], got {self.t_prime}")
        if not 0.0 <= self.t_field <= 1.0:
            raise SchemaError(f"t_field must lie in [0, 1], got {self.t_field}")
        if self.window < 1:
            raise SchemaError(f"window must be >= 1, got {self.window}")
        if self.max_parents < 0:
            raise SchemaError(f"max_parents must be >= 0, got {self.max_parents}")
        if self.max_bins < 1:
            raise SchemaError(f"max_bins must be >= 1, got {self.max_bins}")
        if self.smoothing < 0:
            raise SchemaError(f"smoothing must be >= 0, got {self.smoothing}")
        if self.max_model_cells < 1:
            raise SchemaError(f"max_model_cells must be >= 1, got {self.max_model_cells}")

    @property
    def var_names(self) -> list[str]:
        return [v.name for v in self.field_vars]

    def variable(self, name: str) -> VariableSpec:
        for v in self.field_vars:
            if v.name == name:
                return v
        raise KeyError(name)

    @property
    def continuous_vars(self) -> list[VariableSpec]:
        return [v for v in self.field_vars if v.kind == "continuous"]

    @property
    def categorical_vars(self) -> list[VariableSpec]:
        return [v for v in self.field_vars if v.kind == "categorical"]

    def with_overrides(self, **kwargs) -> "Schema":
        return replace(self, **kwargs)


def _parse_float(token: str, what: str, lineno: int) -> float:
    try:
        return float(token)
    except ValueError:
        raise SchemaError(f"{what} expects a number, got {token!r}", lineno) from None


def _parse_int(token: str, what: str, lineno: int) -> int:
    try:
        return int(token)
    except ValueError:
        raise SchemaError(f"{what} expects an integer, got {token!r}", lineno) from None


def parse_schema(text: str) -> Schema:
    """Parse schema-file contents into a :class:`Schema` with defaults applied.

    Raises :class:`SchemaError` naming the offending line on duplicate
    variables, unknown kinds, thresholds outside [0, 1], or window < 1.
    """
    class_var: str | None = None
    fields: list[VariableSpec] = []
    seen: set[str] = set()
    options: dict[str, object] = {}

    scalar_directives = {
        "t_prime": ("t_prime", _parse_float),
        "t_field": ("t_field", _parse_float),
        "window": ("window", _parse_int),
        "max_parents": ("max_parents", _parse_int),
        "max_bins": ("max_bins", _parse_int),
        "smoothing": ("smoothing", _parse_float),
        "max_model_cells": ("max_model_cells", _parse_int),
    }

    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        tokens = line.split()
        directive, args = tokens[0], tokens[1:]

        if directive == "class":
            if len(args) != 1:
                raise SchemaError("class expects exactly one name", lineno)
            if class_var is not None:
                raise SchemaError("class declared twice", lineno)
            class_var = args[0]
        elif directive == "var":
            if len(args) < 2:
                raise SchemaError("var expects a name and a kind", lineno)
            name, kind = args[0], args[1]
            if name in seen or name == class_var:
                raise SchemaError(f"duplicate variable name {name!r}", lineno)
            seen.add(name)
            if kind == "categorical":
                if len(args) > 2:
                    raise SchemaError(
                        f"unexpected token {args[2]!r} after categorical variable", lineno
                    )
                fields.append(VariableSpec(name, "categorical"))
            elif kind == "continuous":
                discretizer = args[2] if len(args) > 2 else "entropy"
                if len(args) > 3:
                    raise SchemaError(f"unexpected token {args[3]!r}", lineno)
                if discretizer not in _DISCRETIZERS:
                    raise SchemaError(f"unknown discretizer {discretizer!r}", lineno)
                fields.append(VariableSpec(name, "continuous", discretizer))
            else:
                raise SchemaError(f"unknown kind {kind!r}", lineno)
        elif directive == "group":
            if len(args) != 1:
                raise SchemaError("group expects exactly one column name", lineno)
            options["group_key"] = args[0]
        elif directive in scalar_directives:
            if len(args) != 1:
                raise SchemaError(f"{directive} expects exactly one value", lineno)
            key, conv = scalar_directives[directive]
            value = conv(args[0], directive, lineno)
            # range checks here so the error names the offending line
            if key in ("t_prime", "t_field") and not 0.0 <= value <= 1.0:
                raise SchemaError(f"{directive} outside [0, 1]: {value}", lineno)
            if key == "window" and value < 1:
                raise SchemaError(f"window must be >= 1, got {value}", lineno)
            options[key] = value
        else:
            raise SchemaError(f"unknown directive {directive!r}", lineno)

    if class_var is None:
        raise SchemaError("schema is missing a class directive")
    if class_var in seen:
        raise SchemaError(f"class variable {class_var!r} also declared as a field")
    return Schema(class_var=class_var, field_vars=tuple(fields), **options)  # type: ignore[arg-type]


def format_schema(schema: Schema) -> str:
    """Render a Schema back to its file form (used by the data generator)."""
    lines = [f"class {schema.class_var}"]
    if schema.group_key:
        lines.append(f"group {schema.group_key}")
    for v in schema.field_vars:
        if v.kind == "categorical":
            lines.append(f"var {v.name} categorical")
        else:
            lines.append(f"var {v.name} continuous {v.discretizer}")
    lines.append(f"t_prime {schema.t_prime}")
    lines.append(f"t_field {schema.t_field}")
    lines.append(f"window {schema.window}")
    lines.append(f"max_parents {schema.max_parents}")
    lines.append(f"max_bins {schema.max_bins}")
    if schema.smoothing:
        lines.append(f"smoothing {schema.smoothing}")
    lines.append(f"max_model_cells {schema.max_model_cells}")
    return "\n".join(lines) + "\n"
