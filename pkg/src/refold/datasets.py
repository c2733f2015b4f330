"""Dataset loading from delimited text files, plus the benchmark registry.

Files are plain delimited text (default comma), one sample per row, one
label column, every other selected column a numeric feature. Parsing is
deliberately strict: the delimiter is taken literally, decimal points only,
and any malformed cell fails with its row and column named. There is no
network access anywhere; benchmark files are supplied locally and checked
against the packaged manifest (expected class/sample/dimension counts) so a
wrong or modified file fails loudly instead of skewing results.
"""

from __future__ import annotations

import configparser
import math
import os
from dataclasses import dataclass
from importlib import resources

import numpy as np

from .errors import ConfigError, DataFormatError

DATA_DIR_ENV = "REFOLD_DATA_DIR"
DEFAULT_DATA_DIR = "data"


@dataclass(frozen=True)
class DatasetSchema:
    """How to read one delimited file.

    label_column is a 0-based index (negative counts from the end) or, with
    header=True, a column name. feature_columns=None means every column
    except the label and drop_columns. Indices in drop_columns refer to raw
    file columns.
    """

    delimiter: str = ","
    label_column: int | str = -1
    feature_columns: tuple[int, ...] | None = None
    drop_columns: tuple[int, ...] = ()
    header: bool = False

    def __post_init__(self):
        if not self.delimiter or len(self.delimiter) != 1:
            raise ConfigError("delimiter must be a single character")
        if isinstance(self.label_column, str) and not self.header:
            raise ConfigError("named label column requires header=True")


@dataclass(frozen=True)
class Dataset:
    """Parsed dataset: (N, D) float features plus per-row class labels."""

    name: str
    features: np.ndarray
    labels: tuple[str, ...]
    class_names: tuple[str, ...]
    source: str
    schema: DatasetSchema
    task_prefix: str = ""

    def __post_init__(self):
        if not self.task_prefix:
            object.__setattr__(self, "task_prefix", self.name)

    @property
    def n_samples(self) -> int:
        return self.features.shape[0]

    @property
    def n_dims(self) -> int:
        return self.features.shape[1]


def load_dataset(
    path, schema: DatasetSchema | None = None, name: str = "", task_prefix: str = ""
) -> Dataset:
    """Parse one delimited file under the schema; errors name row and column."""
    schema = schema or DatasetSchema()
    path = os.fspath(path)
    if not os.path.isfile(path):
        raise DataFormatError(f"dataset file not found: {path}")
    with open(path, "r", encoding="utf-8") as fh:
        lines = fh.read().split("\n")
    # allow trailing blank lines only
    while lines and lines[-1] == "":
        lines.pop()

    row_offset = 0
    header_names: list[str] | None = None
    if schema.header:
        if not lines:
            raise DataFormatError(f"{path}: empty file, header expected")
        header_names = [c.strip() for c in lines[0].split(schema.delimiter)]
        row_offset = 1

    if not lines[row_offset:]:
        raise DataFormatError(f"{path}: no data rows")

    first_width = len(lines[row_offset].split(schema.delimiter))
    label_idx = _resolve_label(schema, header_names, first_width, path)
    feature_idx = _resolve_features(schema, label_idx, first_width, path)

    features = []
    labels = []
    for lineno, line in enumerate(lines[row_offset:], start=row_offset + 1):
        cells = line.split(schema.delimiter)
        if len(cells) != first_width:
            raise DataFormatError(
                f"{path}: row {lineno} has {len(cells)} fields, expected {first_width}"
            )
        row = []
        for col in feature_idx:
            row.append(_parse_cell(cells[col], path, lineno, col))
        features.append(row)
        labels.append(cells[label_idx].strip())

    class_names = []
    for lab in labels:
        if lab not in class_names:
            class_names.append(lab)
    matrix = np.array(features, dtype=np.float64)
    matrix.setflags(write=False)
    return Dataset(
        name=name or os.path.splitext(os.path.basename(path))[0],
        features=matrix,
        labels=tuple(labels),
        class_names=tuple(class_names),
        source=path,
        schema=schema,
        task_prefix=task_prefix,
    )


def _parse_cell(cell: str, path, lineno: int, col: int) -> float:
    """Strict numeric cell: decimal point only, finite, no digit separators."""
    text = cell.strip()
    # float() would silently accept underscore separators ("1_0" -> 10.0)
    if not text or "_" in text:
        raise DataFormatError(
            f"{path}: row {lineno} column {col}: not a number: {cell!r}"
        )
    try:
        value = float(text)
    except ValueError:
        raise DataFormatError(
            f"{path}: row {lineno} column {col}: not a number: {cell!r}"
        ) from None
    if math.isnan(value) or math.isinf(value):
        raise DataFormatError(
            f"{path}: row {lineno} column {col}: non-finite value {cell!r}"
        )
    return value


def _resolve_label(schema, header_names, width, path) -> int:
    if isinstance(schema.label_column, str):
        if schema.label_column not in header_names:
            raise DataFormatError(
                f"{path}: label column {schema.label_column!r} not in header"
            )
        return header_names.index(schema.label_column)
    idx = schema.label_column
    if idx < 0:
        idx += width
    if not 0 <= idx < width:
        raise DataFormatError(
            f"{path}: label column {schema.label_column} outside 0..{width - 1}"
        )
    return idx


def _resolve_features(schema, label_idx, width, path) -> list[int]:
    if schema.feature_columns is not None:
        cols = list(schema.feature_columns)
        if label_idx in cols:
            raise ConfigError("label column listed among feature columns")
    else:
        dropped = set(schema.drop_columns)
        cols = [c for c in range(width) if c != label_idx and c not in dropped]
    if not cols:
        raise DataFormatError(f"{path}: no feature columns left after selection")
    for c in cols:
        if not 0 <= c < width:
            raise DataFormatError(f"{path}: feature column {c} outside 0..{width - 1}")
    return cols


def load_feature_matrix(
    path, delimiter: str = ",", header: bool = False, drop_columns: tuple[int, ...] = ()
) -> np.ndarray:
    """Parse a label-free delimited file: every kept column is a feature."""
    path = os.fspath(path)
    if not os.path.isfile(path):
        raise DataFormatError(f"data file not found: {path}")
    with open(path, "r", encoding="utf-8") as fh:
        lines = fh.read().split("\n")
    while lines and lines[-1] == "":
        lines.pop()
    offset = 1 if header else 0
    if not lines[offset:]:
        raise DataFormatError(f"{path}: no data rows")
    width = len(lines[offset].split(delimiter))
    cols = [c for c in range(width) if c not in set(drop_columns)]
    if not cols:
        raise DataFormatError(f"{path}: no feature columns left after selection")
    rows = []
    for lineno, line in enumerate(lines[offset:], start=offset + 1):
        cells = line.split(delimiter)
        if len(cells) != width:
            raise DataFormatError(
                f"{path}: row {lineno} has {len(cells)} fields, expected {width}"
            )
        rows.append([_parse_cell(cells[col], path, lineno, col) for col in cols])
    return np.array(rows, dtype=np.float64)


# ------------------------------------------------------------------ registry

@dataclass(frozen=True)
class RegistryEntry:
    """Manifest record for one benchmark dataset: file, schema, expected shape."""

    name: str
    filename: str
    task_prefix: str
    classes: int
    samples: int
    dims: int
    schema: DatasetSchema
    note: str = ""


_registry_cache: dict[str, RegistryEntry] | None = None


def registry() -> dict[str, RegistryEntry]:
    """Benchmark datasets from the packaged manifest, keyed by name."""
    global _registry_cache
    if _registry_cache is None:
        text = resources.files("refold").joinpath("manifest.txt").read_text("utf-8")
        _registry_cache = parse_manifest(text)
    return _registry_cache


def parse_manifest(text: str) -> dict[str, RegistryEntry]:
    """Parse the key-value manifest listing expected (C, N, D) per dataset."""
    parser = configparser.ConfigParser(interpolation=None)
    parser.read_string(text)
    entries = {}
    for section in parser.sections():
        sec = parser[section]
        try:
            drop = tuple(
                int(c) for c in sec.get("drop_feature_columns", "").split(",") if c.strip()
            )
            label_raw = sec.get("label_column", "-1").strip()
            schema = DatasetSchema(
                delimiter=sec.get("delimiter", ","),
                label_column=int(label_raw),
                drop_columns=drop,
                header=sec.getboolean("header", False),
            )
            entries[section] = RegistryEntry(
                name=section,
                filename=sec["file"],
                task_prefix=sec["prefix"],
                classes=sec.getint("classes"),
                samples=sec.getint("samples"),
                dims=sec.getint("dims"),
                schema=schema,
                note=sec.get("note", ""),
            )
        except (KeyError, ValueError) as exc:
            raise DataFormatError(f"manifest section [{section}]: {exc}") from None
    return entries


def resolve_data_dir(data_dir: str | None = None) -> str:
    """Explicit argument, else $REFOLD_DATA_DIR, else ./data."""
    return data_dir or os.environ.get(DATA_DIR_ENV) or DEFAULT_DATA_DIR


def load_registry_dataset(name: str, data_dir: str | None = None) -> Dataset:
    """Load a manifest dataset and verify its (C, N, D) against expectations."""
    reg = registry()
    if name not in reg:
        raise DataFormatError(
            f"unknown dataset {name!r}; manifest lists: {', '.join(sorted(reg))}"
        )
    entry = reg[name]
    path = os.path.join(resolve_data_dir(data_dir), entry.filename)
    ds = load_dataset(path, entry.schema, name=entry.name, task_prefix=entry.task_prefix)
    problems = []
    if len(ds.class_names) != entry.classes:
        problems.append(f"classes {len(ds.class_names)} != {entry.classes}")
    if ds.n_samples != entry.samples:
        problems.append(f"samples {ds.n_samples} != {entry.samples}")
    if ds.n_dims != entry.dims:
        problems.append(f"dims {ds.n_dims} != {entry.dims}")
    if problems:
        raise DataFormatError(
            f"{path} does not match the manifest for {name!r}: " + "; ".join(problems)
        )
    return ds


def dataset_available(name: str, data_dir: str | None = None) -> bool:
    """True if the manifest dataset's file exists locally."""
    entry = registry().get(name)
    if entry is None:
        return False
    return os.path.isfile(os.path.join(resolve_data_dir(data_dir), entry.filename))
