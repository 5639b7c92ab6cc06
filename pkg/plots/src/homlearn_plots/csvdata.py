"""Typed access to the numeric CSV files the model CLI writes.

Every payload cell is numeric, so tables load column-major as floats.
Integer-valued columns (generation counters, degree labels, flags) come
back as exact floats; callers format them with ``%g`` where needed.
"""
import csv
from dataclasses import dataclass, field


class PlotDataError(ValueError):
    """The input table cannot support the requested figure."""


class MissingColumnsError(PlotDataError):
    def __init__(self, path: str, missing: list[str]):
        self.missing = tuple(missing)
        super().__init__(
            f"{path}: missing column(s): {', '.join(missing)}")


class EmptyTableError(PlotDataError):
    def __init__(self, path: str):
        super().__init__(f"{path}: no data rows")


@dataclass(frozen=True)
class Table:
    path: str
    header: tuple[str, ...]
    columns: dict[str, list[float]] = field(repr=False)

    def __len__(self) -> int:
        return len(self.columns[self.header[0]]) if self.header else 0

    def col(self, name: str) -> list[float]:
        return self.columns[name]

    def require(self, names: tuple[str, ...]) -> None:
        """Raise, naming every absent column, before any drawing starts."""
        missing = [n for n in names if n not in self.columns]
        if missing:
            raise MissingColumnsError(self.path, missing)


def load_table(path: str) -> Table:
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise EmptyTableError(path) from None
        rows = list(reader)
    if not rows:
        raise EmptyTableError(path)
    columns: dict[str, list[float]] = {name: [] for name in header}
    for lineno, row in enumerate(rows, start=2):
        if len(row) != len(header):
            raise PlotDataError(
                f"{path}:{lineno}: expected {len(header)} fields, "
                f"got {len(row)}")
        for name, cell in zip(header, row):
            try:
                columns[name].append(float(cell))
            except ValueError:
                raise PlotDataError(
                    f"{path}:{lineno}: non-numeric value {cell!r} "
                    f"in column {name}") from None
    return Table(path=path, header=tuple(header), columns=columns)
