from dataclasses import dataclass
from typing import Optional


def format_cell(value) -> str:
    """CSV cell text: '' for missing values, repr for floats so output is reproducible."""
    if value is None:
        return ""
    if isinstance(value, bool):
        return str(value).lower()
    if isinstance(value, float):
        return repr(value)
    return str(value)


def _parse(text: str, kind):
    if text == "":
        return None
    return kind(text)


@dataclass
class StudyRecord:
    """One row of a convergence study: a (p, h) point solved with one method."""
    problem: str
    method: str               # "dg" or "embedded"
    p: int
    h: float
    ndof: int                 # N for dg rows, M for embedded rows
    nzes: int                 # nnz(A) for dg rows, nnz(T^H A T) for embedded rows
    l2_error: float
    dg_error: Optional[float] = None
    cond_full: Optional[float] = None
    cond_reduced: Optional[float] = None
    t_assemble: Optional[float] = None
    t_embed: Optional[float] = None
    t_solve: Optional[float] = None

    COLUMNS = ("problem", "method", "p", "h", "ndof", "nzes", "l2_error", "dg_error",
               "cond_full", "cond_reduced", "t_assemble", "t_embed", "t_solve")

    def to_dict(self):
        """Converts the record to a dictionary in column order."""
        return {name: getattr(self, name) for name in self.COLUMNS}

    def to_row(self) -> list:
        return [format_cell(getattr(self, name)) for name in self.COLUMNS]

    @classmethod
    def from_dict(cls, data):
        """Creates a record from a CSV row dictionary (strings, '' for missing)."""
        values = {}
        for name in cls.COLUMNS:
            text = data.get(name, "")
            if name in ("problem", "method"):
                values[name] = text
            elif name in ("p", "ndof", "nzes"):
                values[name] = int(text)
            else:
                values[name] = _parse(text, float)
        return cls(**values)


@dataclass
class PlaneWaveRecord:
    """Best approximation of sin(omega x) and cos(omega x) on one interval element."""
    p: int
    omega: float
    embedded_dim: int
    full_dim: int
    sin_error_embedded: float
    sin_error_full: float
    cos_error_embedded: float
    cos_error_full: float

    COLUMNS = ("p", "omega", "embedded_dim", "full_dim", "sin_error_embedded", "sin_error_full",
               "cos_error_embedded", "cos_error_full")

    def to_dict(self):
        return {name: getattr(self, name) for name in self.COLUMNS}

    def to_row(self) -> list:
        return [format_cell(getattr(self, name)) for name in self.COLUMNS]


@dataclass
class SingularValueRecord:
    """Kernel detection margins of one degree over all elements of a mesh."""
    p: int
    n_elements: int
    kernel_dim: int
    max_zero_sv: Optional[float]
    min_nonzero_sv: Optional[float]

    COLUMNS = ("p", "n_elements", "kernel_dim", "max_zero_sv", "min_nonzero_sv", "gap")

    @property
    def gap(self) -> Optional[float]:
        if self.max_zero_sv is None or self.min_nonzero_sv is None:
            return None
        if self.max_zero_sv == 0.0:
            return float("inf")
        return self.min_nonzero_sv / self.max_zero_sv

    def to_dict(self):
        return {name: getattr(self, name) for name in self.COLUMNS}

    def to_row(self) -> list:
        return [format_cell(getattr(self, name)) for name in self.COLUMNS]


@dataclass
class DofTableRecord:
    """Unknowns and nonzeros of DG, hybridized DG and both Trefftz spaces at one degree."""
    n_elements: int
    p: int
    ndof_dg: int
    ndof_hdg: int
    ndof_tdg1: int
    ndof_tdg2: int
    nze_dg: int
    nze_hdg: int
    nze_tdg1: int
    nze_tdg2: int

    COLUMNS = ("n_elements", "p", "ndof_dg", "ndof_hdg", "ndof_tdg1", "ndof_tdg2",
               "nze_dg", "nze_hdg", "nze_tdg1", "nze_tdg2")

    @classmethod
    def from_counts(cls, counts):
        return cls(**{name: getattr(counts, name) for name in cls.COLUMNS})

    def to_dict(self):
        return {name: getattr(self, name) for name in self.COLUMNS}

    def to_row(self) -> list:
        return [format_cell(getattr(self, name)) for name in self.COLUMNS]
