"""Simulated NB-IoT performance tables and the queries built on them.

The cell-search, MCS, random-access and overhead tables are embedded
verbatim. SNR values that fall between grid rows are looked up on the next
lower grid row, which is never optimistic for tables whose requirements fall
as SNR rises. Every table can be replaced by a CSV file with the layouts
documented on the ``load_*`` functions.
"""

from __future__ import annotations

import csv
import enum
import math
import os
from dataclasses import dataclass
from typing import Mapping, NamedTuple, Sequence

import numpy as np

FRAME_DURATION = 0.010  # s
SUBFRAME_DURATION = 0.001  # s


class TableError(ValueError):
    """A performance table is malformed or violates its monotonicity rules."""


class ChannelModel(str, enum.Enum):
    LOS = "LOS"
    AWGN = "AWGN"
    NCU = "NCU"
    NDH = "NDH"


class DopplerCase(str, enum.Enum):
    """Doppler conditions under which cell search was simulated."""

    OFFSET = "28.4kHz_306Hz/s"
    RATE = "0Hz_580Hz/s"
    STATIC = "0Hz_0Hz/s"


class Direction(str, enum.Enum):
    DL = "DL"
    UL = "UL"


def _next_lower(grid: Sequence[float], value: float) -> int | None:
    """Index of the largest grid point <= value in an ascending grid."""
    idx = int(np.searchsorted(grid, value, side="right")) - 1
    return idx if idx >= 0 else None


# ---------------------------------------------------------------------------
# MCS / required SNR

MCS_REPETITIONS = (1, 2, 4, 8, 16)

# required SNR (dB) for 10 % BLER, rows I_TBS 0..13
MCS_SNR_DB = (
    (-5.8, -8.3, -10.6, -12.8, -14.7),
    (-4.9, -7.2, -9.7, -11.9, -13.8),
    (-3.9, -6.2, -8.8, -11.0, -12.9),
    (-3.0, -5.4, -8.0, -10.4, -12.2),
    (-2.0, -4.6, -7.2, -9.6, -11.4),
    (-1.1, -3.7, -6.3, -8.9, -10.8),
    (-0.2, -2.8, -5.6, -8.0, -10.0),
    (0.7, -1.9, -4.7, -7.3, -9.3),
    (1.4, -1.3, -4.1, -6.8, -8.9),
    (2.2, -0.4, -3.3, -6.0, -8.1),
    (3.1, 0.4, -2.4, -5.2, -7.3),
    (4.2, 1.4, -1.5, -4.3, -6.6),
    (5.5, 2.7, -0.4, -3.3, -5.6),
    (6.9, 3.9, 0.9, -2.0, -4.4),
)

# NPDSCH transport block sizes for a single subframe, I_TBS 0..13
TBS_BITS = (16, 24, 32, 40, 56, 72, 88, 104, 120, 136, 144, 176, 208, 224)


class McsChoice(NamedTuple):
    i_tbs: int
    repetitions: int


@dataclass(frozen=True)
class McsTable:
    snr_db: np.ndarray  # shape (n_itbs, n_reps)
    repetitions: tuple[int, ...] = MCS_REPETITIONS
    tbs_bits: tuple[int, ...] = TBS_BITS

    def __post_init__(self) -> None:
        snr = np.array(self.snr_db, dtype=float)
        snr.setflags(write=False)
        object.__setattr__(self, "snr_db", snr)
        if snr.shape != (len(self.tbs_bits), len(self.repetitions)):
            raise TableError(
                f"MCS table shape {snr.shape} does not match "
                f"{len(self.tbs_bits)} TBS x {len(self.repetitions)} repetitions"
            )
        if np.any(np.diff(snr, axis=1) >= 0):
            raise TableError("required SNR must fall strictly with repetitions")
        if np.any(np.diff(snr, axis=0) <= 0):
            raise TableError("required SNR must rise strictly with I_TBS")

    def required_snr(self, i_tbs: int, repetitions: int) -> float:
        return float(self.snr_db[i_tbs, self.repetitions.index(repetitions)])

    @property
    def min_snr(self) -> float:
        return float(self.snr_db.min())


DEFAULT_MCS_TABLE = McsTable(MCS_SNR_DB)


def airtime(choice: McsChoice, payload_bits: int, table: McsTable = DEFAULT_MCS_TABLE) -> float:
    """Seconds on air to deliver ``payload_bits`` with one MCS.

    Each transport block occupies one subframe per repetition; payloads larger
    than the block are split over ``ceil(payload / TBS)`` blocks.
    """
    blocks = math.ceil(payload_bits / table.tbs_bits[choice.i_tbs])
    return blocks * choice.repetitions * SUBFRAME_DURATION


def select_mcs(
    snr: float, table: McsTable = DEFAULT_MCS_TABLE, payload_bits: int = 100
) -> McsChoice | None:
    """Fastest feasible (I_TBS, repetitions) for a payload, or None.

    Among the cells whose required SNR does not exceed ``snr`` the one with
    the shortest airtime for ``payload_bits`` wins; ties go to fewer
    repetitions and then to the higher I_TBS.
    """
    if payload_bits <= 0:
        raise ValueError("payload_bits must be positive")
    best: McsChoice | None = None
    best_key = None
    for j, reps in enumerate(table.repetitions):
        for i in range(len(table.tbs_bits)):
            if table.snr_db[i, j] > snr:
                continue
            choice = McsChoice(i, reps)
            key = (airtime(choice, payload_bits, table), reps, -i)
            if best_key is None or key < best_key:
                best, best_key = choice, key
    return best


@dataclass(frozen=True)
class PhyRateProfile:
    t: np.ndarray
    rate: np.ndarray  # bit/s, 0 where infeasible
    i_tbs: np.ndarray  # -1 where infeasible
    repetitions: np.ndarray  # 0 where infeasible

    @property
    def peak_rate(self) -> float:
        return float(self.rate.max()) if len(self.rate) else 0.0


def phy_rate(snr: float, payload_bits: int = 100, table: McsTable = DEFAULT_MCS_TABLE) -> float:
    choice = select_mcs(snr, table, payload_bits)
    if choice is None:
        return 0.0
    return payload_bits / airtime(choice, payload_bits, table)


def phy_rate_profile(budget, payload_bits: int = 100, table: McsTable = DEFAULT_MCS_TABLE) -> PhyRateProfile:
    """DL PHY rate for ``payload_bits`` at every budget sample."""
    if payload_bits <= 0:
        raise ValueError("payload_bits must be positive")
    n = len(budget.t)
    rate = np.zeros(n)
    i_tbs = np.full(n, -1, dtype=int)
    reps = np.zeros(n, dtype=int)
    # the selection only changes at table thresholds, so cache per SNR value
    cache: dict[float, McsChoice | None] = {}
    for k, snr in enumerate(budget.snr_dl):
        snr = float(snr)
        if snr not in cache:
            cache[snr] = select_mcs(snr, table, payload_bits)
        choice = cache[snr]
        if choice is None:
            continue
        rate[k] = payload_bits / airtime(choice, payload_bits, table)
        i_tbs[k], reps[k] = choice
    return PhyRateProfile(t=np.asarray(budget.t).copy(), rate=rate, i_tbs=i_tbs, repetitions=reps)


# ---------------------------------------------------------------------------
# Cell search

CELL_SEARCH_SNR_DB = (-10.0, -7.0, -4.0, 0.0, 5.0)

# frames per (model, doppler case), rows follow CELL_SEARCH_SNR_DB
_CELL_SEARCH_FRAMES = {
    ChannelModel.LOS: {
        DopplerCase.OFFSET: (532, 30, 4, 2, 2),
        DopplerCase.RATE: (414, 26, 4, 2, 2),
        DopplerCase.STATIC: (426, 28, 4, 2, 2),
    },
    ChannelModel.NCU: {
        DopplerCase.OFFSET: (3110, 64, 10, 2, 2),
        DopplerCase.RATE: (3350, 60, 8, 2, 2),
        DopplerCase.STATIC: (2450, 50, 8, 2, 2),
    },
    ChannelModel.NDH: {
        DopplerCase.OFFSET: (586, 42, 8, 4, 2),
        DopplerCase.RATE: (490, 40, 8, 4, 2),
        DopplerCase.STATIC: (436, 34, 8, 4, 2),
    },
}


@dataclass(frozen=True)
class CellSearchTable:
    """Frames (10 ms each) needed to detect NPSS/NSSS."""

    frames: Mapping[tuple[ChannelModel, float, DopplerCase], int]

    def __post_init__(self) -> None:
        models = {k[0] for k in self.frames}
        cases = {k[2] for k in self.frames}
        grid = self.snr_grid
        for m in models:
            for c in cases:
                column = []
                for s in grid:
                    if (m, s, c) not in self.frames:
                        raise TableError(f"cell search table lacks {m.value}/{s}/{c.value}")
                    column.append(self.frames[(m, s, c)])
                if any(b > a for a, b in zip(column, column[1:])):
                    raise TableError(f"frames must not rise with SNR ({m.value}, {c.value})")

    @property
    def snr_grid(self) -> tuple[float, ...]:
        return tuple(sorted({k[1] for k in self.frames}))

    @classmethod
    def default(cls) -> "CellSearchTable":
        frames = {}
        for model, cases in _CELL_SEARCH_FRAMES.items():
            for case, column in cases.items():
                for snr, n in zip(CELL_SEARCH_SNR_DB, column):
                    frames[(model, snr, case)] = n
        return cls(frames)


DEFAULT_CELL_SEARCH_TABLE = CellSearchTable.default()


def cell_search_frames(
    snr: float,
    model: ChannelModel | str,
    doppler_case: DopplerCase | str,
    table: CellSearchTable = DEFAULT_CELL_SEARCH_TABLE,
) -> int | None:
    """Frames needed for cell search; None below the lowest simulated SNR."""
    model, doppler_case = ChannelModel(model), DopplerCase(doppler_case)
    grid = table.snr_grid
    idx = _next_lower(grid, snr)
    if idx is None:
        return None
    key = (model, grid[idx], doppler_case)
    if key not in table.frames:
        raise KeyError(f"no cell search entry for {model.value} / {doppler_case.value}")
    return table.frames[key]


@dataclass(frozen=True)
class MibDecoderCurve:
    """Required MIB repetitions against SNR, supplied as data."""

    snr_db: np.ndarray
    repetitions: np.ndarray

    def __post_init__(self) -> None:
        snr = np.asarray(self.snr_db, dtype=float)
        reps = np.asarray(self.repetitions, dtype=float)
        if snr.ndim != 1 or snr.shape != reps.shape or len(snr) == 0:
            raise TableError("MIB curve needs matching, non-empty SNR and repetition columns")
        order = np.argsort(snr)
        snr, reps = snr[order], reps[order]
        if np.any(np.diff(snr) == 0):
            raise TableError("duplicate SNR points in MIB curve")
        if np.any(np.diff(reps) > 0):
            raise TableError("MIB repetitions must not rise with SNR")
        object.__setattr__(self, "snr_db", snr)
        object.__setattr__(self, "repetitions", reps)

    def repetitions_at(self, snr: float) -> float | None:
        idx = _next_lower(self.snr_db, snr)
        return None if idx is None else float(self.repetitions[idx])


def _required_frames(snr, model, doppler_case, table, mib):
    frames = cell_search_frames(snr, model, doppler_case, table)
    if frames is None:
        return None
    if mib is not None:
        extra = mib.repetitions_at(snr)
        if extra is None:
            return None
        frames += extra
    return frames


def sync_windows(
    budget,
    table: CellSearchTable = DEFAULT_CELL_SEARCH_TABLE,
    model: ChannelModel | str = ChannelModel.NCU,
    mib: MibDecoderCurve | None = None,
    doppler_case: DopplerCase | str = DopplerCase.OFFSET,
) -> list[tuple[float, float]]:
    """Intervals during which a continuously searching UE is synchronised.

    The pass is cut into runs of samples where a cell-search requirement
    exists (and a MIB requirement, when a curve is given). Within a run the
    UE starts searching at the first sample and accumulates progress at
    ``1 / (frames * 10 ms)`` per second, the requirement being held constant
    from one sample to the next. The returned interval opens when progress
    reaches one and closes at the last sample of the run. Losing the signal
    resets the search.
    """
    t = np.asarray(budget.t, dtype=float)
    snr = np.asarray(budget.snr_dl, dtype=float)
    required = [_required_frames(float(s), model, doppler_case, table, mib) for s in snr]

    windows: list[tuple[float, float]] = []
    k, n = 0, len(t)
    while k < n:
        if required[k] is None:
            k += 1
            continue
        start = k
        while k + 1 < n and required[k + 1] is not None:
            k += 1
        stop = k  # last sample of the run
        progress = 0.0
        for i in range(start, stop):
            dt = t[i + 1] - t[i]
            rate = 1.0 / (required[i] * FRAME_DURATION)
            if progress + rate * dt >= 1.0:
                t_detect = t[i] + (1.0 - progress) / rate
                windows.append((float(t_detect), float(t[stop])))
                break
            progress += rate * dt
        k += 1
    return windows


# ---------------------------------------------------------------------------
# Random access

RAP_SNR_DB = (-12.0, -10.0, -7.0, -4.0, 0.0)

# (repetitions, detection failure %) per model, rows follow RAP_SNR_DB
_RAP_ENTRIES = {
    ChannelModel.AWGN: ((128, 8.0), (128, 0.0), (32, 0.0), (8, 0.0), (2, 0.0)),
    ChannelModel.NCU: ((128, 0.0), (62, 0.0), (8, 0.0), (4, 0.0), (1, 0.0)),
    ChannelModel.NDH: ((128, 13.0), (128, 0.0), (32, 0.0), (8, 0.0), (2, 0.0)),
}


class RapRequirement(NamedTuple):
    repetitions: int
    failure_pct: float


@dataclass(frozen=True)
class RapTable:
    entries: Mapping[tuple[float, ChannelModel], RapRequirement]

    def __post_init__(self) -> None:
        grid = self.snr_grid
        for m in {k[1] for k in self.entries}:
            column = []
            for s in grid:
                if (s, m) not in self.entries:
                    raise TableError(f"RAP table lacks {s} dB / {m.value}")
                column.append(self.entries[(s, m)].repetitions)
            if any(b > a for a, b in zip(column, column[1:])):
                raise TableError(f"RAP repetitions must not rise with SNR ({m.value})")

    @property
    def snr_grid(self) -> tuple[float, ...]:
        return tuple(sorted({k[0] for k in self.entries}))

    @classmethod
    def default(cls) -> "RapTable":
        entries = {}
        for model, column in _RAP_ENTRIES.items():
            for snr, (reps, fail) in zip(RAP_SNR_DB, column):
                entries[(snr, model)] = RapRequirement(reps, fail)
        return cls(entries)


DEFAULT_RAP_TABLE = RapTable.default()


def rap_repetitions(
    snr: float, model: ChannelModel | str, table: RapTable = DEFAULT_RAP_TABLE
) -> RapRequirement | None:
    """Preamble repetitions for reliable detection; None below the table."""
    model = ChannelModel(model)
    grid = table.snr_grid
    idx = _next_lower(grid, snr)
    if idx is None:
        return None
    key = (grid[idx], model)
    if key not in table.entries:
        raise KeyError(f"no RAP entry for {model.value}")
    return table.entries[key]


# ---------------------------------------------------------------------------
# Static overhead on the anchor carrier


@dataclass(frozen=True)
class OverheadTable:
    """Overhead shares in percent. Totals are kept as published."""

    dl: Mapping[str, float]
    ul: Mapping[str, float]
    dl_total: float
    ul_total: float

    # published totals are rounded to two decimals
    tolerance = 0.01 + 1e-9

    def __post_init__(self) -> None:
        for name, parts, total in (("DL", self.dl, self.dl_total), ("UL", self.ul, self.ul_total)):
            if abs(sum(parts.values()) - total) > self.tolerance:
                raise TableError(
                    f"{name} overhead components sum to {sum(parts.values()):.2f}, total says {total}"
                )
            if not 0 <= total < 100:
                raise TableError(f"{name} overhead total out of range: {total}")

    def total(self, direction: Direction | str) -> float:
        return self.dl_total if Direction(direction) is Direction.DL else self.ul_total

    @classmethod
    def default(cls) -> "OverheadTable":
        return cls(
            dl={
                "NPSS+NSSS": 15.0,
                "NRS": 4.0,
                "NPBCH": 9.52,
                "NB-SIB1": 4.76,
                "NB-SIBx": 8.0,
                "PDCCH": 18.15,
            },
            ul={"PRACH": 28.0, "DMRS": 10.29},
            dl_total=59.42,
            ul_total=38.29,
        )


DEFAULT_OVERHEAD_TABLE = OverheadTable.default()


def effective_capacity(
    direction: Direction | str, raw_rate, table: OverheadTable = DEFAULT_OVERHEAD_TABLE
):
    """Rate left for user data after the static anchor-carrier overhead."""
    raw = np.asarray(raw_rate, dtype=float)
    if np.any(raw < 0):
        raise ValueError("raw rate must be non-negative")
    out = raw * (1.0 - table.total(direction) / 100.0)
    return out if out.ndim else float(out)


# ---------------------------------------------------------------------------
# CSV import / export
#
#   mcs.csv          i_tbs,repetitions,snr_db
#   cell_search.csv  model,snr_db,doppler_case,frames
#   rap.csv          snr_db,model,repetitions,failure_pct
#   overhead.csv     direction,component,percent   (component "Total" = total)
#   mib.csv          snr_db,repetitions


def _read_rows(path: str | os.PathLike, columns: Sequence[str]) -> list[dict[str, str]]:
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None or list(reader.fieldnames) != list(columns):
            raise TableError(f"{path}: expected header {','.join(columns)}, got {reader.fieldnames}")
        rows = [row for row in reader if any(v.strip() for v in row.values() if v)]
    if not rows:
        raise TableError(f"{path}: no data rows")
    return rows


def _write_rows(path, columns, rows) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(columns)
        writer.writerows(rows)


def load_mcs_table(path) -> McsTable:
    rows = _read_rows(path, ("i_tbs", "repetitions", "snr_db"))
    cells = {(int(r["i_tbs"]), int(r["repetitions"])): float(r["snr_db"]) for r in rows}
    itbs = sorted({k[0] for k in cells})
    reps = sorted({k[1] for k in cells})
    if itbs != list(range(len(itbs))) or len(itbs) > len(TBS_BITS):
        raise TableError(f"{path}: I_TBS must run 0..{len(TBS_BITS) - 1} without gaps")
    try:
        grid = [[cells[(i, r)] for r in reps] for i in itbs]
    except KeyError as exc:
        raise TableError(f"{path}: missing cell {exc}") from None
    return McsTable(np.array(grid), tuple(reps), TBS_BITS[: len(itbs)])


def save_mcs_table(path, table: McsTable = DEFAULT_MCS_TABLE) -> None:
    rows = [
        (i, r, f"{table.snr_db[i, j]:g}")
        for i in range(len(table.tbs_bits))
        for j, r in enumerate(table.repetitions)
    ]
    _write_rows(path, ("i_tbs", "repetitions", "snr_db"), rows)


def load_cell_search_table(path) -> CellSearchTable:
    rows = _read_rows(path, ("model", "snr_db", "doppler_case", "frames"))
    try:
        frames = {
            (ChannelModel(r["model"]), float(r["snr_db"]), DopplerCase(r["doppler_case"])): int(r["frames"])
            for r in rows
        }
    except ValueError as exc:
        raise TableError(f"{path}: {exc}") from None
    return CellSearchTable(frames)


def save_cell_search_table(path, table: CellSearchTable = DEFAULT_CELL_SEARCH_TABLE) -> None:
    rows = [
        (m.value, f"{s:g}", c.value, n)
        for (m, s, c), n in sorted(table.frames.items(), key=lambda kv: (kv[0][0].value, kv[0][1], kv[0][2].value))
    ]
    _write_rows(path, ("model", "snr_db", "doppler_case", "frames"), rows)


def load_rap_table(path) -> RapTable:
    rows = _read_rows(path, ("snr_db", "model", "repetitions", "failure_pct"))
    try:
        entries = {
            (float(r["snr_db"]), ChannelModel(r["model"])): RapRequirement(
                int(r["repetitions"]), float(r["failure_pct"] or 0.0)
            )
            for r in rows
        }
    except ValueError as exc:
        raise TableError(f"{path}: {exc}") from None
    return RapTable(entries)


def save_rap_table(path, table: RapTable = DEFAULT_RAP_TABLE) -> None:
    rows = [
        (f"{s:g}", m.value, req.repetitions, f"{req.failure_pct:g}")
        for (s, m), req in sorted(table.entries.items(), key=lambda kv: (kv[0][1].value, kv[0][0]))
    ]
    _write_rows(path, ("snr_db", "model", "repetitions", "failure_pct"), rows)


def load_overhead_table(path) -> OverheadTable:
    rows = _read_rows(path, ("direction", "component", "percent"))
    parts: dict[Direction, dict[str, float]] = {Direction.DL: {}, Direction.UL: {}}
    totals: dict[Direction, float] = {}
    for r in rows:
        direction = Direction(r["direction"])
        if r["component"] == "Total":
            totals[direction] = float(r["percent"])
        else:
            parts[direction][r["component"]] = float(r["percent"])
    for direction in Direction:
        if direction not in totals:
            totals[direction] = sum(parts[direction].values())
    return OverheadTable(parts[Direction.DL], parts[Direction.UL], totals[Direction.DL], totals[Direction.UL])


def save_overhead_table(path, table: OverheadTable = DEFAULT_OVERHEAD_TABLE) -> None:
    rows = [("DL", k, f"{v:g}") for k, v in table.dl.items()]
    rows.append(("DL", "Total", f"{table.dl_total:g}"))
    rows += [("UL", k, f"{v:g}") for k, v in table.ul.items()]
    rows.append(("UL", "Total", f"{table.ul_total:g}"))
    _write_rows(path, ("direction", "component", "percent"), rows)


def load_mib_curve(path) -> MibDecoderCurve:
    rows = _read_rows(path, ("snr_db", "repetitions"))
    return MibDecoderCurve(
        np.array([float(r["snr_db"]) for r in rows]),
        np.array([float(r["repetitions"]) for r in rows]),
    )


@dataclass(frozen=True)
class PerformanceTables:
    mcs: McsTable = DEFAULT_MCS_TABLE
    cell_search: CellSearchTable = DEFAULT_CELL_SEARCH_TABLE
    rap: RapTable = DEFAULT_RAP_TABLE
    overhead: OverheadTable = DEFAULT_OVERHEAD_TABLE
    mib: MibDecoderCurve | None = None


TABLE_FILES = {
    "mcs": ("mcs.csv", load_mcs_table),
    "cell_search": ("cell_search.csv", load_cell_search_table),
    "rap": ("rap.csv", load_rap_table),
    "overhead": ("overhead.csv", load_overhead_table),
    "mib": ("mib.csv", load_mib_curve),
}


def load_tables(directory: str | os.PathLike | None) -> PerformanceTables:
    """Defaults, with any of the known CSV files in ``directory`` overriding them."""
    if directory is None:
        return PerformanceTables()
    if not os.path.isdir(directory):
        raise FileNotFoundError(f"table directory not found: {directory}")
    found = {}
    for field_name, (filename, loader) in TABLE_FILES.items():
        path = os.path.join(directory, filename)
        if os.path.exists(path):
            found[field_name] = loader(path)
    return PerformanceTables(**found)
