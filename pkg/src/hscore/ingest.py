"""Weekly stat ingestion: CSV loading, the eligible pool, and the relevant-set cut."""

from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .config import COUNTING, PERCENTAGE, POSITIONS, LeagueConfig

CSV_HEADER = [
    "player_id", "name", "positions", "week", "games",
    "pts", "reb", "ast", "stl", "blk", "tpm", "tov",
    "fgm", "fga", "ftm", "fta", "injured",
]

STAT_FIELDS = ("pts", "reb", "ast", "stl", "blk", "tpm", "tov", "fgm", "fga", "ftm", "fta")


class StatsParseError(ValueError):
    """Raised when a stats file is structurally malformed."""


class StatsValidationError(ValueError):
    """Raised when a row parses but violates a data invariant."""


class PoolSizeError(ValueError):
    """Raised when the pool is too small for the requested league."""


@dataclass(frozen=True)
class WeeklyLine:
    """One player-week of raw totals."""

    player_id: str
    week: int
    games: int
    pts: float
    reb: float
    ast: float
    stl: float
    blk: float
    tpm: float
    tov: float
    fgm: float
    fga: float
    ftm: float
    fta: float
    injured: bool = False

    def value(self, field: str) -> float:
        return getattr(self, field)


@dataclass(frozen=True, eq=False)
class PlayerRecord:
    """A player's weekly history plus per-field means over non-injured weeks."""

    player_id: str
    display_name: str
    eligible_positions: tuple[str, ...]
    weeks: tuple[WeeklyLine, ...]
    category_means: dict[str, float]

    @property
    def sampling_weeks(self) -> tuple[WeeklyLine, ...]:
        return tuple(w for w in self.weeks if not w.injured)

    def rate_and_volume(self, made_field: str, att_field: str) -> tuple[float, float]:
        """Mean make rate (total makes over total attempts) and mean weekly attempts."""
        att = self.category_means[att_field]
        made = self.category_means[made_field]
        rate = made / att if att > 0 else 0.0
        return rate, att

    @classmethod
    def from_weeks(
        cls,
        player_id: str,
        display_name: str,
        positions: tuple[str, ...],
        weeks: tuple[WeeklyLine, ...],
    ) -> "PlayerRecord":
        retained = [w for w in weeks if not w.injured]
        if retained:
            means = {f: float(np.mean([w.value(f) for w in retained])) for f in STAT_FIELDS}
        else:
            means = {f: 0.0 for f in STAT_FIELDS}
        return cls(
            player_id=player_id,
            display_name=display_name,
            eligible_positions=tuple(sorted(positions)),
            weeks=tuple(sorted(weeks, key=lambda w: w.week)),
            category_means=means,
        )

    def __eq__(self, other) -> bool:
        if not isinstance(other, PlayerRecord):
            return NotImplemented
        return (
            self.player_id == other.player_id
            and self.display_name == other.display_name
            and self.eligible_positions == other.eligible_positions
            and self.weeks == other.weeks
        )

    def __hash__(self) -> int:
        return hash(self.player_id)


def _parse_row(row: list[str], line_no: int) -> tuple[WeeklyLine, str, tuple[str, ...]]:
    if len(row) != len(CSV_HEADER):
        raise StatsParseError(f"line {line_no}: expected {len(CSV_HEADER)} columns, got {len(row)}")
    player_id, name, positions_raw = row[0].strip(), row[1], row[2].strip()
    if not player_id:
        raise StatsParseError(f"line {line_no}: empty player_id")
    positions = tuple(p.strip() for p in positions_raw.split("|") if p.strip())
    if not positions or any(p not in POSITIONS for p in positions):
        raise StatsParseError(f"line {line_no}: bad positions field {positions_raw!r}")
    try:
        week = int(row[3])
        games = int(row[4])
        stats = [float(x) for x in row[5:16]]
        injured_raw = int(row[16])
    except ValueError as exc:
        raise StatsParseError(f"line {line_no}: {exc}") from None
    if injured_raw not in (0, 1):
        raise StatsParseError(f"line {line_no}: injured must be 0 or 1")
    if week < 1:
        raise StatsValidationError(f"line {line_no}: week must be >= 1")
    if games < 0 or any(x < 0 for x in stats):
        raise StatsValidationError(f"line {line_no}: negative totals")
    line = WeeklyLine(player_id, week, games, *stats, injured=bool(injured_raw))
    if line.fgm > line.fga:
        raise StatsValidationError(f"line {line_no}: fgm {line.fgm} exceeds fga {line.fga}")
    if line.ftm > line.fta:
        raise StatsValidationError(f"line {line_no}: ftm {line.ftm} exceeds fta {line.fta}")
    if games == 0 and any(line.value(f) != 0 for f in STAT_FIELDS):
        raise StatsValidationError(f"line {line_no}: nonzero totals with games=0")
    return line, name, positions


def load_weekly_stats(path: str | Path, config: LeagueConfig | None = None) -> list[PlayerRecord]:
    """Load a weekly stats CSV into one PlayerRecord per distinct player_id.

    Injured weeks are retained (flagged) but excluded from the per-field means.
    Raw values are stored as-is; direction handling happens at the scoring layer.
    """
    del config  # schema is fixed; config kept for interface symmetry
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise StatsParseError("empty file: missing header") from None
        if header != CSV_HEADER:
            raise StatsParseError(f"bad header: {','.join(header)!r}")
        lines: dict[str, list[WeeklyLine]] = {}
        names: dict[str, str] = {}
        positions: dict[str, tuple[str, ...]] = {}
        for line_no, row in enumerate(reader, start=2):
            if not row:
                continue
            line, name, pos = _parse_row(row, line_no)
            lines.setdefault(line.player_id, []).append(line)
            names.setdefault(line.player_id, name)
            positions.setdefault(line.player_id, pos)
    return [
        PlayerRecord.from_weeks(pid, names[pid], positions[pid], tuple(weeks))
        for pid, weeks in lines.items()
    ]


def write_weekly_stats(records: list[PlayerRecord], path: str | Path) -> None:
    """Serialize records back to the canonical CSV schema (round-trip safe)."""
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(CSV_HEADER)
        for rec in records:
            for wk in rec.weeks:
                writer.writerow(
                    [
                        rec.player_id,
                        rec.display_name,
                        "|".join(rec.eligible_positions),
                        wk.week,
                        wk.games,
                    ]
                    + [_fmt(wk.value(f)) for f in STAT_FIELDS]
                    + [int(wk.injured)]
                )


def _fmt(x: float) -> str:
    return str(int(x)) if float(x).is_integer() else repr(x)


def build_pool(records: list[PlayerRecord], min_weeks: int = 10) -> list[PlayerRecord]:
    """Keep exactly the players with at least ``min_weeks`` non-injured weeks."""
    if min_weeks < 1:
        raise ValueError("min_weeks must be >= 1")
    return [r for r in records if len(r.sampling_weeks) >= min_weeks]


def z_score_totals(pool: list[PlayerRecord], config: LeagueConfig) -> np.ndarray:
    """Static full-pool Z totals (directional), used only for the relevant-set cut.

    Counting categories standardize player means over the pool; percentage
    categories standardize the volume-weighted impact (a_q/a_mu)*(r_q - r_mu).
    """
    n = len(pool)
    totals = np.zeros(n)
    for cat in config.categories:
        if cat.kind == COUNTING:
            vals = np.array([r.category_means[cat.name] for r in pool])
        else:
            made = np.array([r.category_means[cat.made_field] for r in pool])
            att = np.array([r.category_means[cat.att_field] for r in pool])
            att_mu = att.mean()
            total_att = att.sum()
            r_mu = made.sum() / total_att if total_att > 0 else 0.0
            rates = np.divide(made, att, out=np.zeros(n), where=att > 0)
            vals = (att / att_mu) * (rates - r_mu) if att_mu > 0 else np.zeros(n)
        std = vals.std()
        if std > 0:
            totals += cat.sign * (vals - vals.mean()) / std
    return totals


def select_q(pool: list[PlayerRecord], config: LeagueConfig) -> list[PlayerRecord]:
    """Top num_teams*roster_size players by full-pool Z total (the relevant set)."""
    need = config.num_teams * config.roster_size
    if len(pool) < need:
        raise PoolSizeError(f"pool has {len(pool)} players; league needs {need}")
    totals = z_score_totals(pool, config)
    order = sorted(range(len(pool)), key=lambda i: (-totals[i], pool[i].player_id))
    return [pool[i] for i in order[:need]]
