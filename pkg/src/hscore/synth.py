"""Synthetic player pools with NBA-flavored weekly statistics.

Licensed weekly NBA data cannot ship with the package, so experiments run on
generated pools: player means follow position archetypes scaled by a shared
talent factor (which correlates the volume categories), weekly counting totals
are Poisson draws, and shooting lines are binomial draws at player-level rates.
"""

from __future__ import annotations

import numpy as np

from .config import POSITIONS
from .ingest import PlayerRecord, WeeklyLine

# Per-game archetype means: reb, ast, stl, blk, tpm, tov, fga, fg%, fta, ft%
_ARCHETYPES = {
    "C":  dict(reb=9.0, ast=1.8, stl=0.7, blk=1.6, tpm=0.4, tov=1.7, fga=9.5, fgp=0.55, fta=3.6, ftp=0.70),
    "PF": dict(reb=7.0, ast=2.2, stl=0.9, blk=1.0, tpm=1.1, tov=1.6, fga=10.0, fgp=0.50, fta=3.0, ftp=0.76),
    "SF": dict(reb=5.5, ast=2.8, stl=1.0, blk=0.5, tpm=1.6, tov=1.6, fga=11.0, fgp=0.46, fta=2.8, ftp=0.80),
    "SG": dict(reb=4.0, ast=3.2, stl=1.1, blk=0.3, tpm=2.0, tov=1.7, fga=12.0, fgp=0.44, fta=2.6, ftp=0.82),
    "PG": dict(reb=3.5, ast=6.0, stl=1.3, blk=0.2, tpm=1.8, tov=2.2, fga=11.0, fgp=0.44, fta=2.8, ftp=0.84),
}

_NEIGHBORS = {
    "C": ("PF",),
    "PF": ("C", "SF"),
    "SF": ("PF", "SG"),
    "SG": ("SF", "PG"),
    "PG": ("SG",),
}

# Cross-player log-scale spread per volume stat (rough NBA-like dispersion).
_SPREAD = dict(reb=0.35, ast=0.45, stl=0.30, blk=0.55, tpm=0.50, tov=0.25, fga=0.25, fta=0.40)


def synthetic_pool(
    n_players: int = 200,
    n_weeks: int = 26,
    seed: int = 0,
    injury_rate: float = 0.05,
) -> list[PlayerRecord]:
    """Deterministic synthetic pool; points derive from the generated shooting."""
    rng = np.random.default_rng(seed)
    records = []
    for i in range(n_players):
        base_pos = POSITIONS[int(rng.integers(len(POSITIONS)))]
        positions = [base_pos]
        if rng.random() < 0.6:
            neighbors = _NEIGHBORS[base_pos]
            extra = neighbors[int(rng.integers(len(neighbors)))]
            positions.append(extra)
            if rng.random() < 0.2:
                more = [p for p in _NEIGHBORS[extra] if p not in positions]
                if more:
                    positions.append(more[int(rng.integers(len(more)))])
        talent = float(np.exp(rng.normal(0.0, 0.30)))
        arch = _ARCHETYPES[base_pos]
        means = {
            stat: arch[stat] * talent * float(np.exp(rng.normal(0.0, _SPREAD[stat])))
            for stat in _SPREAD
        }
        fg_rate = float(np.clip(arch["fgp"] + rng.normal(0.0, 0.04), 0.36, 0.65))
        ft_rate = float(np.clip(arch["ftp"] + rng.normal(0.0, 0.07), 0.45, 0.95))
        weeks = []
        for week in range(1, n_weeks + 1):
            if rng.random() < injury_rate:
                weeks.append(
                    WeeklyLine(f"p{i:03d}", week, 0, *([0.0] * 11), injured=True)
                )
                continue
            games = int(rng.choice([2, 3, 4], p=[0.15, 0.55, 0.30]))
            draws = {
                stat: float(rng.poisson(games * means[stat])) for stat in _SPREAD
            }
            fga = draws["fga"]
            fgm = float(rng.binomial(int(fga), fg_rate)) if fga > 0 else 0.0
            fta = draws["fta"]
            ftm = float(rng.binomial(int(fta), ft_rate)) if fta > 0 else 0.0
            tpm = min(draws["tpm"], fgm)
            pts = 2.0 * (fgm - tpm) + 3.0 * tpm + ftm
            weeks.append(
                WeeklyLine(
                    f"p{i:03d}", week, games,
                    pts, draws["reb"], draws["ast"], draws["stl"], draws["blk"],
                    tpm, draws["tov"], fgm, fga, ftm, fta,
                )
            )
        records.append(
            PlayerRecord.from_weeks(f"p{i:03d}", f"Player {i:03d}", tuple(positions), tuple(weeks))
        )
    return records
