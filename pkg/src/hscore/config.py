"""League configuration: category definitions, roster structure, JSON I/O."""

from __future__ import annotations

import json
from dataclasses import dataclass, field, asdict
from pathlib import Path

COUNTING = "counting"
PERCENTAGE = "percentage"

EACH_CATEGORY = "each_category"
MOST_CATEGORIES = "most_categories"

FORMAT_ALIASES = {
    "ec": EACH_CATEGORY,
    "mc": MOST_CATEGORIES,
    EACH_CATEGORY: EACH_CATEGORY,
    MOST_CATEGORIES: MOST_CATEGORIES,
}

POSITIONS: tuple[str, ...] = ("C", "PG", "SG", "PF", "SF")

# Flex slot kinds and the positions they accept.
FLEX_COVERAGE: dict[str, tuple[str, ...]] = {
    "UTIL": POSITIONS,
    "G": ("PG", "SG"),
    "F": ("PF", "SF"),
}

SLOT_KINDS: tuple[str, ...] = ("UTIL", "G", "F") + POSITIONS

DEFAULT_POSITION_STRUCTURE: tuple[str, ...] = (
    "UTIL", "UTIL", "UTIL",
    "C", "C",
    "G", "G",
    "PG", "SG",
    "F", "F",
    "PF", "SF",
)


@dataclass(frozen=True)
class CategorySpec:
    """One scored category: a raw weekly total or a made/attempt percentage."""

    name: str
    kind: str = COUNTING
    lower_is_better: bool = False
    made_field: str | None = None
    att_field: str | None = None

    def __post_init__(self) -> None:
        if self.kind not in (COUNTING, PERCENTAGE):
            raise ValueError(f"unknown category kind {self.kind!r}")
        if self.kind == PERCENTAGE and not (self.made_field and self.att_field):
            raise ValueError(f"percentage category {self.name!r} needs made/att fields")

    @property
    def sign(self) -> float:
        return -1.0 if self.lower_is_better else 1.0


def default_categories() -> tuple[CategorySpec, ...]:
    """Standard 9-cat set; turnovers are the only lower-is-better category."""
    return (
        CategorySpec("pts"),
        CategorySpec("reb"),
        CategorySpec("ast"),
        CategorySpec("stl"),
        CategorySpec("blk"),
        CategorySpec("tpm"),
        CategorySpec("tov", lower_is_better=True),
        CategorySpec("fg_pct", kind=PERCENTAGE, made_field="fgm", att_field="fga"),
        CategorySpec("ft_pct", kind=PERCENTAGE, made_field="ftm", att_field="fta"),
    )


@dataclass(frozen=True)
class LeagueConfig:
    """Head-to-head league settings; defaults mirror a 12-team 9-cat league."""

    num_teams: int = 12
    roster_size: int = 13
    categories: tuple[CategorySpec, ...] = field(default_factory=default_categories)
    position_structure: tuple[str, ...] = DEFAULT_POSITION_STRUCTURE
    format: str = MOST_CATEGORIES
    weeks_per_season: int = 20
    omega: float = 0.7
    gamma: float = 0.25

    def __post_init__(self) -> None:
        object.__setattr__(self, "categories", tuple(self.categories))
        object.__setattr__(self, "position_structure", tuple(self.position_structure))
        if not self.categories:
            raise ValueError("categories list must be nonempty")
        if len(self.position_structure) != self.roster_size:
            raise ValueError(
                f"position structure has {len(self.position_structure)} slots "
                f"for roster size {self.roster_size}"
            )
        for kind in self.position_structure:
            if kind not in SLOT_KINDS:
                raise ValueError(f"unknown slot kind {kind!r}")
        if self.format not in (EACH_CATEGORY, MOST_CATEGORIES):
            raise ValueError(f"unknown format {self.format!r}")
        if self.num_teams < 2 or self.roster_size < 1:
            raise ValueError("need at least two teams and one roster spot")

    @property
    def num_categories(self) -> int:
        return len(self.categories)

    @property
    def category_names(self) -> tuple[str, ...]:
        return tuple(c.name for c in self.categories)

    def category_index(self, name: str) -> int:
        return self.category_names.index(name)

    def signs(self) -> list[float]:
        return [c.sign for c in self.categories]

    def to_dict(self) -> dict:
        out = asdict(self)
        out["categories"] = [
            {k: v for k, v in asdict(c).items() if v not in (None, False)}
            for c in self.categories
        ]
        out["position_structure"] = list(self.position_structure)
        return out

    @classmethod
    def from_dict(cls, data: dict) -> "LeagueConfig":
        data = dict(data)
        if "categories" in data:
            data["categories"] = tuple(
                c if isinstance(c, CategorySpec) else CategorySpec(**c)
                for c in data["categories"]
            )
        if "format" in data:
            fmt = str(data["format"]).lower()
            if fmt not in FORMAT_ALIASES:
                raise ValueError(f"unknown format {data['format']!r}")
            data["format"] = FORMAT_ALIASES[fmt]
        if "position_structure" in data:
            data["position_structure"] = tuple(data["position_structure"])
        return cls(**data)


def load_league_config(path: str | Path) -> LeagueConfig:
    with open(path, encoding="utf-8") as fh:
        return LeagueConfig.from_dict(json.load(fh))


def dump_league_config(config: LeagueConfig, path: str | Path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(config.to_dict(), fh, indent=2)
        fh.write("\n")
