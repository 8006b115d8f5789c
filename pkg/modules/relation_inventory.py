from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, Iterable, Optional, Tuple

import config
from modules.errors import InventoryMismatchError, ValidationError


@dataclass(frozen=True)
class RelationInventory:
    """Ordered relation identifiers; the `none` sentinel is always last.

    Every worker vector, srs row and score vector in a run indexes against
    this ordering.
    """

    relations: Tuple[str, ...]
    none_label: str = config.NONE_RELATION
    named_count: int = config.NAMED_RELATION_COUNT
    _positions: Dict[str, int] = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        relations = tuple(self.relations)
        object.__setattr__(self, "relations", relations)
        if len(set(relations)) != len(relations):
            seen = set()
            dupes = [r for r in relations if r in seen or seen.add(r)]
            raise ValidationError(f"duplicate relation identifiers: {', '.join(dupes)}")
        if not relations or relations[-1] != self.none_label:
            raise ValidationError(f"relation inventory must end with '{self.none_label}'")
        if len(relations) != self.named_count + 1:
            raise ValidationError(
                f"relation inventory must hold {self.named_count} relations plus '{self.none_label}', "
                f"got {len(relations)} entries"
            )
        object.__setattr__(self, "_positions", {name: i for i, name in enumerate(relations)})

    @property
    def size(self) -> int:
        return len(self.relations)

    @property
    def none_index(self) -> int:
        return len(self.relations) - 1

    @property
    def named(self) -> Tuple[str, ...]:
        """The relations without the `none` sentinel (score vectors use these)."""
        return self.relations[:-1]

    def __len__(self) -> int:
        return len(self.relations)

    def __contains__(self, name: str) -> bool:
        return name in self._positions

    def index(self, name: str) -> int:
        try:
            return self._positions[name]
        except KeyError:
            raise ValidationError(f"unknown relation '{name}'") from None

    def named_index(self, name: str) -> int:
        idx = self.index(name)
        if idx == self.none_index:
            raise ValidationError(f"'{self.none_label}' is not a scored relation")
        return idx

    def check_same(self, relations: Iterable[str], source: Optional[str] = None) -> None:
        other = tuple(relations)
        if other != self.relations and other != self.named:
            where = f" in {source}" if source else ""
            raise InventoryMismatchError(
                f"relation inventory mismatch{where}: expected {list(self.relations)}, got {list(other)}"
            )


def load_inventory(path: Optional[str] = None) -> RelationInventory:
    """Read one identifier per line; blank lines and '#' comments are skipped."""
    path = path or config.RELATION_INVENTORY_PATH
    text = Path(path).read_text(encoding="utf-8")
    relations = []
    for line in text.splitlines():
        name = line.strip()
        if not name or name.startswith("#"):
            continue
        relations.append(name)
    try:
        return RelationInventory(tuple(relations))
    except ValidationError as e:
        raise ValidationError(str(e), path=str(path)) from None
