"""Control catalogue model and the two interchangeable file formats.

A catalogue lists assets, atomic controls with cost and mandatory flag,
dependency rules between controls, and the effectiveness of each control
toward each (asset, objective) pair. A cell may carry several candidate
ratings when the analyst is unsure; resolving every uncertain cell to a
single rating yields a *case*, and downstream play happens per case.

Canonical formats are a two-header-row CSV (assets span their C/I/A
columns) and an equivalent JSON document. Spreadsheets are out of scope.
"""

from __future__ import annotations

import csv
import hashlib
import io
import itertools
import json
import re
from dataclasses import dataclass, field
from decimal import Decimal, InvalidOperation
from enum import Enum
from fractions import Fraction
from functools import cached_property
from typing import Any, Mapping

from .algebra import (
    Atom,
    FamilyTerm,
    ONE,
    RequirementRule,
    compose,
    is_valid_control_id,
    opt,
)
from .errors import (
    CaseLimitExceeded,
    DuplicateControl,
    ParseError,
    UnknownControl,
    UnknownControlInDependency,
    UnknownRating,
)

OBJECTIVES = ("C", "I", "A")

DEFAULT_CASE_LIMIT = 4096

_FIXED_HEADERS = ("Control", "Cost", "Mandatory", "Requires")

_ID_RUNS = re.compile(r"\d+|\D+")


def control_sort_key(control_id: str) -> tuple:
    """Family prefix first, numeric suffixes compared as numbers.

    Sorts AC-2 before AC-12 and AC-* before AU-*.
    """
    return tuple(
        (1, int(run)) if run.isdigit() else (0, run)
        for run in _ID_RUNS.findall(control_id)
    )


def sorted_ids(ids) -> tuple[str, ...]:
    return tuple(sorted(ids, key=control_sort_key))


def combo_sort_key(combo) -> tuple:
    return tuple(control_sort_key(c) for c in sorted_ids(combo))


class Rating(Enum):
    """Qualitative effectiveness levels and their exact numeric values.

    No label maps to 1: a single control never fully protects an objective.
    """

    NONE = "None"
    LOW = "Low"
    MEDIUM = "Medium"
    HIGH = "High"
    VERY_HIGH = "VeryHigh"

    @property
    def score(self) -> Fraction:
        return _RATING_SCORES[self]

    @property
    def label(self) -> str:
        return self.value


_RATING_SCORES = {
    Rating.NONE: Fraction(0),
    Rating.LOW: Fraction(1, 5),
    Rating.MEDIUM: Fraction(1, 2),
    Rating.HIGH: Fraction(4, 5),
    Rating.VERY_HIGH: Fraction(9, 10),
}

_RATING_BY_LABEL = {r.value: r for r in Rating}


def rating_from_label(label: str, *, row: int | None = None, column: str | None = None) -> Rating:
    rating = _RATING_BY_LABEL.get(label.strip())
    if rating is None:
        raise UnknownRating(f"unknown rating {label.strip()!r}", row=row, column=column)
    return rating


@dataclass(frozen=True, slots=True, order=True)
class ObjectiveRef:
    """One attackable surface: a security objective on an asset."""

    asset: str
    objective: str

    def __str__(self) -> str:
        return f"{self.asset}/{self.objective}"


@dataclass(frozen=True, slots=True)
class EffectivenessCell:
    """Candidate ratings for one control on one objective.

    More than one option means the analyst could not settle on a single
    rating; the options keep their file order.
    """

    options: tuple[Rating, ...]

    def __post_init__(self) -> None:
        if not self.options:
            raise ValueError("effectiveness cell needs at least one rating")
        if len(set(self.options)) != len(self.options):
            raise ValueError("effectiveness cell options must be distinct")

    @property
    def is_uncertain(self) -> bool:
        return len(self.options) > 1

    @property
    def sole(self) -> Rating:
        if self.is_uncertain:
            raise ValueError("cell is uncertain; resolve it through a case")
        return self.options[0]


@dataclass(frozen=True)
class ControlEntry:
    """One atomic control row of the catalogue."""

    id: str
    cost: Decimal
    mandatory: bool
    requires: tuple[RequirementRule, ...] = ()
    effectiveness: Mapping[ObjectiveRef, EffectivenessCell] = field(default_factory=dict)
    name: str = ""

    def __post_init__(self) -> None:
        if not is_valid_control_id(self.id):
            raise ValueError(f"invalid control id: {self.id!r}")
        if self.cost < 0:
            raise ValueError(f"control {self.id}: cost must be non-negative")
        for rule in self.requires:
            if rule.antecedent != self.id:
                raise ValueError(
                    f"control {self.id}: requirement rule belongs to {rule.antecedent}"
                )

    def cell(self, ref: ObjectiveRef) -> EffectivenessCell | None:
        return self.effectiveness.get(ref)


@dataclass(frozen=True)
class ControlCatalogue:
    """All controls and assets of one specification file, in file order."""

    assets: tuple[str, ...]
    controls: tuple[ControlEntry, ...]

    def __post_init__(self) -> None:
        if not self.assets:
            raise ValueError("catalogue needs at least one asset")
        if len(set(self.assets)) != len(self.assets):
            raise ValueError("asset names must be unique")
        ids = [c.id for c in self.controls]
        dupes = {i for i in ids if ids.count(i) > 1}
        if dupes:
            raise DuplicateControl(", ".join(sorted(dupes)))
        known = set(ids)
        assets = set(self.assets)
        for entry in self.controls:
            for rule in entry.requires:
                missing = rule.consequent - known
                if missing:
                    raise UnknownControlInDependency(
                        f"control {entry.id} requires unknown control(s): "
                        + ", ".join(sorted(missing))
                    )
            for ref in entry.effectiveness:
                if ref.asset not in assets:
                    raise ValueError(
                        f"control {entry.id}: unknown asset {ref.asset!r}"
                    )
                if ref.objective not in OBJECTIVES:
                    raise ValueError(
                        f"control {entry.id}: unknown objective {ref.objective!r}"
                    )

    @cached_property
    def _by_id(self) -> Mapping[str, ControlEntry]:
        return {c.id: c for c in self.controls}

    def __contains__(self, control_id: str) -> bool:
        return control_id in self._by_id

    def entry(self, control_id: str) -> ControlEntry:
        try:
            return self._by_id[control_id]
        except KeyError:
            raise UnknownControl(control_id) from None

    @property
    def rules(self) -> tuple[RequirementRule, ...]:
        return tuple(r for c in self.controls for r in c.requires)

    @property
    def mandatory_ids(self) -> tuple[str, ...]:
        return tuple(c.id for c in self.controls if c.mandatory)

    @property
    def optional_ids(self) -> tuple[str, ...]:
        return tuple(c.id for c in self.controls if not c.mandatory)

    @property
    def objective_refs(self) -> tuple[ObjectiveRef, ...]:
        return tuple(
            ObjectiveRef(asset, obj) for asset in self.assets for obj in OBJECTIVES
        )

    def uncertain_cells(self) -> tuple[tuple[str, ObjectiveRef, EffectivenessCell], ...]:
        """Uncertain cells in canonical order.

        Controls keep file order; within a control, cells follow asset
        order then objective order C, I, A.
        """
        found = []
        for entry in self.controls:
            for ref in self.objective_refs:
                cell = entry.effectiveness.get(ref)
                if cell is not None and cell.is_uncertain:
                    found.append((entry.id, ref, cell))
        return tuple(found)

    def digest(self) -> str:
        canonical = json.dumps(
            catalogue_to_json_obj(self), sort_keys=True, separators=(",", ":")
        )
        return hashlib.sha256(canonical.encode("utf-8")).hexdigest()


@dataclass(frozen=True)
class Case:
    """One resolution of every uncertain cell to a single rating.

    ``index`` is the 1-based position in enumeration order.
    """

    index: int
    assignment: tuple[tuple[str, ObjectiveRef, Rating], ...] = ()

    @cached_property
    def _lookup(self) -> Mapping[tuple[str, ObjectiveRef], Rating]:
        return {(cid, ref): rating for cid, ref, rating in self.assignment}

    def rating_for(self, control_id: str, ref: ObjectiveRef) -> Rating | None:
        return self._lookup.get((control_id, ref))


def enumerate_cases(
    cat: ControlCatalogue, limit: int = DEFAULT_CASE_LIMIT
) -> tuple[Case, ...]:
    """All resolutions of the catalogue's uncertain cells, in row-major order.

    The first uncertain cell varies slowest. A catalogue without
    uncertainty yields a single empty case.
    """
    cells = cat.uncertain_cells()
    total = 1
    for _, _, cell in cells:
        total *= len(cell.options)
    if total > limit:
        raise CaseLimitExceeded(f"{total} cases exceed the limit of {limit}")
    cases = []
    for i, picks in enumerate(itertools.product(*[c.options for _, _, c in cells])):
        assignment = tuple(
            (cid, ref, rating) for (cid, ref, _), rating in zip(cells, picks)
        )
        cases.append(Case(index=i + 1, assignment=assignment))
    return tuple(cases)


def family_of(cat: ControlCatalogue) -> FamilyTerm:
    """The catalogue's control family: mandatory controls composed with
    the optional ones wrapped as free choices, all in file order."""
    term: FamilyTerm = ONE
    for control_id in cat.mandatory_ids:
        term = compose(term, Atom(control_id)) if term is not ONE else Atom(control_id)
    optional = opt(cat.optional_ids)
    if term is ONE:
        return optional
    if optional is ONE or not cat.optional_ids:
        return term
    return compose(term, optional)


# ---------------------------------------------------------------------------
# Parsing and serialization
# ---------------------------------------------------------------------------


def format_decimal(value: Decimal) -> str:
    """Plain decimal string without exponent or trailing zeros."""
    return format(value.normalize(), "f")


def _parse_cost(text: str, *, row: int | None = None, path: str | None = None) -> Decimal:
    where = {"row": row, "column": "Cost"} if row is not None else {"column": path}
    try:
        cost = Decimal(text.strip())
    except InvalidOperation:
        raise ParseError(f"cost {text.strip()!r} is not a decimal", **where) from None
    if not cost.is_finite():
        raise ParseError(f"cost {text.strip()!r} is not finite", **where)
    if cost < 0:
        raise ParseError("cost must be non-negative", **where)
    if -cost.as_tuple().exponent > 2:
        raise ParseError("cost carries more than 2 fractional digits", **where)
    return cost


def _parse_requires(text: str, antecedent: str, *, row: int | None = None) -> tuple[RequirementRule, ...]:
    rules = []
    for chunk in text.split(";"):
        chunk = chunk.strip()
        if not chunk:
            continue
        atoms = [a.strip() for a in chunk.split("+")]
        if any(not is_valid_control_id(a) for a in atoms):
            raise ParseError(
                f"bad dependency product {chunk!r}", row=row, column="Requires"
            )
        try:
            rules.append(RequirementRule(antecedent, frozenset(atoms)))
        except ValueError as exc:
            raise ParseError(str(exc), row=row, column="Requires") from None
    return tuple(rules)


def _parse_cell(
    text: str, *, row: int | None = None, column: str | None = None
) -> EffectivenessCell | None:
    """Parse one effectiveness cell; empty and plain ``None`` mean absent."""
    text = text.strip()
    if not text:
        return None
    options = tuple(
        rating_from_label(part, row=row, column=column) for part in text.split("|")
    )
    if len(set(options)) != len(options):
        raise ParseError("duplicate ratings in cell", row=row, column=column)
    if options == (Rating.NONE,):
        return None
    return EffectivenessCell(options)


def parse_catalogue_csv(text: str) -> ControlCatalogue:
    rows = list(csv.reader(io.StringIO(text)))
    if len(rows) < 2:
        raise ParseError("expected two header rows", row=1)
    head, objs = rows[0], rows[1]
    for i, name in enumerate(_FIXED_HEADERS):
        if i >= len(head) or head[i].strip() != name:
            raise ParseError(
                f"header cell {i + 1} must be {name!r}", row=1, column=name
            )

    # Assets span their objective columns; blank cells continue the span.
    assets: list[str] = []
    column_refs: list[ObjectiveRef] = []
    span = 0
    for j in range(4, max(len(head), len(objs))):
        h = head[j].strip() if j < len(head) else ""
        o = objs[j].strip() if j < len(objs) else ""
        if h:
            if assets and span != len(OBJECTIVES):
                raise ParseError(
                    f"asset {assets[-1]!r} must span columns {','.join(OBJECTIVES)}",
                    row=1,
                    column=h,
                )
            if h in assets:
                raise ParseError(f"duplicate asset {h!r}", row=1, column=h)
            assets.append(h)
            span = 0
        if not assets:
            raise ParseError("objective column before any asset", row=1)
        expected = OBJECTIVES[span] if span < len(OBJECTIVES) else None
        if o != expected:
            raise ParseError(
                f"expected objective {expected!r} under asset {assets[-1]!r}, got {o!r}",
                row=2,
                column=assets[-1],
            )
        column_refs.append(ObjectiveRef(assets[-1], o))
        span += 1
    if not assets:
        raise ParseError("catalogue needs at least one asset", row=1)
    if span != len(OBJECTIVES):
        raise ParseError(
            f"asset {assets[-1]!r} must span columns {','.join(OBJECTIVES)}", row=1
        )
    if any(c.strip() for c in objs[:4]):
        raise ParseError("cells under the fixed headers must stay blank", row=2)

    width = 4 + len(column_refs)
    entries: list[ControlEntry] = []
    seen: set[str] = set()
    for idx, cells in enumerate(rows[2:], start=3):
        if not any(c.strip() for c in cells):
            continue
        if len(cells) > width and any(c.strip() for c in cells[width:]):
            raise ParseError("row wider than the header", row=idx)
        cells = list(cells) + [""] * (width - len(cells))
        control_id = cells[0].strip()
        if not is_valid_control_id(control_id):
            raise ParseError(
                f"invalid control id {control_id!r}", row=idx, column="Control"
            )
        if control_id in seen:
            raise DuplicateControl(f"{control_id} (row {idx})")
        seen.add(control_id)
        cost = _parse_cost(cells[1], row=idx)
        flag = cells[2].strip().lower()
        if flag not in ("true", "false"):
            raise ParseError(
                f"mandatory flag must be true or false, got {cells[2].strip()!r}",
                row=idx,
                column="Mandatory",
            )
        requires = _parse_requires(cells[3], control_id, row=idx)
        effectiveness: dict[ObjectiveRef, EffectivenessCell] = {}
        for ref, raw in zip(column_refs, cells[4:]):
            cell = _parse_cell(raw, row=idx, column=str(ref))
            if cell is not None:
                effectiveness[ref] = cell
        entries.append(
            ControlEntry(
                id=control_id,
                cost=cost,
                mandatory=flag == "true",
                requires=requires,
                effectiveness=effectiveness,
            )
        )
    try:
        return ControlCatalogue(assets=tuple(assets), controls=tuple(entries))
    except ValueError as exc:
        raise ParseError(str(exc)) from None


def parse_catalogue_json(text: str) -> ControlCatalogue:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"invalid JSON: {exc}") from None
    if not isinstance(doc, dict):
        raise ParseError("top level must be an object")
    assets = doc.get("assets")
    if not isinstance(assets, list) or not all(isinstance(a, str) for a in assets):
        raise ParseError("'assets' must be a list of strings", column="assets")
    controls_doc = doc.get("controls")
    if not isinstance(controls_doc, list):
        raise ParseError("'controls' must be a list", column="controls")

    entries = []
    for i, item in enumerate(controls_doc):
        path = f"controls[{i}]"
        if not isinstance(item, dict):
            raise ParseError("control must be an object", column=path)
        control_id = item.get("id")
        if not isinstance(control_id, str) or not is_valid_control_id(control_id):
            raise ParseError(f"invalid control id {control_id!r}", column=path)
        cost_raw = item.get("cost")
        if isinstance(cost_raw, int) and not isinstance(cost_raw, bool):
            cost_raw = str(cost_raw)
        if not isinstance(cost_raw, str):
            raise ParseError(
                "cost must be a decimal string", column=f"{path}.cost"
            )
        cost = _parse_cost(cost_raw, path=f"{path}.cost")
        mandatory = item.get("mandatory", False)
        if not isinstance(mandatory, bool):
            raise ParseError("mandatory must be a boolean", column=f"{path}.mandatory")
        name = item.get("name", "")
        if not isinstance(name, str):
            raise ParseError("name must be a string", column=f"{path}.name")

        requires: list[RequirementRule] = []
        for j, product in enumerate(item.get("requires", [])):
            rpath = f"{path}.requires[{j}]"
            if not isinstance(product, list) or not all(
                isinstance(a, str) for a in product
            ):
                raise ParseError("dependency must be a list of ids", column=rpath)
            try:
                requires.append(RequirementRule(control_id, frozenset(product)))
            except ValueError as exc:
                raise ParseError(str(exc), column=rpath) from None

        effectiveness: dict[ObjectiveRef, EffectivenessCell] = {}
        eff_doc = item.get("effectiveness", {})
        if not isinstance(eff_doc, dict):
            raise ParseError("effectiveness must be an object", column=f"{path}.effectiveness")
        for asset, per_obj in eff_doc.items():
            if not isinstance(per_obj, dict):
                raise ParseError(
                    "per-asset effectiveness must be an object",
                    column=f"{path}.effectiveness.{asset}",
                )
            for obj, labels in per_obj.items():
                cpath = f"{path}.effectiveness.{asset}.{obj}"
                if obj not in OBJECTIVES:
                    raise ParseError(f"unknown objective {obj!r}", column=cpath)
                if isinstance(labels, str):
                    labels = [labels]
                if not isinstance(labels, list) or not labels:
                    raise ParseError("cell must be a non-empty list", column=cpath)
                options = tuple(
                    rating_from_label(str(lbl), column=cpath) for lbl in labels
                )
                if len(set(options)) != len(options):
                    raise ParseError("duplicate ratings in cell", column=cpath)
                if options != (Rating.NONE,):
                    effectiveness[ObjectiveRef(asset, obj)] = EffectivenessCell(options)

        entries.append(
            ControlEntry(
                id=control_id,
                cost=cost,
                mandatory=mandatory,
                requires=tuple(requires),
                effectiveness=effectiveness,
                name=name,
            )
        )
    try:
        return ControlCatalogue(assets=tuple(assets), controls=tuple(entries))
    except ValueError as exc:
        raise ParseError(str(exc)) from None


def parse_catalogue(source: str | bytes, format: str) -> ControlCatalogue:
    """Parse a catalogue document; ``format`` is ``"csv"`` or ``"json"``."""
    text = source.decode("utf-8") if isinstance(source, bytes) else source
    fmt = format.lower()
    if fmt == "csv":
        return parse_catalogue_csv(text)
    if fmt == "json":
        return parse_catalogue_json(text)
    raise ValueError(f"unknown catalogue format {format!r}")


def _cell_to_labels(cell: EffectivenessCell) -> list[str]:
    return [r.label for r in cell.options]


def catalogue_to_json_obj(cat: ControlCatalogue) -> dict[str, Any]:
    controls = []
    for entry in cat.controls:
        eff: dict[str, dict[str, list[str]]] = {}
        for asset in cat.assets:
            per_obj = {
                obj: _cell_to_labels(entry.effectiveness[ObjectiveRef(asset, obj)])
                for obj in OBJECTIVES
                if ObjectiveRef(asset, obj) in entry.effectiveness
            }
            if per_obj:
                eff[asset] = per_obj
        item: dict[str, Any] = {
            "id": entry.id,
            "cost": format_decimal(entry.cost),
            "mandatory": entry.mandatory,
            "requires": [sorted(r.consequent) for r in entry.requires],
            "effectiveness": eff,
        }
        if entry.name:
            item["name"] = entry.name
        controls.append(item)
    return {"assets": list(cat.assets), "controls": controls}


def serialize_catalogue_json(cat: ControlCatalogue) -> str:
    return json.dumps(catalogue_to_json_obj(cat), indent=2) + "\n"


def serialize_catalogue_csv(cat: ControlCatalogue) -> str:
    out = io.StringIO()
    writer = csv.writer(out, lineterminator="\n")
    head = list(_FIXED_HEADERS)
    objs = ["", "", "", ""]
    for asset in cat.assets:
        head.extend([asset] + [""] * (len(OBJECTIVES) - 1))
        objs.extend(OBJECTIVES)
    writer.writerow(head)
    writer.writerow(objs)
    for entry in cat.controls:
        requires = ";".join(
            "+".join(sorted(rule.consequent)) for rule in entry.requires
        )
        row = [
            entry.id,
            format_decimal(entry.cost),
            "true" if entry.mandatory else "false",
            requires,
        ]
        for asset in cat.assets:
            for obj in OBJECTIVES:
                cell = entry.effectiveness.get(ObjectiveRef(asset, obj))
                row.append("|".join(_cell_to_labels(cell)) if cell else "")
        writer.writerow(row)
    return out.getvalue()


def serialize_catalogue(cat: ControlCatalogue, format: str) -> str:
    fmt = format.lower()
    if fmt == "csv":
        return serialize_catalogue_csv(cat)
    if fmt == "json":
        return serialize_catalogue_json(cat)
    raise ValueError(f"unknown catalogue format {format!r}")
