"""Set-valued instances of a schema and the checks that make them honest.

An instance assigns a finite set of elements to every box and a total function
table to every arrow.  Everything here is deterministic: element order is
canonical (natural key), counterexamples are lexicographically first, and the
isomorphism search re-verifies any map it finds before reporting success.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

from .diagnostics import Diagnostic, error
from .errors import (
    CospanMismatchError,
    ElementNotInSourceError,
    SchemaMismatchError,
)
from .graphs import Graph
from .ordering import natural_key
from .schema import FiberProductDecl, OlogSchema, Path, PathEquation, path_endpoints

__all__ = [
    "RealPayload",
    "PairPayload",
    "GraphPayload",
    "TextPayload",
    "Payload",
    "payload_type_name",
    "Instance",
    "validate_instance",
    "eval_path",
    "EquationReport",
    "check_equation",
    "check_all_equations",
    "compute_pullback",
    "FiberProductReport",
    "verify_fiber_product",
    "verify_all_fiber_products",
    "IsoOutcome",
    "IsoResult",
    "check_instance_isomorphism",
    "verify_isomorphism",
]


# ---------------------------------------------------------------------------
# payloads
# ---------------------------------------------------------------------------


def _as_extended_real(value: object, what: str) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise TypeError(f"{what} needs a number, got {value!r}")
    result = float(value)
    if math.isnan(result):
        raise ValueError(f"{what} cannot be NaN")
    return result


@dataclass(frozen=True, slots=True)
class RealPayload:
    """An extended-real value; infinities are representable, NaN is not."""

    value: float

    def __post_init__(self) -> None:
        object.__setattr__(self, "value", _as_extended_real(self.value, "real payload"))


@dataclass(frozen=True, slots=True)
class PairPayload:
    """An ordered pair of extended-real values."""

    first: float
    second: float

    def __post_init__(self) -> None:
        object.__setattr__(self, "first", _as_extended_real(self.first, "pair payload"))
        object.__setattr__(self, "second", _as_extended_real(self.second, "pair payload"))


@dataclass(frozen=True, slots=True)
class GraphPayload:
    """A directed graph value."""

    graph: Graph


@dataclass(frozen=True, slots=True)
class TextPayload:
    """A free-text value."""

    text: str


Payload = RealPayload | PairPayload | GraphPayload | TextPayload


def payload_type_name(payload: Payload | None) -> str:
    if payload is None:
        return "none"
    return {
        RealPayload: "real",
        PairPayload: "pair",
        GraphPayload: "graph",
        TextPayload: "text",
    }[type(payload)]


# ---------------------------------------------------------------------------
# instances
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Instance:
    """A finite set-valued model of a schema.

    ``sets`` maps box id -> {element id -> optional payload}; ``functions``
    maps arrow id -> {element id -> element id}.  Boxes or arrows absent from
    the dicts are treated as empty, which :func:`validate_instance` flags
    unless the source set is itself empty.
    """

    name: str
    schema_name: str
    sets: dict[str, dict[str, Payload | None]] = field(default_factory=dict)
    functions: dict[str, dict[str, str]] = field(default_factory=dict)

    def elements(self, box_id: str) -> dict[str, Payload | None]:
        return self.sets.get(box_id, {})

    def table(self, arrow_id: str) -> dict[str, str]:
        return self.functions.get(arrow_id, {})

    def canonical(self) -> "Instance":
        """Same instance with sorted keys and empty tables dropped."""
        sets = {
            box_id: {eid: elems[eid] for eid in sorted(elems, key=natural_key)}
            for box_id, elems in sorted(
                self.sets.items(), key=lambda kv: natural_key(kv[0])
            )
            if elems
        }
        functions = {
            arrow_id: {eid: table[eid] for eid in sorted(table, key=natural_key)}
            for arrow_id, table in sorted(
                self.functions.items(), key=lambda kv: natural_key(kv[0])
            )
            if table
        }
        return Instance(self.name, self.schema_name, sets, functions)


def validate_instance(schema: OlogSchema, instance: Instance) -> list[Diagnostic]:
    """Structural diagnostics: unknown ids, partial or ill-targeted tables.

    Raises SchemaMismatchError when the instance names a different schema.
    """
    if instance.schema_name != schema.name:
        raise SchemaMismatchError(
            f"instance {instance.name!r} targets schema {instance.schema_name!r}, "
            f"not {schema.name!r}"
        )
    diags: list[Diagnostic] = []

    for box_id in instance.sets:
        if schema.box(box_id) is None:
            diags.append(
                error("UNKNOWN_BOX", f"instance populates undeclared box {box_id!r}", box_id)
            )
    for arrow_id in instance.functions:
        if schema.arrow(arrow_id) is None:
            diags.append(
                error(
                    "UNKNOWN_ARROW",
                    f"instance populates undeclared arrow {arrow_id!r}",
                    arrow_id,
                )
            )

    for box in schema.boxes:
        types = {
            payload_type_name(p)
            for p in instance.elements(box.id).values()
            if p is not None
        }
        if len(types) > 1:
            diags.append(
                error(
                    "PAYLOAD_MIXED",
                    f"box {box.id} mixes payload types: {', '.join(sorted(types))}",
                    box.id,
                )
            )

    for arrow in schema.arrows:
        table = instance.table(arrow.id)
        source = instance.elements(arrow.src)
        target = instance.elements(arrow.dst)
        for eid in sorted(source, key=natural_key):
            if eid not in table:
                diags.append(
                    error(
                        "MISSING_IMAGE",
                        f"arrow {arrow.id} has no image for element {eid!r} of {arrow.src}",
                        f"{arrow.id}/{eid}",
                    )
                )
        for eid in sorted(table, key=natural_key):
            if eid not in source:
                diags.append(
                    error(
                        "UNKNOWN_ELEMENT",
                        f"arrow {arrow.id} maps {eid!r}, which is not in {arrow.src}",
                        f"{arrow.id}/{eid}",
                    )
                )
            elif table[eid] not in target:
                diags.append(
                    error(
                        "IMAGE_NOT_IN_TARGET",
                        f"arrow {arrow.id} sends {eid!r} to {table[eid]!r}, "
                        f"which is not in {arrow.dst}",
                        f"{arrow.id}/{eid}",
                    )
                )
    return diags


def eval_path(schema: OlogSchema, instance: Instance, path: Path, element: str) -> str:
    """Evaluate a path on one element by chasing arrow tables left to right."""
    path_endpoints(schema, path)  # raises MalformedPathError on bad paths
    if element not in instance.elements(path.start):
        raise ElementNotInSourceError(f"element {element!r} is not in box {path.start}")
    at = element
    for arrow_id in path.arrows:
        table = instance.table(arrow_id)
        if at not in table:
            raise ElementNotInSourceError(
                f"arrow {arrow_id} is undefined on element {at!r}"
            )
        at = table[at]
    return at


# ---------------------------------------------------------------------------
# equation checking
# ---------------------------------------------------------------------------


@dataclass(frozen=True, slots=True)
class EquationReport:
    """Outcome of checking one path equation over every element of its start box.

    On failure ``witness`` is (element, lhs image, rhs image) for the
    lexicographically first offending element.
    """

    equation: PathEquation
    holds: bool
    checked: int
    witness: tuple[str, str, str] | None = None

    @property
    def verdict(self) -> str:
        return "AllHold" if self.holds else "Counterexample"


def check_equation(
    schema: OlogSchema, instance: Instance, equation: PathEquation
) -> EquationReport:
    elems = sorted(instance.elements(equation.lhs.start), key=natural_key)
    checked = 0
    for eid in elems:
        lhs_val = eval_path(schema, instance, equation.lhs, eid)
        rhs_val = eval_path(schema, instance, equation.rhs, eid)
        checked += 1
        if lhs_val != rhs_val:
            return EquationReport(
                equation, holds=False, checked=checked, witness=(eid, lhs_val, rhs_val)
            )
    return EquationReport(equation, holds=True, checked=checked)


def check_all_equations(schema: OlogSchema, instance: Instance) -> list[EquationReport]:
    return [check_equation(schema, instance, eq) for eq in schema.equations]


# ---------------------------------------------------------------------------
# fiber products
# ---------------------------------------------------------------------------


def compute_pullback(
    schema: OlogSchema, instance: Instance, leg1: str, leg2: str
) -> list[tuple[str, str]]:
    """All pairs (x, y) with leg1(x) = leg2(y), in lexicographic order.

    The legs must form a cospan (same target box); raises CospanMismatchError
    otherwise.
    """
    decl1 = schema.arrow(leg1)
    decl2 = schema.arrow(leg2)
    if decl1 is None or decl2 is None:
        missing = leg1 if decl1 is None else leg2
        raise CospanMismatchError(f"arrow {missing!r} is not declared")
    if decl1.dst != decl2.dst:
        raise CospanMismatchError(
            f"legs do not form a cospan: {leg1} ends at {decl1.dst}, "
            f"{leg2} ends at {decl2.dst}"
        )
    table1 = instance.table(leg1)
    table2 = instance.table(leg2)
    xs = sorted(instance.elements(decl1.src), key=natural_key)
    ys = sorted(instance.elements(decl2.src), key=natural_key)
    pairs: list[tuple[str, str]] = []
    for x in xs:
        fx = table1.get(x)
        if fx is None:
            continue
        for y in ys:
            if table2.get(y) == fx:
                pairs.append((x, y))
    return pairs


@dataclass(frozen=True, slots=True)
class FiberProductReport:
    """Whether a declared fiber-product apex is the canonical pullback.

    ``witness_kind`` on failure is one of COLLIDING_PAIR (two apex elements
    project to the same pair), MISSING_PAIR (a canonical pair no apex element
    projects to), or EXTRA_PAIR (an apex element projecting outside the
    canonical pullback, i.e. its square does not commute).
    """

    declaration: FiberProductDecl
    holds: bool
    apex_size: int
    pullback_size: int
    witness_kind: str | None = None
    witness: tuple[str, ...] = ()

    @property
    def verdict(self) -> str:
        return "PASS" if self.holds else "FAIL"


def verify_fiber_product(
    schema: OlogSchema, instance: Instance, decl: FiberProductDecl
) -> FiberProductReport:
    canonical = compute_pullback(schema, instance, decl.leg1, decl.leg2)
    canonical_set = set(canonical)
    proj1 = instance.table(decl.proj1)
    proj2 = instance.table(decl.proj2)
    apex_elems = sorted(instance.elements(decl.apex), key=natural_key)

    seen: dict[tuple[str, str], str] = {}
    for eid in apex_elems:
        pair = (proj1.get(eid, ""), proj2.get(eid, ""))
        if pair in seen:
            return FiberProductReport(
                decl,
                holds=False,
                apex_size=len(apex_elems),
                pullback_size=len(canonical),
                witness_kind="COLLIDING_PAIR",
                witness=(seen[pair], eid),
            )
        seen[pair] = eid
        if pair not in canonical_set:
            return FiberProductReport(
                decl,
                holds=False,
                apex_size=len(apex_elems),
                pullback_size=len(canonical),
                witness_kind="EXTRA_PAIR",
                witness=(eid,) + pair,
            )
    for pair in canonical:
        if pair not in seen:
            return FiberProductReport(
                decl,
                holds=False,
                apex_size=len(apex_elems),
                pullback_size=len(canonical),
                witness_kind="MISSING_PAIR",
                witness=pair,
            )
    return FiberProductReport(
        decl, holds=True, apex_size=len(apex_elems), pullback_size=len(canonical)
    )


def verify_all_fiber_products(
    schema: OlogSchema, instance: Instance
) -> list[FiberProductReport]:
    return [verify_fiber_product(schema, instance, fp) for fp in schema.fiber_products]


# ---------------------------------------------------------------------------
# instance isomorphism
# ---------------------------------------------------------------------------


class IsoOutcome(enum.Enum):
    FOUND = "Found"
    NOT_FOUND = "NotFound"


@dataclass(frozen=True)
class IsoResult:
    """Result of the isomorphism search.

    On FOUND, ``mapping`` holds one bijection per box and has been re-verified
    against every arrow table.  On NOT_FOUND, ``certificate`` names the first
    obstruction: CARDINALITY_MISMATCH, PAYLOAD_TYPE_MISMATCH,
    SIGNATURE_MISMATCH (structural refinement separated the instances), or
    SEARCH_EXHAUSTED (full backtracking found no commuting bijection).
    ``detail`` carries the box id (or similar) the certificate points at.
    """

    outcome: IsoOutcome
    mapping: dict[str, dict[str, str]] | None = None
    certificate: str | None = None
    detail: str = ""

    @property
    def found(self) -> bool:
        return self.outcome is IsoOutcome.FOUND


def _payload_type_multiset(elems: dict[str, Payload | None]) -> tuple[str, ...]:
    return tuple(sorted(payload_type_name(p) for p in elems.values()))


def _refine_colors(
    schema: OlogSchema, instance: Instance, rounds: int
) -> dict[str, dict[str, int]]:
    """Stable coloring of every element by its function-graph neighborhood.

    Classic color refinement: start from (box, payload type), then repeatedly
    hash each element with the colors of its images and preimages under every
    arrow.  Colors are normalized each round so they are comparable across
    instances.
    """
    # Palettes are rank-normalized over the sorted key set each round, so the
    # same structural situation gets the same color index in both instances
    # regardless of element naming.
    init_keys: dict[tuple[str, str], tuple] = {}
    for box in schema.boxes:
        for eid, payload in instance.elements(box.id).items():
            init_keys[(box.id, eid)] = (box.id, payload_type_name(payload))
    init_palette = {key: rank for rank, key in enumerate(sorted(set(init_keys.values())))}
    color = {elem: init_palette[key] for elem, key in init_keys.items()}

    arrows = [(a.id, a.src, a.dst) for a in schema.arrows]
    for _ in range(rounds):
        preimage_sig: dict[tuple[str, str], list[tuple[str, int]]] = {}
        for arrow_id, src, dst in arrows:
            for eid, image in instance.table(arrow_id).items():
                if (src, eid) not in color:
                    continue
                preimage_sig.setdefault((dst, image), []).append(
                    (arrow_id, color[(src, eid)])
                )
        keys: dict[tuple[str, str], tuple] = {}
        for (box_id, eid), current in color.items():
            out_sig = tuple(
                (arrow_id, color.get((dst, instance.table(arrow_id).get(eid, "")), -1))
                for arrow_id, src, dst in arrows
                if src == box_id
            )
            in_sig = tuple(sorted(preimage_sig.get((box_id, eid), [])))
            keys[(box_id, eid)] = (current, out_sig, in_sig)
        palette = {key: rank for rank, key in enumerate(sorted(set(keys.values())))}
        new_color = {elem: palette[key] for elem, key in keys.items()}
        if new_color == color:
            break
        color = new_color

    result: dict[str, dict[str, int]] = {}
    for (box_id, eid), c in color.items():
        result.setdefault(box_id, {})[eid] = c
    return result


def check_instance_isomorphism(
    schema: OlogSchema, a: Instance, b: Instance
) -> IsoResult:
    """Search for a natural isomorphism between two instances of one schema.

    Payload *types* must agree per box; payload values are deliberately never
    compared — two instances with different numbers can still be structurally
    identical.  The search refines candidate classes first, then backtracks
    with forced propagation along every arrow table; any map it finds is
    independently re-verified before being reported.
    """
    for inst in (a, b):
        if inst.schema_name != schema.name:
            raise SchemaMismatchError(
                f"instance {inst.name!r} targets schema {inst.schema_name!r}, "
                f"not {schema.name!r}"
            )

    box_ids = [box.id for box in schema.boxes]
    for box_id in box_ids:
        ea, eb = a.elements(box_id), b.elements(box_id)
        if len(ea) != len(eb):
            return IsoResult(
                IsoOutcome.NOT_FOUND,
                certificate="CARDINALITY_MISMATCH",
                detail=f"{box_id}: {len(ea)} vs {len(eb)}",
            )
        if _payload_type_multiset(ea) != _payload_type_multiset(eb):
            return IsoResult(
                IsoOutcome.NOT_FOUND,
                certificate="PAYLOAD_TYPE_MISMATCH",
                detail=box_id,
            )

    total = sum(len(a.elements(box_id)) for box_id in box_ids)
    rounds = max(4, total.bit_length())
    colors_a = _refine_colors(schema, a, rounds)
    colors_b = _refine_colors(schema, b, rounds)

    # Candidate sets: a-element -> the b-elements sharing its color class.
    candidates: dict[tuple[str, str], list[str]] = {}
    for box_id in box_ids:
        hist_a: dict[int, int] = {}
        hist_b: dict[int, int] = {}
        for c in colors_a.get(box_id, {}).values():
            hist_a[c] = hist_a.get(c, 0) + 1
        for c in colors_b.get(box_id, {}).values():
            hist_b[c] = hist_b.get(c, 0) + 1
        if hist_a != hist_b:
            return IsoResult(
                IsoOutcome.NOT_FOUND, certificate="SIGNATURE_MISMATCH", detail=box_id
            )
        by_color: dict[int, list[str]] = {}
        for eid in sorted(colors_b.get(box_id, {}), key=natural_key):
            by_color.setdefault(colors_b[box_id][eid], []).append(eid)
        for eid, c in colors_a.get(box_id, {}).items():
            candidates[(box_id, eid)] = by_color.get(c, [])

    out_arrows: dict[str, list[tuple[str, str]]] = {box_id: [] for box_id in box_ids}
    for arrow in schema.arrows:
        out_arrows[arrow.src].append((arrow.id, arrow.dst))

    # Order: most-constrained elements first (fewest candidates).
    order = sorted(
        candidates,
        key=lambda key: (len(candidates[key]), natural_key(key[0]), natural_key(key[1])),
    )

    assignment: dict[tuple[str, str], str] = {}
    used: dict[str, set[str]] = {box_id: set() for box_id in box_ids}

    def propagate(key: tuple[str, str], value: str, trail: list[tuple[str, str]]) -> bool:
        """Assign key->value plus everything forced by arrow commutation."""
        stack = [(key, value)]
        while stack:
            (box_id, eid), target = stack.pop()
            current = assignment.get((box_id, eid))
            if current is not None:
                if current != target:
                    return False
                continue
            if target in used[box_id] or target not in candidates.get((box_id, eid), ()):
                return False
            assignment[(box_id, eid)] = target
            used[box_id].add(target)
            trail.append((box_id, eid))
            for arrow_id, dst in out_arrows[box_id]:
                image_a = a.table(arrow_id).get(eid)
                image_b = b.table(arrow_id).get(target)
                if image_a is None or image_b is None:
                    if image_a != image_b:
                        return False
                    continue
                stack.append(((dst, image_a), image_b))
        return True

    def undo(trail: list[tuple[str, str]]) -> None:
        for box_id, eid in trail:
            target = assignment.pop((box_id, eid))
            used[box_id].discard(target)

    def search(index: int) -> bool:
        while index < len(order) and order[index] in assignment:
            index += 1
        if index == len(order):
            return True
        key = order[index]
        box_id, _ = key
        for target in candidates[key]:
            if target in used[box_id]:
                continue
            trail: list[tuple[str, str]] = []
            if propagate(key, target, trail) and search(index + 1):
                return True
            undo(trail)
        return False

    if not search(0):
        return IsoResult(IsoOutcome.NOT_FOUND, certificate="SEARCH_EXHAUSTED", detail="")

    mapping: dict[str, dict[str, str]] = {box_id: {} for box_id in box_ids}
    for (box_id, eid), target in assignment.items():
        mapping[box_id][eid] = target
    mapping = {box_id: m for box_id, m in mapping.items() if m}

    if not verify_isomorphism(schema, a, b, mapping):
        # The search is believed sound, but success is only ever reported
        # after independent re-verification.
        return IsoResult(
            IsoOutcome.NOT_FOUND, certificate="SEARCH_EXHAUSTED", detail="verify"
        )
    return IsoResult(IsoOutcome.FOUND, mapping=mapping)


def verify_isomorphism(
    schema: OlogSchema,
    a: Instance,
    b: Instance,
    mapping: dict[str, dict[str, str]],
) -> bool:
    """True iff ``mapping`` is a family of bijections commuting with every arrow."""
    for box in schema.boxes:
        m = mapping.get(box.id, {})
        ea, eb = a.elements(box.id), b.elements(box.id)
        if set(m) != set(ea):
            return False
        if sorted(m.values()) != sorted(eb):
            return False
        if len(set(m.values())) != len(m):
            return False
    for arrow in schema.arrows:
        m_src = mapping.get(arrow.src, {})
        m_dst = mapping.get(arrow.dst, {})
        table_a = a.table(arrow.id)
        table_b = b.table(arrow.id)
        for eid, image in table_a.items():
            if eid not in m_src:
                return False
            if m_dst.get(image) != table_b.get(m_src[eid]):
                return False
        if len(table_b) != len(table_a):
            return False
    return True
