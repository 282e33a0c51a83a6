"""Finite knowledge schemas: boxes, arrows, path equations, fiber products.

A schema is a finitely presented category: boxes are types, arrows are total
aspects, and declared path equations assert that certain diagrams commute.
Fiber-product declarations additionally mark a box as the pullback of a cospan;
their commuting square must itself be one of the declared equations (see
:func:`with_fiber_product_squares`).

Path equality is only semidecidable, so :func:`derive_equality` returns a
two-valued verdict — ``HOLDS`` with a rewrite witness, or ``UNKNOWN``.  It
never claims two paths are unequal.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field

from .diagnostics import Diagnostic, error, warning
from .errors import EndpointMismatchError, MalformedPathError
from .ordering import natural_key

__all__ = [
    "BoxDecl",
    "ArrowDecl",
    "Path",
    "identity",
    "PathEquation",
    "FiberProductDecl",
    "OlogSchema",
    "SchemaFunctor",
    "EqVerdict",
    "RewriteStep",
    "EqualityResult",
    "validate_schema",
    "path_endpoints",
    "compose",
    "derive_equality",
    "check_functor",
    "with_fiber_product_squares",
]

# Rewrite search never keeps more than this many distinct paths; overflowing
# the cap degrades the answer to UNKNOWN (never to a false HOLDS).
_STATE_CAP = 100_000


@dataclass(frozen=True, slots=True)
class BoxDecl:
    """A type declaration: a stable id and a human-readable noun-phrase label."""

    id: str
    label: str
    tags: frozenset[str] = field(default_factory=frozenset)


@dataclass(frozen=True, slots=True)
class ArrowDecl:
    """An aspect declaration: a total function from box ``src`` to box ``dst``."""

    id: str
    src: str
    dst: str
    label: str = ""
    tags: frozenset[str] = field(default_factory=frozenset)


@dataclass(frozen=True, slots=True)
class Path:
    """A composable sequence of arrow ids starting at ``start``.

    The empty sequence is the identity path at ``start``.
    """

    start: str
    arrows: tuple[str, ...] = ()

    def __post_init__(self) -> None:
        if not isinstance(self.arrows, tuple):
            object.__setattr__(self, "arrows", tuple(self.arrows))

    @property
    def is_identity(self) -> bool:
        return not self.arrows

    def __str__(self) -> str:
        return f"{self.start}:[{','.join(self.arrows)}]"


def identity(box: str) -> Path:
    """The identity path at a box."""
    return Path(box, ())


@dataclass(frozen=True, slots=True)
class PathEquation:
    """An assertion that two parallel paths agree on every element."""

    lhs: Path
    rhs: Path
    note: str = ""

    def __str__(self) -> str:
        return f"[{','.join(self.lhs.arrows)}] = [{','.join(self.rhs.arrows)}]"


@dataclass(frozen=True, slots=True)
class FiberProductDecl:
    """Marks ``apex`` as the pullback of the cospan ``leg1``/``leg2``.

    Shape: ``proj1: apex -> X``, ``proj2: apex -> Y``, ``leg1: X -> Z``,
    ``leg2: Y -> Z``; the square ``proj1;leg1 = proj2;leg2`` must commute.
    """

    apex: str
    proj1: str
    proj2: str
    leg1: str
    leg2: str


@dataclass(frozen=True)
class OlogSchema:
    """An immutable schema; construct once, validate, then share freely.

    The declaration tuples preserve authoring order (duplicates are
    representable so :func:`validate_schema` can report them); ``box`` and
    ``arrow`` give first-declaration lookup by id.
    """

    name: str
    boxes: tuple[BoxDecl, ...] = ()
    arrows: tuple[ArrowDecl, ...] = ()
    equations: tuple[PathEquation, ...] = ()
    fiber_products: tuple[FiberProductDecl, ...] = ()

    def __post_init__(self) -> None:
        boxes: dict[str, BoxDecl] = {}
        for b in self.boxes:
            boxes.setdefault(b.id, b)
        arrows: dict[str, ArrowDecl] = {}
        for a in self.arrows:
            arrows.setdefault(a.id, a)
        object.__setattr__(self, "_box_by_id", boxes)
        object.__setattr__(self, "_arrow_by_id", arrows)

    def box(self, box_id: str) -> BoxDecl | None:
        return self._box_by_id.get(box_id)

    def arrow(self, arrow_id: str) -> ArrowDecl | None:
        return self._arrow_by_id.get(arrow_id)

    def canonical(self) -> "OlogSchema":
        """The same schema with all declarations in canonical sorted order."""

        def eq_key(eq: PathEquation) -> tuple:
            try:
                s, e = path_endpoints(self, eq.lhs)
            except MalformedPathError:
                s, e = eq.lhs.start, ""
            return (
                natural_key(s),
                natural_key(e),
                tuple(natural_key(a) for a in eq.lhs.arrows),
                tuple(natural_key(a) for a in eq.rhs.arrows),
            )

        return OlogSchema(
            self.name,
            tuple(sorted(self.boxes, key=lambda b: natural_key(b.id))),
            tuple(sorted(self.arrows, key=lambda a: natural_key(a.id))),
            tuple(sorted(self.equations, key=eq_key)),
            tuple(sorted(self.fiber_products, key=lambda f: natural_key(f.apex))),
        )


@dataclass(frozen=True)
class SchemaFunctor:
    """A structure-preserving map between schemas.

    ``box_map`` and ``arrow_map`` must be total on the source schema and
    endpoint-preserving; :func:`check_functor` verifies this and additionally
    checks that every source equation's image is derivable in the target.
    """

    source: OlogSchema
    target: OlogSchema
    box_map: dict[str, str]
    arrow_map: dict[str, str]

    @classmethod
    def identity_on(cls, schema: OlogSchema) -> "SchemaFunctor":
        return cls(
            schema,
            schema,
            {b.id: b.id for b in schema.boxes},
            {a.id: a.id for a in schema.arrows},
        )

    def map_path(self, path: Path) -> Path:
        return Path(
            self.box_map[path.start],
            tuple(self.arrow_map[a] for a in path.arrows),
        )


# ---------------------------------------------------------------------------
# path algebra
# ---------------------------------------------------------------------------


def path_endpoints(schema: OlogSchema, path: Path) -> tuple[str, str]:
    """(start box, end box) of a path; raises MalformedPathError otherwise."""
    if schema.box(path.start) is None:
        raise MalformedPathError(f"path starts at undeclared box {path.start!r}")
    at = path.start
    for arrow_id in path.arrows:
        decl = schema.arrow(arrow_id)
        if decl is None:
            raise MalformedPathError(f"path references undeclared arrow {arrow_id!r}")
        if decl.src != at:
            raise MalformedPathError(
                f"arrow {arrow_id} starts at {decl.src}, not {at}"
            )
        at = decl.dst
    return path.start, at


def compose(schema: OlogSchema, first: Path, second: Path) -> Path:
    """first ; second — sequential composition, identity paths as units."""
    _, end = path_endpoints(schema, first)
    start2, _ = path_endpoints(schema, second)
    if end != start2:
        raise EndpointMismatchError(
            f"cannot compose: first path ends at {end}, second starts at {start2}"
        )
    return Path(first.start, first.arrows + second.arrows)


# ---------------------------------------------------------------------------
# schema validation
# ---------------------------------------------------------------------------


def validate_schema(schema: OlogSchema) -> list[Diagnostic]:
    """All structural problems in the schema, as a deterministic list.

    Pure and idempotent; an empty result means the schema is well-formed.
    """
    diags: list[Diagnostic] = []

    seen_boxes: set[str] = set()
    for box in schema.boxes:
        if box.id in seen_boxes:
            diags.append(error("DUP_BOX_ID", f"box {box.id!r} declared twice", box.id))
        seen_boxes.add(box.id)
        if not box.label.strip():
            diags.append(error("EMPTY_LABEL", f"box {box.id!r} has an empty label", box.id))

    seen_arrows: set[str] = set()
    for arrow in schema.arrows:
        if arrow.id in seen_arrows:
            diags.append(
                error("DUP_ARROW_ID", f"arrow {arrow.id!r} declared twice", arrow.id)
            )
        seen_arrows.add(arrow.id)
        for endpoint in (arrow.src, arrow.dst):
            if schema.box(endpoint) is None:
                diags.append(
                    error(
                        "DANGLING_ARROW",
                        f"arrow {arrow.id} references undeclared box {endpoint!r}",
                        arrow.id,
                    )
                )

    for index, eq in enumerate(schema.equations):
        loc = f"eq#{index + 1}"
        endpoints: list[tuple[str, str]] = []
        for side_name, side in (("lhs", eq.lhs), ("rhs", eq.rhs)):
            try:
                endpoints.append(path_endpoints(schema, side))
            except MalformedPathError as exc:
                diags.append(
                    error("MALFORMED_PATH", f"{side_name} of {eq}: {exc.message}", loc)
                )
        if len(endpoints) == 2 and endpoints[0] != endpoints[1]:
            diags.append(
                error(
                    "EQ_ENDPOINT_MISMATCH",
                    f"{eq}: sides run {endpoints[0][0]}->{endpoints[0][1]} "
                    f"vs {endpoints[1][0]}->{endpoints[1][1]}",
                    loc,
                )
            )

    declared_squares = {
        (eq.lhs.start, eq.lhs.arrows, eq.rhs.arrows) for eq in schema.equations
    }
    declared_squares |= {
        (eq.lhs.start, eq.rhs.arrows, eq.lhs.arrows) for eq in schema.equations
    }
    for fp in schema.fiber_products:
        loc = f"pullback {fp.apex}"
        if schema.box(fp.apex) is None:
            diags.append(
                error("FP_BAD_ARROW", f"apex {fp.apex!r} is not a declared box", loc)
            )
            continue
        arrows = {
            name: schema.arrow(arrow_id)
            for name, arrow_id in (
                ("proj1", fp.proj1),
                ("proj2", fp.proj2),
                ("leg1", fp.leg1),
                ("leg2", fp.leg2),
            )
        }
        missing = [name for name, decl in arrows.items() if decl is None]
        if missing:
            diags.append(
                error(
                    "FP_BAD_ARROW",
                    f"{loc} references undeclared arrow(s): "
                    + ", ".join(f"{m}={getattr(fp, m)}" for m in missing),
                    loc,
                )
            )
            continue
        proj1, proj2, leg1, leg2 = (
            arrows["proj1"],
            arrows["proj2"],
            arrows["leg1"],
            arrows["leg2"],
        )
        shape_ok = (
            proj1.src == fp.apex
            and proj2.src == fp.apex
            and leg1.src == proj1.dst
            and leg2.src == proj2.dst
            and leg1.dst == leg2.dst
        )
        if not shape_ok:
            diags.append(
                error(
                    "FP_SQUARE_SHAPE",
                    f"{loc}: proj ({fp.proj1}, {fp.proj2}) legs ({fp.leg1}, {fp.leg2}) "
                    "do not form a cospan square over the apex",
                    loc,
                )
            )
            continue
        square = (fp.apex, (fp.proj1, fp.leg1), (fp.proj2, fp.leg2))
        if square not in declared_squares:
            diags.append(
                error(
                    "FP_SQUARE_MISSING",
                    f"{loc}: the square [{fp.proj1},{fp.leg1}] = [{fp.proj2},{fp.leg2}] "
                    "is not among the declared path equations",
                    loc,
                )
            )
    return diags


def with_fiber_product_squares(schema: OlogSchema) -> OlogSchema:
    """Return the schema with every missing fiber-product square equation added.

    The DSL parser applies this after reading a schema block, so hand-written
    files may omit squares that are implied.  Already-present squares (either
    orientation) are left alone.
    """
    declared = {(eq.lhs.start, eq.lhs.arrows, eq.rhs.arrows) for eq in schema.equations}
    declared |= {(eq.lhs.start, eq.rhs.arrows, eq.lhs.arrows) for eq in schema.equations}
    additions: list[PathEquation] = []
    for fp in schema.fiber_products:
        square = (fp.apex, (fp.proj1, fp.leg1), (fp.proj2, fp.leg2))
        if square not in declared:
            additions.append(
                PathEquation(
                    Path(fp.apex, (fp.proj1, fp.leg1)),
                    Path(fp.apex, (fp.proj2, fp.leg2)),
                    note=f"pullback square of {fp.apex}",
                )
            )
            declared.add(square)
    if not additions:
        return schema
    return OlogSchema(
        schema.name,
        schema.boxes,
        schema.arrows,
        schema.equations + tuple(additions),
        schema.fiber_products,
    )


# ---------------------------------------------------------------------------
# bounded bidirectional rewriting
# ---------------------------------------------------------------------------


class EqVerdict(enum.Enum):
    HOLDS = "Holds"
    UNKNOWN = "Unknown"


@dataclass(frozen=True, slots=True)
class RewriteStep:
    """One rewrite: equation ``eq_index`` applied at ``position``.

    ``direction`` is "lhs->rhs" or "rhs->lhs" depending on which side was
    matched and replaced.
    """

    eq_index: int
    position: int
    direction: str


@dataclass(frozen=True)
class EqualityResult:
    """Outcome of :func:`derive_equality`.

    On ``HOLDS`` the witness is the full chain of paths from ``p`` to ``q``
    (inclusive) and ``rewrites`` records the step that produced each successive
    path.  ``UNKNOWN`` means the budget was exhausted without reaching ``q`` —
    it never asserts the paths are unequal.
    """

    verdict: EqVerdict
    steps: int | None = None
    witness: tuple[Path, ...] = ()
    rewrites: tuple[RewriteStep, ...] = ()

    @property
    def holds(self) -> bool:
        return self.verdict is EqVerdict.HOLDS


def _rewrite_neighbors(
    schema: OlogSchema,
    start_box: str,
    arrows: tuple[str, ...],
    sides: list[tuple[int, str, tuple[str, ...], str, tuple[str, ...]]],
):
    """Yield (new_arrows, RewriteStep) for every single rewrite of the path.

    ``sides`` carries (eq_index, pattern_start_box, pattern, direction,
    replacement) for both orientations of every equation.
    """
    boxes = [start_box]
    for arrow_id in arrows:
        boxes.append(schema.arrow(arrow_id).dst)
    n = len(arrows)
    for eq_index, pat_start, pattern, direction, replacement in sides:
        k = len(pattern)
        if k == 0:
            # identity side: insert the replacement wherever the box matches
            for pos in range(n + 1):
                if boxes[pos] == pat_start:
                    yield (
                        arrows[:pos] + replacement + arrows[pos:],
                        RewriteStep(eq_index, pos, direction),
                    )
        else:
            for pos in range(n - k + 1):
                if arrows[pos : pos + k] == pattern:
                    yield (
                        arrows[:pos] + replacement + arrows[pos + k :],
                        RewriteStep(eq_index, pos, direction),
                    )


def derive_equality(
    schema: OlogSchema, p: Path, q: Path, max_steps: int
) -> EqualityResult:
    """Try to prove p = q by at most ``max_steps`` equation rewrites.

    Breadth-first over rewrite applications, both directions of every declared
    equation, matching any contiguous subpath.  Deterministic; emits the full
    witness chain on success.  Raises EndpointMismatchError when the two paths
    are not even parallel.
    """
    sp = path_endpoints(schema, p)
    sq = path_endpoints(schema, q)
    if sp != sq:
        raise EndpointMismatchError(
            f"paths are not parallel: {p} runs {sp[0]}->{sp[1]}, {q} runs {sq[0]}->{sq[1]}"
        )

    if p.arrows == q.arrows:
        return EqualityResult(EqVerdict.HOLDS, steps=0, witness=(p,))

    sides: list[tuple[int, str, tuple[str, ...], str, tuple[str, ...]]] = []
    for index, eq in enumerate(schema.equations):
        try:
            path_endpoints(schema, eq.lhs)
            path_endpoints(schema, eq.rhs)
        except MalformedPathError:
            continue  # unusable equation; validate_schema reports it
        sides.append((index, eq.lhs.start, eq.lhs.arrows, "lhs->rhs", eq.rhs.arrows))
        sides.append((index, eq.rhs.start, eq.rhs.arrows, "rhs->lhs", eq.lhs.arrows))

    start = p.arrows
    target = q.arrows
    parents: dict[tuple[str, ...], tuple[tuple[str, ...], RewriteStep] | None] = {
        start: None
    }
    frontier: list[tuple[str, ...]] = [start]
    for depth in range(1, max(max_steps, 0) + 1):
        next_frontier: list[tuple[str, ...]] = []
        for state in frontier:
            for new_arrows, step in _rewrite_neighbors(schema, p.start, state, sides):
                if new_arrows in parents:
                    continue
                parents[new_arrows] = (state, step)
                if new_arrows == target:
                    chain: list[Path] = []
                    rewrites: list[RewriteStep] = []
                    cursor: tuple[str, ...] | None = new_arrows
                    while cursor is not None:
                        chain.append(Path(p.start, cursor))
                        entry = parents[cursor]
                        if entry is None:
                            cursor = None
                        else:
                            cursor, used = entry
                            rewrites.append(used)
                    chain.reverse()
                    rewrites.reverse()
                    return EqualityResult(
                        EqVerdict.HOLDS,
                        steps=depth,
                        witness=tuple(chain),
                        rewrites=tuple(rewrites),
                    )
                if len(parents) >= _STATE_CAP:
                    return EqualityResult(EqVerdict.UNKNOWN)
                next_frontier.append(new_arrows)
        if not next_frontier:
            break  # saturated: no new paths reachable at any larger budget
        frontier = next_frontier
    return EqualityResult(EqVerdict.UNKNOWN)


def replay_witness(schema: OlogSchema, result: EqualityResult) -> bool:
    """Independently re-check a HOLDS witness, one rewrite at a time.

    Used by tests as the soundness oracle: every consecutive pair of witness
    paths must differ by exactly the recorded equation application, and every
    intermediate path must be well-formed and parallel to the first.
    """
    if not result.holds or not result.witness:
        return False
    endpoints = path_endpoints(schema, result.witness[0])
    for path in result.witness:
        if path_endpoints(schema, path) != endpoints:
            return False
    if len(result.witness) != len(result.rewrites) + 1:
        return False
    for before, after, step in zip(
        result.witness, result.witness[1:], result.rewrites
    ):
        eq = schema.equations[step.eq_index]
        if step.direction == "lhs->rhs":
            pattern, replacement = eq.lhs.arrows, eq.rhs.arrows
        else:
            pattern, replacement = eq.rhs.arrows, eq.lhs.arrows
        pos = step.position
        if before.arrows[pos : pos + len(pattern)] != pattern:
            return False
        rebuilt = before.arrows[:pos] + replacement + before.arrows[pos + len(pattern) :]
        if rebuilt != after.arrows:
            return False
    return True


# ---------------------------------------------------------------------------
# functor checking
# ---------------------------------------------------------------------------


def check_functor(functor: SchemaFunctor, max_steps: int = 64) -> list[Diagnostic]:
    """Structural diagnostics for a schema functor.

    Errors cover totality, unknown targets, and endpoint preservation.  For
    each source equation the image equation is submitted to
    :func:`derive_equality` in the target schema; an UNKNOWN outcome is
    reported as the warning ``EQ_IMAGE_UNKNOWN`` (underivability within budget
    is not evidence of failure).
    """
    diags: list[Diagnostic] = []
    src, dst = functor.source, functor.target

    for box in src.boxes:
        image = functor.box_map.get(box.id)
        if image is None:
            diags.append(
                error("MISSING_MAPPING", f"box {box.id} has no image", box.id)
            )
        elif dst.box(image) is None:
            diags.append(
                error(
                    "UNKNOWN_TARGET",
                    f"box {box.id} maps to undeclared box {image!r}",
                    box.id,
                )
            )

    for arrow in src.arrows:
        image_id = functor.arrow_map.get(arrow.id)
        if image_id is None:
            diags.append(
                error("MISSING_MAPPING", f"arrow {arrow.id} has no image", arrow.id)
            )
            continue
        image = dst.arrow(image_id)
        if image is None:
            diags.append(
                error(
                    "UNKNOWN_TARGET",
                    f"arrow {arrow.id} maps to undeclared arrow {image_id!r}",
                    arrow.id,
                )
            )
            continue
        want_src = functor.box_map.get(arrow.src)
        want_dst = functor.box_map.get(arrow.dst)
        if want_src is not None and image.src != want_src:
            diags.append(
                error(
                    "ENDPOINT_VIOLATION",
                    f"arrow {arrow.id}: image {image_id} starts at {image.src}, "
                    f"expected {want_src}",
                    arrow.id,
                )
            )
        if want_dst is not None and image.dst != want_dst:
            diags.append(
                error(
                    "ENDPOINT_VIOLATION",
                    f"arrow {arrow.id}: image {image_id} ends at {image.dst}, "
                    f"expected {want_dst}",
                    arrow.id,
                )
            )

    if any(d.code in ("MISSING_MAPPING", "UNKNOWN_TARGET", "ENDPOINT_VIOLATION") for d in diags):
        return diags

    for index, eq in enumerate(src.equations):
        try:
            lhs_image = functor.map_path(eq.lhs)
            rhs_image = functor.map_path(eq.rhs)
            outcome = derive_equality(dst, lhs_image, rhs_image, max_steps)
        except (KeyError, MalformedPathError, EndpointMismatchError):
            continue  # source equation itself is malformed; not the functor's fault
        if not outcome.holds:
            diags.append(
                warning(
                    "EQ_IMAGE_UNKNOWN",
                    f"image of equation {eq} could not be derived in "
                    f"{max_steps} steps",
                    f"eq#{index + 1}",
                )
            )
    return diags
