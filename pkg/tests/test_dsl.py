import math
from pathlib import Path as FsPath

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ologkit import (
    ArrowDecl,
    BoxDecl,
    DuplicateIdError,
    FiberProductDecl,
    Graph,
    GraphPayload,
    Instance,
    OlogSchema,
    PairPayload,
    ParseError,
    PathEquation,
    RealPayload,
    TextPayload,
    bundled_text,
    load_instance,
    load_schema,
    parse_instance,
    parse_schema,
    serialize_instance,
    serialize_schema,
    validate_schema,
    with_fiber_product_squares,
)
from ologkit.schema import Path, path_endpoints

GOLDEN = FsPath(__file__).parent / "golden" / "paper.canonical.olog"


# ---------------------------------------------------------------------------
# parsing basics
# ---------------------------------------------------------------------------


def test_small_schema_parses():
    s = parse_schema(
        """
        # a comment
        schema "tiny" {
          box A "an apple"   [fruit , red]
          box B "a basket"
          arrow put : A -> B "is put into"
          arrow put2 : A -> B
          eq A..B : [put] = [put2] "same placement"
        }
        """
    )
    assert s.name == "tiny"
    assert s.box("A").tags == frozenset({"fruit", "red"})
    assert s.arrow("put").label == "is put into"
    assert s.arrow("put2").label == ""
    assert s.equations[0].note == "same placement"


def test_small_instance_parses():
    inst = parse_instance(
        """
        instance "demo" of "tiny" {
          set A { a1 = real 1.5, a2, a3 = real inf, }
          set B { b1 = pair (-inf, 2.0), b2 = text "said \\"hi\\"" }
          set C { c1 = graph { n1 -> n2, n3, } }
          fn put { a1 -> b1, a2 -> b1, a3 -> b2, }
        }
        """
    )
    assert inst.elements("A")["a1"] == RealPayload(1.5)
    assert inst.elements("A")["a2"] is None
    assert inst.elements("A")["a3"] == RealPayload(math.inf)
    assert inst.elements("B")["b1"] == PairPayload(-math.inf, 2.0)
    assert inst.elements("B")["b2"] == TextPayload('said "hi"')
    assert inst.elements("C")["c1"] == GraphPayload(
        Graph(("n1", "n2", "n3"), (("n1", "n2"),))
    )
    assert inst.table("put") == {"a1": "b1", "a2": "b1", "a3": "b2"}


def test_bare_integers_and_signed_exponents_are_reals():
    inst = parse_instance(
        'instance "n" of "s" { set X { x1 = real 2, x2 = real 1e+16, '
        "x3 = real -0.5, x4 = real 3.25e-2 } }"
    )
    vals = {k: p.value for k, p in inst.elements("X").items()}
    assert vals == {"x1": 2.0, "x2": 1e16, "x3": -0.5, "x4": 0.0325}


def test_unsigned_exponent_is_an_identifier_not_a_number():
    # 1e16 must stay usable as an element id
    inst = parse_instance('instance "n" of "s" { set X { 1e16 } }')
    assert "1e16" in inst.elements("X")
    with pytest.raises(ParseError):
        parse_instance('instance "n" of "s" { set X { x1 = real 1e16 } }')


def test_keywords_are_ordinary_identifiers():
    s = parse_schema(
        'schema "kw" { box box "a box" box eq "an eq" '
        "arrow schema : box -> eq }"
    )
    assert s.box("box").label == "a box"
    assert s.arrow("schema").src == "box"
    inst = parse_instance(
        'instance "kw" of "kw" { set box { set, fn, real, graph } '
        "fn schema { set -> fn } }"
    )
    assert set(inst.elements("box")) == {"set", "fn", "real", "graph"}


def test_whitespace_and_newlines_are_interchangeable():
    one_line = 'schema "t" { box A "an a" arrow f : A -> A }'
    many_lines = 'schema "t" {\n  box A "an a"\n  arrow f\n    : A -> A\n}\n'
    assert parse_schema(one_line) == parse_schema(many_lines)


# ---------------------------------------------------------------------------
# parse errors, with positions
# ---------------------------------------------------------------------------


def test_unterminated_string_position():
    with pytest.raises(ParseError) as exc:
        parse_schema('schema "oops\n')
    assert "unterminated string" in exc.value.bare_message
    assert (exc.value.span.line, exc.value.span.column) == (1, 8)


def test_unexpected_character():
    with pytest.raises(ParseError) as exc:
        parse_schema('schema "t" { box A $ }', filename="bad.olog")
    assert "unexpected character" in exc.value.bare_message
    assert exc.value.span.file == "bad.olog"
    assert (exc.value.span.line, exc.value.span.column) == (1, 20)


def test_invalid_escape_is_rejected():
    with pytest.raises(ParseError) as exc:
        parse_schema('schema "a\\qb" {}')
    assert "escape" in exc.value.bare_message


def test_truncated_arrow_declaration():
    text = 'schema "t" {\n  box A "an a"\n  arrow f : A ->\n}\n'
    with pytest.raises(ParseError) as exc:
        parse_schema(text, filename="bad.olog")
    assert (exc.value.span.line, exc.value.span.column) == (4, 1)


def test_missing_colon_in_arrow():
    with pytest.raises(ParseError) as exc:
        parse_schema('schema "t" { box A "an a" arrow f A -> A }')
    assert "':'" in exc.value.bare_message or "expected" in exc.value.bare_message


def test_trailing_content_rejected():
    with pytest.raises(ParseError):
        parse_schema('schema "t" { box A "an a" } schema "u" {}')
    with pytest.raises(ParseError):
        parse_instance('instance "i" of "s" {} stray')


def test_string_where_block_expected():
    with pytest.raises(ParseError) as exc:
        parse_instance('instance "i" of "s" { pullback }')
    assert "expected 'set', 'fn'" in exc.value.bare_message


# ---------------------------------------------------------------------------
# duplicate declarations
# ---------------------------------------------------------------------------


@pytest.mark.parametrize(
    "text",
    [
        'schema "d" { box A "an a" box A "again" }',
        'schema "d" { box A "an a" arrow f : A -> A arrow f : A -> A }',
        'schema "d" { box A "an a" box B "a b" box C "a c" '
        "arrow p : A -> B arrow q : A -> B arrow f : B -> C arrow g : B -> C "
        "pullback A = B ×[C] B proj (p, q) legs (f, g) "
        "pullback A = B ×[C] B proj (p, q) legs (f, g) }",
        'instance "d" of "s" { set X { x1 } set X { x2 } }',
        'instance "d" of "s" { fn f { a -> b } fn f { c -> d } }',
        'instance "d" of "s" { set X { x1, x1 } }',
        'instance "d" of "s" { fn f { a -> b, a -> c } }',
    ],
)
def test_duplicate_declarations_rejected(text):
    parse = parse_schema if text.startswith("schema") else parse_instance
    with pytest.raises(DuplicateIdError):
        parse(text)


# ---------------------------------------------------------------------------
# declaration cross-checks
# ---------------------------------------------------------------------------


def test_equation_endpoints_must_match_declared_span():
    with pytest.raises(ParseError) as exc:
        parse_schema(
            'schema "x" { box A "an a" box B "a b" arrow f : A -> B '
            "eq A..A : [f] = [f] }"
        )
    assert "declares A..A" in exc.value.bare_message


def test_pullback_corners_must_match_arrows():
    with pytest.raises(ParseError) as exc:
        parse_schema(
            'schema "x" { box P "a p" box X "an x" box Y "a y" box Z "a z" '
            "arrow p1 : P -> X arrow p2 : P -> Y "
            "arrow f : X -> Z arrow g : Y -> Z "
            "pullback P = X ×[Z] X proj (p1, p2) legs (f, g) }"
        )
    assert "pullback P" in exc.value.bare_message


def test_parser_supplies_missing_square_equations():
    s = parse_schema(
        'schema "x" { box P "a p" box X "an x" box Y "a y" box Z "a z" '
        "arrow p1 : P -> X arrow p2 : P -> Y "
        "arrow f : X -> Z arrow g : Y -> Z "
        "pullback P = X ×[Z] Y proj (p1, p2) legs (f, g) }"
    )
    assert len(s.equations) == 1
    assert s.equations[0].lhs == Path("P", ("p1", "f"))
    assert validate_schema(s) == []


# ---------------------------------------------------------------------------
# bundled documents and golden bytes
# ---------------------------------------------------------------------------


def test_bundled_schema_canonical_form_is_frozen():
    text = bundled_text("paper.olog")
    assert serialize_schema(parse_schema(text)) == GOLDEN.read_text(encoding="utf-8")


def test_canonical_form_is_a_fixed_point():
    golden = GOLDEN.read_text(encoding="utf-8")
    assert serialize_schema(parse_schema(golden)) == golden


def test_bundled_instances_round_trip_bytes():
    for name in ("protein.oinst", "social.oinst"):
        text = bundled_text(name)
        assert serialize_instance(parse_instance(text)) == text


def test_load_helpers_read_files(tmp_path):
    sfile = tmp_path / "s.olog"
    sfile.write_text('schema "t" { box A "an a" }', encoding="utf-8")
    assert load_schema(sfile).name == "t"
    ifile = tmp_path / "i.oinst"
    ifile.write_text('instance "x" of "t" { set A { a1 } }', encoding="utf-8")
    assert load_instance(ifile).name == "x"
    sfile.write_text('schema "t" {', encoding="utf-8")
    with pytest.raises(ParseError) as exc:
        load_schema(sfile)
    assert exc.value.span.file == str(sfile)


# ---------------------------------------------------------------------------
# property: serialization is parseable and byte-stable
# ---------------------------------------------------------------------------

_ids = st.text(alphabet="abcxyz_0123456789", min_size=1, max_size=6)
_labels = st.text(
    alphabet=st.characters(
        min_codepoint=32, max_codepoint=0x24F, blacklist_characters='"\\\n'
    ),
    max_size=20,
).map(lambda t: t + "x")  # never empty, so optional-label round trips stay exact
_quoted = st.text(
    alphabet=st.characters(min_codepoint=32, max_codepoint=0x24F),
    max_size=20,
)
_tags = st.frozensets(_ids, max_size=2)
_reals = st.floats(allow_nan=False)


@st.composite
def _schemas(draw):
    box_ids = draw(st.lists(_ids, min_size=1, max_size=5, unique=True))
    boxes = tuple(BoxDecl(b, draw(_labels), draw(_tags)) for b in box_ids)
    arrow_ids = draw(st.lists(_ids, max_size=6, unique=True))
    arrows = [
        ArrowDecl(
            a,
            draw(st.sampled_from(box_ids)),
            draw(st.sampled_from(box_ids)),
            draw(st.one_of(st.just(""), _labels)),
            draw(_tags),
        )
        for a in arrow_ids
    ]

    schema = OlogSchema("seed", boxes, tuple(arrows))
    by_endpoints: dict[tuple[str, str], list[Path]] = {}
    frontier = [Path(b, ()) for b in box_ids]
    for b in box_ids:
        by_endpoints.setdefault((b, b), []).append(Path(b, ()))
    for _ in range(3):
        nxt = []
        for p in frontier:
            _, end = path_endpoints(schema, p)
            for a in arrows:
                if a.src == end:
                    q = Path(p.start, p.arrows + (a.id,))
                    nxt.append(q)
                    by_endpoints.setdefault(path_endpoints(schema, q), []).append(q)
        frontier = nxt
    eqs = []
    pools = [ps for ps in by_endpoints.values() if len(ps) >= 2]
    for _ in range(draw(st.integers(0, 2))):
        if not pools:
            break
        pool = draw(st.sampled_from(pools))
        lhs, rhs = (draw(st.sampled_from(pool)) for _ in range(2))
        eqs.append(PathEquation(lhs, rhs, draw(st.one_of(st.just(""), _labels))))

    fps = ()
    if draw(st.booleans()):
        apex, x, y, z = (draw(st.sampled_from(box_ids)) for _ in range(4))
        arrows += [
            ArrowDecl("PR1", apex, x),
            ArrowDecl("PR2", apex, y),
            ArrowDecl("LG1", x, z),
            ArrowDecl("LG2", y, z),
        ]
        fps = (FiberProductDecl(apex, "PR1", "PR2", "LG1", "LG2"),)

    return with_fiber_product_squares(
        OlogSchema(draw(_quoted), boxes, tuple(arrows), tuple(eqs), fps)
    )


@st.composite
def _graphs(draw):
    nodes = draw(st.lists(_ids, max_size=4, unique=True))
    edges = []
    if nodes:
        for _ in range(draw(st.integers(0, 3))):
            edges.append(
                (draw(st.sampled_from(nodes)), draw(st.sampled_from(nodes)))
            )
    return Graph(tuple(nodes), tuple(edges))


_payloads = st.one_of(
    st.none(),
    st.builds(RealPayload, _reals),
    st.builds(PairPayload, _reals, _reals),
    st.builds(GraphPayload, _graphs()),
    st.builds(TextPayload, _quoted),
)


@st.composite
def _instances(draw):
    sets = {}
    for b in draw(st.lists(_ids, max_size=4, unique=True)):
        sets[b] = {e: draw(_payloads) for e in draw(st.lists(_ids, max_size=4, unique=True))}
    functions = {}
    element_pool = sorted({e for es in sets.values() for e in es}) or ["x0"]
    for a in draw(st.lists(_ids, max_size=3, unique=True)):
        functions[a] = {
            e: draw(st.sampled_from(element_pool))
            for e in draw(st.lists(_ids, max_size=4, unique=True))
        }
    return Instance(draw(_quoted), draw(_quoted), sets, functions)


@settings(max_examples=120, deadline=None)
@given(schema=_schemas())
def test_schema_serialization_is_byte_stable(schema):
    text = serialize_schema(schema)
    reparsed = parse_schema(text)
    assert serialize_schema(reparsed) == text


@settings(max_examples=120, deadline=None)
@given(instance=_instances())
def test_instance_serialization_is_byte_stable(instance):
    text = serialize_instance(instance)
    reparsed = parse_instance(text)
    assert serialize_instance(reparsed) == text
    # a second pass stays put as well
    assert serialize_instance(parse_instance(serialize_instance(reparsed))) == text


@settings(max_examples=60, deadline=None)
@given(value=st.floats(allow_nan=False))
def test_real_literals_round_trip_exactly(value):
    text = serialize_instance(
        Instance("n", "s", {"X": {"x1": RealPayload(value)}}, {})
    )
    back = parse_instance(text).elements("X")["x1"].value
    assert back == value and math.copysign(1, back) == math.copysign(1, value)
