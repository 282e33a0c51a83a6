"""End-to-end acceptance gates for the toolkit.

Each test covers one numbered gate and prints a single ``PASS criterion N``
line on success (run with ``-s`` to see them); a failing gate shows up as an
ordinary pytest failure.  The whole module is meant to stay well under the
suite's thirty-second budget.
"""

import contextlib
import io
import math
import random
import re
import time
from pathlib import Path as FsPath

from ologkit import (
    PROTEIN_DEFAULTS,
    Classification,
    Comparators,
    EqVerdict,
    Instance,
    IsoOutcome,
    SimParams,
    build_chain,
    bundled_text,
    check_all_equations,
    check_instance_isomorphism,
    classify,
    compute_pullback,
    derive_equality,
    estimate_link_failure_noise_mc,
    generate_instance,
    link_failure_noise,
    much_greater,
    parse_instance,
    parse_schema,
    roughly_equal,
    serialize_instance,
    serialize_schema,
    system_failure_extension,
    validate_instance,
    verify_all_fiber_products,
)
from ologkit.schema import Path

REPO_ROOT = FsPath(__file__).resolve().parent.parent


def _run_cli(argv):
    from ologkit.cli import main

    buffer = io.StringIO()
    with contextlib.redirect_stdout(buffer):
        code = main(argv)
    return code, buffer.getvalue()


def _all_checks_clean(schema, instance):
    assert validate_instance(schema, instance) == []
    eq_reports = check_all_equations(schema, instance)
    assert len(eq_reports) == 17
    assert all(r.verdict == "AllHold" for r in eq_reports)
    fp_reports = verify_all_fiber_products(schema, instance)
    assert len(fp_reports) == 8
    assert all(r.verdict == "PASS" for r in fp_reports)


def test_criterion_1_bundled_schema_is_wellformed(schema):
    from ologkit import validate_schema

    started = time.perf_counter()
    parsed = parse_schema(bundled_text("paper.olog"), filename="paper.olog")
    assert validate_schema(parsed) == []
    elapsed = time.perf_counter() - started
    counts = (
        len(parsed.boxes),
        len(parsed.arrows),
        len(parsed.equations),
        len(parsed.fiber_products),
    )
    assert counts == (23, 42, 17, 8)
    assert sorted(b.id for b in parsed.boxes) == [chr(c) for c in range(ord("A"), ord("W") + 1)]
    assert sorted(fp.apex for fp in parsed.fiber_products) == list("ACEFIKLN")
    assert parsed == schema
    notes = (REPO_ROOT / "RECONCILIATION.md").read_text(encoding="utf-8")
    for arrow_id in ("16", "21", "29"):
        assert re.search(rf"\b{arrow_id}\b", notes), f"arrow {arrow_id} undocumented"
    assert elapsed < 1.0
    print(
        "PASS criterion 1: bundled schema validates clean "
        f"(23 boxes, 42 arrows, 17 equations, 8 pullbacks) in {elapsed * 1000:.0f} ms"
    )


def test_criterion_2_pullbacks_match_brute_force():
    cospan = parse_schema(
        'schema "cospan" {\n'
        '  box X "a left foot"\n  box Y "a right foot"\n  box Z "a shared target"\n'
        '  arrow f : X -> Z "lands on"\n  arrow g : Y -> Z "lands on"\n'
        "}"
    )
    rng = random.Random(20260818)
    started = time.perf_counter()
    trials = 0
    for _ in range(120):
        n_z = rng.randint(1, 20)
        zs = [f"z{i:02d}" for i in range(n_z)]
        xs = [f"x{i:02d}" for i in range(rng.randint(0, 20))]
        ys = [f"y{i:02d}" for i in range(rng.randint(0, 20))]
        f_map = {x: rng.choice(zs) for x in xs}
        g_map = {y: rng.choice(zs) for y in ys}
        inst = Instance(
            name="random",
            schema_name="cospan",
            sets={"X": dict.fromkeys(xs), "Y": dict.fromkeys(ys), "Z": dict.fromkeys(zs)},
            functions={"f": f_map, "g": g_map},
        )
        brute = [(x, y) for x in xs for y in ys if f_map[x] == g_map[y]]
        assert compute_pullback(cospan, inst, "f", "g") == brute
        trials += 1
    elapsed = time.perf_counter() - started
    assert trials >= 100
    assert elapsed < 2.0
    print(
        f"PASS criterion 2: {trials} randomized pullbacks equal the brute-force "
        f"filter in {elapsed * 1000:.0f} ms"
    )


def test_criterion_3_lifeline_defaults_are_ductile(schema, protein):
    instance = generate_instance(PROTEIN_DEFAULTS, schema)
    assert instance == protein
    _all_checks_clean(schema, instance)
    chain = build_chain(PROTEIN_DEFAULTS)
    failure = system_failure_extension(chain)
    assert failure == 100.0
    assert PROTEIN_DEFAULTS.glue_failure == 20.6
    assert classify(chain) is Classification.DUCTILE
    assert much_greater(failure, 20.6, Comparators(eps_rel=0.25, kappa=3.0))
    print(
        "PASS criterion 3: lifeline defaults give a clean instance, "
        "system failure 100.0 >> glue 20.6, class Ductile"
    )


def test_criterion_4_no_lifeline_defaults_are_brittle(schema):
    params = SimParams()
    instance = generate_instance(params, schema)
    _all_checks_clean(schema, instance)
    chain = build_chain(params)
    failure = system_failure_extension(chain)
    assert failure == 20.6
    assert classify(chain) is Classification.BRITTLE
    assert roughly_equal(failure, params.glue_failure, Comparators(eps_rel=0.25, kappa=3.0))
    print(
        "PASS criterion 4: dropping the lifeline gives system failure 20.6 "
        "~= glue 20.6, class Brittle"
    )


def test_criterion_5_matched_narratives_are_isomorphic(schema, protein, social):
    code, out = _run_cli(["iso", "paper.olog", "protein.oinst", "social.oinst"])
    assert code == 0
    assert "Found" in out

    result = check_instance_isomorphism(schema, protein, social)
    assert result.outcome is IsoOutcome.FOUND
    mapping = result.mapping
    assert mapping is not None
    for box in schema.boxes:
        per_box = mapping.get(box.id, {})
        assert sorted(per_box) == sorted(protein.elements(box.id))
        assert sorted(per_box.values()) == sorted(social.elements(box.id))
    checked_arrows = 0
    for arrow in schema.arrows:
        lhs = protein.functions.get(arrow.id, {})
        rhs = social.functions.get(arrow.id, {})
        assert len(lhs) == len(rhs)
        for source_elem, image in lhs.items():
            assert mapping[arrow.dst][image] == rhs[mapping[arrow.src][source_elem]]
        checked_arrows += 1
    assert checked_arrows == 42
    total = sum(len(per_box) for per_box in mapping.values())
    print(
        "PASS criterion 5: protein and social instances are isomorphic "
        f"({total} elements; all 42 arrow tables commute with the bijection)"
    )


def test_criterion_6_brick_and_glue_paths_never_conflated(schema, protein, social):
    brick_path = Path("N", ("30", "39"))
    glue_path = Path("N", ("31", "40"))
    from ologkit import eval_path

    for instance in (protein, social):
        elements = instance.elements("N")
        assert len(elements) == 72
        for element in elements:
            assert eval_path(schema, instance, brick_path, element) != eval_path(
                schema, instance, glue_path, element
            )
    for budget in (1, 10, 100, 1_000, 10_000):
        outcome = derive_equality(schema, brick_path, glue_path, budget)
        assert outcome.verdict is EqVerdict.UNKNOWN
    print(
        "PASS criterion 6: paths [30,39] and [31,40] out of N disagree on all "
        "144 elements and are never derived equal up to budget 10^4"
    )


def test_criterion_7_hypothesis_sweep_over_legal_parameters(schema):
    comparators = Comparators()
    rng = random.Random(7)
    for draw in range(50):
        ratio = rng.uniform(1.5 * comparators.kappa, 5.0 * comparators.kappa)
        glue_fail = rng.uniform(1.0, 50.0)
        brick_fail = ratio * glue_fail
        lifeline_fail = brick_fail * rng.uniform(
            1 - comparators.eps_rel / 2, 1 + comparators.eps_rel / 2
        )
        lifeline_rest = glue_fail * rng.uniform(
            1 - comparators.eps_rel / 2, 1 + comparators.eps_rel / 2
        )
        bricks = rng.randint(2, 12)
        with_lifeline = SimParams(
            brick_count=bricks,
            glue_failure=glue_fail,
            brick_failure=brick_fail,
            lifeline_present=True,
            lifeline_resting=lifeline_rest,
            lifeline_failure=lifeline_fail,
            seed=draw,
        )
        without_lifeline = SimParams(
            brick_count=bricks,
            glue_failure=glue_fail,
            brick_failure=brick_fail,
            seed=draw,
        )
        assert classify(build_chain(with_lifeline), comparators) is Classification.DUCTILE
        assert classify(build_chain(without_lifeline), comparators) is Classification.BRITTLE
        for params in (with_lifeline, without_lifeline):
            instance = generate_instance(params, schema)
            _all_checks_clean(schema, instance)
    print(
        "PASS criterion 7: 50 seeded parameter draws all classify Ductile with a "
        "lifeline and Brittle without, and every generated instance checks clean"
    )


def test_criterion_8_noise_threshold_matches_closed_form():
    exact = link_failure_noise(0.5, 50)
    assert abs(exact - (1 - 0.5 ** (1 / 50))) < 1e-6
    estimate = estimate_link_failure_noise_mc(50, 0.5, trials=100_000, seed=1)
    assert abs(estimate - exact) < 2e-3
    thresholds = [link_failure_noise(0.5, length) for length in (1, 10, 50, 300)]
    assert all(a > b for a, b in zip(thresholds, thresholds[1:]))
    # a one-in-a-hundred per-letter error rate sits within the same order of
    # magnitude as the fifty-letter threshold
    assert 0.1 * exact <= 0.01 <= 10.0 * exact
    print(
        f"PASS criterion 8: link noise threshold {exact:.6f} matches closed form, "
        f"Monte Carlo within {abs(estimate - exact):.2e}, monotone in length"
    )


def test_criterion_9_roundtrip_and_report_determinism():
    schema_text = bundled_text("paper.olog")
    canonical = serialize_schema(parse_schema(schema_text))
    assert serialize_schema(parse_schema(canonical)) == canonical
    golden = (FsPath(__file__).parent / "golden" / "paper.canonical.olog").read_text(
        encoding="utf-8"
    )
    assert canonical == golden
    for name in ("protein.oinst", "social.oinst"):
        text = bundled_text(name)
        assert serialize_instance(parse_instance(text)) == text

    code_a, out_a = _run_cli(["analogy"])
    code_b, out_b = _run_cli(["analogy"])
    assert code_a == code_b == 0
    lines_a = out_a.rstrip("\n").split("\n")
    lines_b = out_b.rstrip("\n").split("\n")
    assert lines_a[-1].startswith("elapsed_ms: ")
    assert lines_a[:-1] == lines_b[:-1]
    print(
        "PASS criterion 9: canonical text is a serialize/parse fixed point and "
        "repeated analogy reports agree byte for byte outside the timer line"
    )
