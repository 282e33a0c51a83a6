#!/usr/bin/env python3
"""Regenerate the derived data files from the hand-written schema.

Rewrites, deterministically:
  * src/ologkit/data/protein.oinst  — nine-brick lifeline chain (ductile)
  * src/ologkit/data/social.oinst   — the matched social-network twin
  * tests/golden/paper.canonical.olog — canonical serialization of the schema

Run from anywhere; paths are resolved relative to this file.
"""

from pathlib import Path
import sys

ROOT = Path(__file__).resolve().parent.parent
sys.path.insert(0, str(ROOT / "src"))

from ologkit.chains import PROTEIN_DEFAULTS, SOCIAL_MATCHED_DEFAULTS, generate_instance
from ologkit.dsl import parse_schema, serialize_instance, serialize_schema


def main() -> None:
    data = ROOT / "src" / "ologkit" / "data"
    schema = parse_schema((data / "paper.olog").read_text(encoding="utf-8"), "paper.olog")

    golden = ROOT / "tests" / "golden" / "paper.canonical.olog"
    golden.parent.mkdir(parents=True, exist_ok=True)
    golden.write_text(serialize_schema(schema), encoding="utf-8")
    print(f"wrote {golden}")

    for params, filename in (
        (PROTEIN_DEFAULTS, "protein.oinst"),
        (SOCIAL_MATCHED_DEFAULTS, "social.oinst"),
    ):
        instance = generate_instance(params, schema)
        out = data / filename
        out.write_text(serialize_instance(instance), encoding="utf-8")
        total = sum(len(elems) for elems in instance.sets.values())
        print(f"wrote {out} ({total} elements)")


if __name__ == "__main__":
    main()
