#!/usr/bin/env python3
"""Regenerate the bundled 50-record sample dataset (src/sbcr/data/sample_conflicts.jsonl).

The records are synthetic but shaped like real combination-resolved conflicts:
both versions share context lines inherited from a base, each side adds or
edits a few lines, and the ground-truth resolution interleaves lines from
both sides without reordering either one. A handful of records exercise the
edge shapes (one empty side, one-side-only resolutions, non-ASCII content).
"""

import json
import random
import sys
from pathlib import Path

OUT = Path(__file__).resolve().parent.parent / "src" / "sbcr" / "data" / "sample_conflicts.jsonl"
SEED = 20240817
N_RECORDS = 50

PROJECTS = [
    ("keystone/orbit-cache", "Java", "src/main/java/io/orbit/CacheRegistry.java"),
    ("keystone/orbit-cache", "Java", "src/main/java/io/orbit/EvictionPolicy.java"),
    ("meadowlark/ledgerd", "Java", "core/src/LedgerWriter.java"),
    ("meadowlark/ledgerd", "Java", "core/src/SnapshotCodec.java"),
    ("brightwater/formkit", "CSharp", "FormKit/Validation/RuleSet.cs"),
    ("brightwater/formkit", "CSharp", "FormKit/Binding/ModelBinder.cs"),
    ("calder/route-ui", "JavaScript", "src/router/history.js"),
    ("calder/route-ui", "JavaScript", "src/router/guards.js"),
    ("pinefield/tracegl", "TypeScript", "src/scene/Camera.ts"),
    ("pinefield/tracegl", "TypeScript", "src/scene/Mesh.ts"),
]

IDENTIFIERS = [
    "registry", "policy", "writer", "codec", "ruleSet", "binder", "history",
    "guards", "camera", "mesh", "buffer", "cursor", "retries", "timeout",
    "handler", "options", "payload", "snapshot", "entry", "limit",
]

STATEMENTS = [
    "return {0};",
    "this.{0} = {0};",
    "if ({0} == null) {{",
    "    throw new IllegalStateException();",
    "}}",
    "int {0} = compute();",
    "var {0} = resolve();",
    "const {0} = load();",
    "let {0} = next();",
    "{0}.close();",
    "{0}.flush();",
    "log.debug(\"{0}\");",
    "// update {0} before commit",
    "{0} += 1;",
    "await {0}.sync();",
]


def make_line(rng: random.Random, indent: int) -> str:
    template = rng.choice(STATEMENTS)
    return " " * indent + template.format(rng.choice(IDENTIFIERS))


def make_base(rng: random.Random) -> list[str]:
    indent = rng.choice([0, 4, 8])
    return [make_line(rng, indent) for _ in range(rng.randint(2, 5))]


def edit_version(rng: random.Random, base: list[str]) -> list[str]:
    """Derive one conflicting version: keep most of the base, tweak and insert lines."""
    version = []
    indent = len(base[0]) - len(base[0].lstrip()) if base else 4
    for line in base:
        roll = rng.random()
        if roll < 0.15:
            continue  # deleted by this side
        if roll < 0.35:
            version.append(make_line(rng, indent))  # rewritten
        else:
            version.append(line)
        if rng.random() < 0.3:
            version.append(make_line(rng, indent))  # inserted after
    while rng.random() < 0.4:
        version.append(make_line(rng, indent))
    return version


def interleave_resolution(rng: random.Random, v1: list[str], v2: list[str]) -> list[str]:
    """Build a ground truth: keep most lines of both sides, merge without reordering,
    and avoid double-taking lines the two sides share (the inherited context)."""
    keep1 = [line for line in v1 if rng.random() < 0.9]
    seen = set(keep1)
    keep2 = []
    for line in v2:
        if line in seen and rng.random() < 0.85:
            continue  # shared context line already taken from v1
        if rng.random() < 0.9:
            keep2.append(line)
    merged = []
    i = j = 0
    while i < len(keep1) and j < len(keep2):
        r1, r2 = len(keep1) - i, len(keep2) - j
        if rng.random() * (r1 + r2) < r1:
            merged.append(keep1[i])
            i += 1
        else:
            merged.append(keep2[j])
            j += 1
    merged.extend(keep1[i:])
    merged.extend(keep2[j:])
    return merged


def make_record(rng: random.Random, index: int) -> dict:
    project, language, path = PROJECTS[index % len(PROJECTS)]
    base = make_base(rng)
    v1 = edit_version(rng, base)
    v2 = edit_version(rng, base)
    if not v1 and not v2:
        v1 = [make_line(rng, 4)]

    shape = index % 10
    if shape == 7:
        # one-sided chunk (one version deleted everything)
        v1 = []
        resolution = [line for line in v2 if rng.random() < 0.6] or v2[:1]
    elif shape == 8:
        # developer took one side wholesale
        resolution = list(v1) if rng.random() < 0.5 else list(v2)
    else:
        resolution = interleave_resolution(rng, v1, v2)

    if shape == 9:
        comment = "    // registro pendiente de revisión"
        v1 = [comment] + v1
        resolution = [comment] + resolution

    return {
        "id": f"sample-{index:04d}",
        "project": project,
        "commit": "".join(rng.choice("0123456789abcdef") for _ in range(40)),
        "path": path,
        "language": language,
        "base": base,
        "v1": v1,
        "v2": v2,
        "resolution": resolution,
    }


def main() -> int:
    rng = random.Random(SEED)
    records = [make_record(rng, i) for i in range(N_RECORDS)]
    OUT.parent.mkdir(parents=True, exist_ok=True)
    with OUT.open("w", encoding="utf-8") as fh:
        for record in records:
            fh.write(json.dumps(record, ensure_ascii=False) + "\n")
    print(f"wrote {len(records)} records to {OUT}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
