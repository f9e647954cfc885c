"""Corpus generation: instantiate templates, write programs, split and record the manifest."""

import hashlib
import json
import logging
from collections import Counter
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Union

import numpy as np
from pydantic import ValidationError
from sklearn.model_selection import train_test_split

from app.config import LOGGER_NAME
from app.datasetgen.constants import (
    DEFAULT_REPS,
    DEFAULT_TRAIN_FRACTION,
    KERNEL_NAME,
    MANIFEST_FILE,
    PROGRAM_DIR,
    PROGRAM_FILE,
    PROGRAM_ID,
    REPS_MACRO,
    SPLIT_TEST,
    SPLIT_TRAIN,
)
from app.datasetgen.views import DatasetManifest, KernelSpec, LoopTemplate, ProgramRecord
from app.errors import ConfigurationError, CSyntaxError, DatasetError, TemplateInstantiationError
from app.loop_ir.constants import HARNESS_FUNCTION
from app.loop_ir.nests import load_program
from app.loop_ir.normalize import normalize_identifiers
from app.loop_ir.views import LoopNest
from app.timing import timing_decorator

logger = logging.getLogger(LOGGER_NAME)

_HARNESS = [
    "int main(void)",
    "{",
    "    int r;",
    "    clock_t start = clock();",
    f"    for (r = 0; r < {REPS_MACRO}; r++) {{",
    f"        {KERNEL_NAME}();",
    "    }",
    "    clock_t stop = clock();",
    '    printf("%.9f\\n", (double) (stop - start) / CLOCKS_PER_SEC);',
    "    return 0;",
    "}",
]


def render_program(program_id: str, template_id: str, spec: KernelSpec, reps: int = DEFAULT_REPS) -> str:
    """A standalone C file: the kernel plus a driver printing its time in seconds."""
    lines = [f"/* {program_id}: {template_id} */", "#include <stdio.h>", "#include <time.h>", ""]
    lines.extend(f"#define {name} {value}" for name, value in spec.defines.items())
    lines.append(f"#define {REPS_MACRO} {reps}")
    lines.append("")
    lines.extend(spec.globals)
    lines.extend(["", f"void {KERNEL_NAME}(void)", "{"])
    lines.extend("    " + line for line in spec.body)
    lines.extend(["}", ""])
    lines.extend(_HARNESS)
    return "\n".join(lines) + "\n"


def program_nests(source: str, path: str) -> List[LoopNest]:
    """Loop nests of a generated program, ignoring the timing driver."""
    _, nests = load_program(source, file=path, skip_functions=frozenset({HARNESS_FUNCTION}))
    return nests


def normalized_digest(nests: Sequence[LoopNest]) -> str:
    text = "\n".join(normalize_identifiers(nest.embed_snippet)[0] for nest in nests)
    return hashlib.sha256(text.encode("utf-8")).hexdigest()


def _instantiate(
    templates: Sequence[LoopTemplate], seed: int, out_dir: Path, reps: int, index: int
) -> ProgramRecord:
    template = templates[index % len(templates)]
    program_id = PROGRAM_ID.format(index=index)
    rng = np.random.default_rng([seed, index])
    spec = template.build(rng)
    source = render_program(program_id, template.template_id, spec, reps)
    relative = f"{PROGRAM_DIR}/{PROGRAM_FILE.format(program_id=program_id)}"
    try:
        nests = program_nests(source, relative)
    except CSyntaxError as e:
        logger.error("Template %s produced unparsable code", template.template_id, exc_info=True)
        raise TemplateInstantiationError(
            detail=f"Template {template.template_id} produced unparsable code: {e.detail}",
            context={"template_id": template.template_id, "program_id": program_id},
        )
    if not nests:
        raise TemplateInstantiationError(
            detail=f"Template {template.template_id} produced a program without loops",
            context={"template_id": template.template_id, "program_id": program_id},
        )

    with (out_dir / relative).open("w", encoding="utf-8", newline="\n") as handle:
        handle.write(source)
    return ProgramRecord(
        program_id=program_id,
        template_id=template.template_id,
        path=relative,
        split=SPLIT_TRAIN,
        features=template.features(nests[0]),
        nest_count=len(nests),
        normalized_digest=normalized_digest(nests),
        params=json.loads(json.dumps(spec.params)),
    )


def flag_duplicates(records: List[ProgramRecord]) -> List[ProgramRecord]:
    """Mark records whose normalized loops equal an earlier record's."""
    first_seen: Dict[str, str] = {}
    flagged: List[ProgramRecord] = []
    for record in records:
        original = first_seen.setdefault(record.normalized_digest, record.program_id)
        if original != record.program_id:
            record = record.model_copy(update={"duplicate_of": original})
        flagged.append(record)
    duplicates = sum(1 for record in flagged if record.duplicate_of)
    if duplicates:
        logger.warning("%d of %d programs duplicate an earlier program after normalization", duplicates, len(records))
    return flagged


def split_programs(
    program_ids: Sequence[str], template_ids: Sequence[str], train_fraction: float, seed: int
) -> Dict[str, str]:
    """
    Assign each program to the train or test split.

    The split is stratified by template when every template has at least two
    programs; afterwards every template missing from the test split borrows
    one of its train programs in exchange for a test program of the template
    most represented there.

    Returns:
        program_id -> "train" | "test"
    """
    n = len(program_ids)
    if n < 2 or train_fraction >= 1.0:
        return {pid: SPLIT_TRAIN for pid in program_ids}

    test_size = min(n - 1, max(1, int(round(n * (1.0 - train_fraction)))))
    family_of = dict(zip(program_ids, template_ids))
    families = sorted(set(template_ids))
    counts = Counter(template_ids)
    stratify = None
    if min(counts.values()) >= 2 and test_size >= len(families) and n - test_size >= len(families):
        stratify = list(template_ids)
    train_ids, test_ids = train_test_split(
        list(program_ids), test_size=test_size, random_state=seed, stratify=stratify
    )
    train, test = set(train_ids), set(test_ids)

    if len(test) < len(families):
        logger.warning("Test split of %d programs cannot cover %d templates", len(test), len(families))
    else:
        for family in families:
            if any(family_of[pid] == family for pid in test):
                continue
            candidates = sorted(pid for pid in train if family_of[pid] == family)
            test_counts = Counter(family_of[pid] for pid in test)
            donor_family = max(sorted(test_counts), key=lambda f: test_counts[f])
            if not candidates or test_counts[donor_family] < 2:
                continue
            donor = max(pid for pid in test if family_of[pid] == donor_family)
            test.remove(donor)
            train.add(donor)
            train.remove(candidates[-1])
            test.add(candidates[-1])
    return {pid: SPLIT_TEST if pid in test else SPLIT_TRAIN for pid in program_ids}


def write_manifest(manifest: DatasetManifest, path: Union[str, Path]) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", encoding="utf-8", newline="\n") as handle:
        handle.write(manifest.model_dump_json(indent=2, by_alias=True) + "\n")
    return path


def load_manifest(path: Union[str, Path]) -> DatasetManifest:
    """
    Raises:
        DatasetError: the file is missing or is not a manifest
    """
    path = Path(path)
    if path.is_dir():
        path = path / MANIFEST_FILE
    if not path.exists():
        raise DatasetError(detail=f"Manifest {path} does not exist", context={"path": str(path)})
    try:
        return DatasetManifest.model_validate_json(path.read_text(encoding="utf-8"))
    except ValidationError as e:
        raise DatasetError(detail=f"Invalid manifest {path}: {e}", context={"path": str(path)})


def load_nests(
    manifest: DatasetManifest, root: Union[str, Path], split: Optional[str] = None
) -> Dict[str, LoopNest]:
    """First loop nest of every program (of one split when given), keyed by program_id."""
    root = Path(root)
    nests: Dict[str, LoopNest] = {}
    for record in manifest.records:
        if split is not None and record.split != split:
            continue
        source = (root / record.path).read_text(encoding="utf-8")
        found = program_nests(source, record.path)
        if not found:
            raise DatasetError(detail=f"{record.path} has no loop nest", context={"program_id": record.program_id})
        nests[record.program_id] = found[0]
    return nests


@timing_decorator
def generate(
    templates: Sequence[LoopTemplate],
    count: int,
    seed: int,
    out_dir: Union[str, Path],
    train_fraction: float = DEFAULT_TRAIN_FRACTION,
    reps: int = DEFAULT_REPS,
    workers: int = 1,
) -> DatasetManifest:
    """
    Write `count` programs under out_dir/programs and the manifest under out_dir.

    Program i instantiates templates[i % len(templates)] with a generator seeded
    by (seed, i), so the corpus is byte-identical for identical arguments
    regardless of `workers`.

    Raises:
        ConfigurationError: count < 1, no templates or a negative seed
        TemplateInstantiationError: a template produced unparsable code
    """
    if count < 1:
        raise ConfigurationError(detail=f"count must be at least 1, got {count}")
    if not templates:
        raise ConfigurationError(detail="No templates to instantiate")
    if seed < 0:
        raise ConfigurationError(detail=f"seed must be non-negative, got {seed}")

    out_dir = Path(out_dir)
    (out_dir / PROGRAM_DIR).mkdir(parents=True, exist_ok=True)

    def build(index: int) -> ProgramRecord:
        return _instantiate(templates, seed, out_dir, reps, index)

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            records = list(pool.map(build, range(count)))
    else:
        records = [build(index) for index in range(count)]

    records = flag_duplicates(records)
    splits = split_programs(
        [r.program_id for r in records], [r.template_id for r in records], train_fraction, seed
    )
    records = [r.model_copy(update={"split": splits[r.program_id]}) for r in records]

    manifest = DatasetManifest(
        seed=seed,
        count=count,
        train_fraction=train_fraction,
        test_fraction=round(1.0 - train_fraction, 10),
        templates=[t.template_id for t in templates],
        records=records,
    )
    write_manifest(manifest, out_dir / MANIFEST_FILE)
    logger.info(
        "Generated %d programs from %d templates in %s (%d train / %d test)",
        count, len(templates), out_dir,
        len(manifest.split_ids(SPLIT_TRAIN)), len(manifest.split_ids(SPLIT_TEST)),
    )
    return manifest
