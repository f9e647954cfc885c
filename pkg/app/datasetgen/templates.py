"""
Loop template families.

Five families start from published vectorization examples (type-cast pairs,
2-D init, predicate, matmul, complex-arith pairs); the others follow common
loop-vectorizer test motifs. Each builder fills identifiers, trip counts,
strides, element types and operators from the generator it is handed, and
always leaves the element type visible in the loop text through a typed
temporary or a cast.
"""

from typing import Dict, List, Sequence, Set

import numpy as np

from app.datasetgen.constants import (
    ARITH_OPS,
    ARRAY_NAMES,
    BITWISE_OPS,
    ELEM_WIDTHS,
    FLOAT_TYPES,
    INDEX_NAMES,
    INNER_TRIP_COUNTS,
    INT_TYPES,
    OUTER_TRIP_COUNTS,
    SCALAR_NAMES,
    STRIDES,
)
from app.datasetgen.views import KernelSpec, LoopTemplate
from app.errors import UnknownTemplateError


def _pick(rng: np.random.Generator, options: Sequence):
    return options[int(rng.integers(len(options)))]


class _Names:
    """Draws distinct identifiers for one program."""

    def __init__(self, rng: np.random.Generator):
        self._rng = rng
        self._used: Set[str] = set()

    def _draw(self, pool: Sequence[str], count: int) -> List[str]:
        free = [name for name in pool if name not in self._used]
        picked = [free[int(i)] for i in self._rng.choice(len(free), size=count, replace=False)]
        self._used.update(picked)
        return picked

    def arrays(self, count: int) -> List[str]:
        return self._draw(ARRAY_NAMES, count)

    def array(self) -> str:
        return self.arrays(1)[0]

    def scalar(self) -> str:
        return self._draw(SCALAR_NAMES, 1)[0]

    def indices(self, count: int) -> List[str]:
        return self._draw(INDEX_NAMES, count)


def _any_type(rng: np.random.Generator) -> str:
    width = _pick(rng, ELEM_WIDTHS)
    if width in FLOAT_TYPES and rng.random() < 0.5:
        return FLOAT_TYPES[width]
    return INT_TYPES[width]


def _int_type(rng: np.random.Generator) -> str:
    return INT_TYPES[_pick(rng, ELEM_WIDTHS)]


def _for(var: str, bound: str, lines: List[str], step: int = 1) -> List[str]:
    increment = f"{var}++" if step == 1 else f"{var} += {step}"
    return [f"for ({var} = 0; {var} < {bound}; {increment}) {{", *("    " + line for line in lines), "}"]


def _decl_indices(names: List[str]) -> str:
    return f"int {', '.join(names)};"


def _arrays(ctype: str, names: List[str], size: str) -> List[str]:
    return [f"{ctype} {name}[{size}];" for name in names]


def _inner(rng: np.random.Generator, options: Sequence[int] = INNER_TRIP_COUNTS) -> int:
    return int(_pick(rng, options))


def assignment(rng: np.random.Generator) -> KernelSpec:
    names = _Names(rng)
    ctype = _any_type(rng)
    n = _inner(rng)
    step = int(_pick(rng, STRIDES))
    copies = int(rng.integers(1, 4))
    (i,) = names.indices(1)
    dsts, srcs = names.arrays(copies), names.arrays(copies)
    lines = [f"{d}[{i}] = ({ctype}) {s}[{i}];" for d, s in zip(dsts, srcs)]
    return KernelSpec(
        defines={"N": n},
        globals=_arrays(ctype, dsts + srcs, "N"),
        body=[_decl_indices([i]), *_for(i, "N", lines, step)],
        params={"n": n, "type": ctype, "step": step, "copies": copies},
    )


def reduction(rng: np.random.Generator) -> KernelSpec:
    """Dot-product style accumulation into a scalar."""
    names = _Names(rng)
    ctype = _any_type(rng)
    n = _inner(rng)
    (i,) = names.indices(1)
    x, y = names.arrays(2)
    acc, sink = names.scalar(), names.scalar()
    variant = _pick(rng, ("dot", "sum", "bitwise") if ctype in INT_TYPES.values() else ("dot", "sum"))
    if variant == "dot":
        update = f"{acc} += {x}[{i}] * {y}[{i}];"
    elif variant == "sum":
        update = f"{acc} += {x}[{i}] {_pick(rng, ('+', '-'))} {y}[{i}];"
    else:
        update = f"{acc} {_pick(rng, BITWISE_OPS)}= {x}[{i}] ^ {y}[{i}];"
    lines = [f"{ctype} v = {x}[{i}];", update.replace(f"{x}[{i}]", "v", 1)]
    return KernelSpec(
        defines={"N": n},
        globals=[*_arrays(ctype, [x, y], "N"), f"{ctype} {sink};"],
        body=[_decl_indices([i]), f"{ctype} {acc} = 0;", *_for(i, "N", lines), f"{sink} = {acc};"],
        params={"n": n, "type": ctype, "variant": variant},
    )


def strided(rng: np.random.Generator) -> KernelSpec:
    names = _Names(rng)
    ctype = _any_type(rng)
    n = _inner(rng)
    stride = int(_pick(rng, STRIDES[1:]))
    (i,) = names.indices(1)
    a, b, c = names.arrays(3)
    op = _pick(rng, ARITH_OPS)
    offset = int(rng.integers(stride))
    sub = f"{stride} * {i}" if offset == 0 else f"{stride} * {i} + {offset}"
    lines = [f"{ctype} v = {b}[{sub}] {op} {c}[{sub}];", f"{a}[{i}] = v;"]
    return KernelSpec(
        defines={"N": n},
        globals=[*_arrays(ctype, [a], "N"), *_arrays(ctype, [b, c], str(n * stride))],
        body=[_decl_indices([i]), *_for(i, "N", lines)],
        params={"n": n, "type": ctype, "stride": stride, "op": op},
    )


def predicate(rng: np.random.Generator) -> KernelSpec:
    """Clamp through a ternary or a guarded store."""
    names = _Names(rng)
    ctype = _any_type(rng)
    n = _inner(rng)
    limit = int(rng.integers(1, 100))
    (i,) = names.indices(1)
    a, b = names.arrays(2)
    if rng.random() < 0.5:
        lines = [f"{ctype} v = {a}[{i}];", f"{b}[{i}] = (v > LIMIT ? LIMIT : 0);"]
        variant = "ternary"
    else:
        lines = [f"{ctype} v = {a}[{i}];", "if (v > LIMIT) {", f"    {b}[{i}] = v;", "}"]
        variant = "if"
    return KernelSpec(
        defines={"N": n, "LIMIT": limit},
        globals=_arrays(ctype, [a, b], "N"),
        body=[_decl_indices([i]), *_for(i, "N", lines)],
        params={"n": n, "type": ctype, "limit": limit, "variant": variant},
    )


def type_cast(rng: np.random.Generator) -> KernelSpec:
    """Pairs of widening conversions over an unrolled-by-two loop."""
    names = _Names(rng)
    src_width = int(_pick(rng, ELEM_WIDTHS[:-1]))
    dst_width = int(_pick(rng, [w for w in ELEM_WIDTHS if w > src_width]))
    src_type = INT_TYPES[src_width]
    dst_type = FLOAT_TYPES[dst_width] if dst_width in FLOAT_TYPES and rng.random() < 0.5 else INT_TYPES[dst_width]
    n = _inner(rng)
    pairs = int(rng.integers(1, 4))
    (i,) = names.indices(1)
    dsts, srcs = names.arrays(pairs), names.arrays(pairs)
    lines: List[str] = []
    for d, s in zip(dsts, srcs):
        lines.append(f"{d}[{i}] = ({dst_type}) {s}[{i}];")
        lines.append(f"{d}[{i} + 1] = ({dst_type}) {s}[{i} + 1];")
    return KernelSpec(
        defines={"N": n},
        globals=[*_arrays(dst_type, dsts, "N"), *_arrays(src_type, srcs, "N")],
        body=[_decl_indices([i]), *_for(i, "N - 1", lines, step=2)],
        params={"n": n, "src_type": src_type, "dst_type": dst_type, "pairs": pairs},
    )


def init_2d(rng: np.random.Generator) -> KernelSpec:
    names = _Names(rng)
    ctype = _any_type(rng)
    m, n = int(_pick(rng, OUTER_TRIP_COUNTS)), _inner(rng)
    i, j = names.indices(2)
    grid = names.array()
    x = names.scalar()
    if rng.random() < 0.5:
        store = f"{grid}[{i}][{j}] = ({ctype}) {x};"
        variant = "broadcast"
    else:
        store = f"{grid}[{i}][{j}] = ({ctype}) ({i} + {j});"
        variant = "index"
    return KernelSpec(
        defines={"M": m, "N": n},
        globals=[f"{ctype} {grid}[M][N];", f"{ctype} {x};"],
        body=[_decl_indices([i, j]), *_for(i, "M", _for(j, "N", [store]))],
        params={"m": m, "n": n, "type": ctype, "variant": variant},
    )


def matmul(rng: np.random.Generator) -> KernelSpec:
    """Three-level scaled matrix product in ijk or ikj order."""
    names = _Names(rng)
    ctype = _pick(rng, tuple(FLOAT_TYPES.values()))
    m, l = int(_pick(rng, OUTER_TRIP_COUNTS)), int(_pick(rng, OUTER_TRIP_COUNTS))
    n = _inner(rng, INNER_TRIP_COUNTS[:-1])
    i, j, k = names.indices(3)
    a, b, c = names.arrays(3)
    alpha = names.scalar()
    if rng.random() < 0.5:
        order = "ijk"
        inner = _for(k, "N", [f"dot += {alpha} * {a}[{i}][{k}] * {b}[{k}][{j}];"])
        nest = _for(i, "M", _for(j, "L", [f"{ctype} dot = 0;", *inner, f"{c}[{i}][{j}] = dot;"]))
    else:
        order = "ikj"
        inner = _for(j, "L", [f"{c}[{i}][{j}] += ({ctype}) ({alpha} * {a}[{i}][{k}] * {b}[{k}][{j}]);"])
        nest = _for(i, "M", _for(k, "N", inner))
    return KernelSpec(
        defines={"M": m, "L": l, "N": n},
        globals=[f"{ctype} {a}[M][N];", f"{ctype} {b}[N][L];", f"{ctype} {c}[M][L];", f"{ctype} {alpha};"],
        body=[_decl_indices([i, j, k]), *nest],
        params={"m": m, "l": l, "n": n, "type": ctype, "order": order},
    )


def complex_pairs(rng: np.random.Generator) -> KernelSpec:
    """Complex multiply over interleaved real/imaginary arrays."""
    names = _Names(rng)
    ctype = _any_type(rng)
    n = _inner(rng)
    (i,) = names.indices(1)
    re, im, b, c = names.arrays(4)
    lines = [
        f"{re}[{i}] = ({ctype}) ({b}[2 * {i} + 1] * {c}[2 * {i} + 1] - {b}[2 * {i}] * {c}[2 * {i}]);",
        f"{im}[{i}] = ({ctype}) ({b}[2 * {i}] * {c}[2 * {i} + 1] + {b}[2 * {i} + 1] * {c}[2 * {i}]);",
    ]
    return KernelSpec(
        defines={"N": n},
        globals=[*_arrays(ctype, [re, im], str(n // 2)), *_arrays(ctype, [b, c], "N")],
        body=[_decl_indices([i]), *_for(i, "N / 2 - 1", lines)],
        params={"n": n, "type": ctype},
    )


def bitwise(rng: np.random.Generator) -> KernelSpec:
    names = _Names(rng)
    ctype = _int_type(rng)
    n = _inner(rng)
    mask, shift = int(rng.integers(1, 256)), int(rng.integers(1, 4))
    first, second = _pick(rng, BITWISE_OPS), _pick(rng, BITWISE_OPS)
    (i,) = names.indices(1)
    a, b, c = names.arrays(3)
    lines = [f"{a}[{i}] = ({ctype}) (({b}[{i}] {first} MASK) {second} ({c}[{i}] << SHIFT));"]
    return KernelSpec(
        defines={"N": n, "MASK": mask, "SHIFT": shift},
        globals=_arrays(ctype, [a, b, c], "N"),
        body=[_decl_indices([i]), *_for(i, "N", lines)],
        params={"n": n, "type": ctype, "ops": [first, second], "mask": mask, "shift": shift},
    )


def min_max(rng: np.random.Generator) -> KernelSpec:
    """Elementwise or reducing min/max written with the ternary operator."""
    names = _Names(rng)
    ctype = _any_type(rng)
    n = _inner(rng)
    cmp = _pick(rng, (">", "<"))
    (i,) = names.indices(1)
    if rng.random() < 0.5:
        a, b, out = names.arrays(3)
        lines = [f"{ctype} v = ({a}[{i}] {cmp} {b}[{i}] ? {a}[{i}] : {b}[{i}]);", f"{out}[{i}] = v;"]
        return KernelSpec(
            defines={"N": n},
            globals=_arrays(ctype, [a, b, out], "N"),
            body=[_decl_indices([i]), *_for(i, "N", lines)],
            params={"n": n, "type": ctype, "cmp": cmp, "variant": "elementwise"},
        )
    a = names.array()
    best, sink = names.scalar(), names.scalar()
    lines = [f"{ctype} v = {a}[{i}];", f"{best} = (v {cmp} {best} ? v : {best});"]
    return KernelSpec(
        defines={"N": n},
        globals=[*_arrays(ctype, [a], "N"), f"{ctype} {sink};"],
        body=[_decl_indices([i]), f"{ctype} {best} = {a}[0];", *_for(i, "N", lines), f"{sink} = {best};"],
        params={"n": n, "type": ctype, "cmp": cmp, "variant": "reduce"},
    )


def gather(rng: np.random.Generator) -> KernelSpec:
    """Indirect loads through an index array."""
    names = _Names(rng)
    ctype = _any_type(rng)
    n = _inner(rng)
    op = _pick(rng, ARITH_OPS)
    (i,) = names.indices(1)
    a, b, c, idx = names.arrays(4)
    lines = [f"{ctype} v = {b}[{idx}[{i}]] {op} {c}[{i}];", f"{a}[{i}] = v;"]
    return KernelSpec(
        defines={"N": n},
        globals=[*_arrays(ctype, [a, b, c], "N"), f"int {idx}[N];"],
        body=[_decl_indices([i]), *_for(i, "N", lines)],
        params={"n": n, "type": ctype, "op": op},
    )


def mixed_width(rng: np.random.Generator) -> KernelSpec:
    """Narrow inputs accumulated into a wide output array."""
    names = _Names(rng)
    narrow_width = int(_pick(rng, ELEM_WIDTHS[:-1]))
    wide_width = int(_pick(rng, [w for w in ELEM_WIDTHS if w > narrow_width]))
    narrow, wide = INT_TYPES[narrow_width], INT_TYPES[wide_width]
    n = _inner(rng)
    op = _pick(rng, ARITH_OPS)
    (i,) = names.indices(1)
    w, x, y = names.arrays(3)
    lines = [f"{w}[{i}] += ({wide}) {x}[{i}] {op} ({wide}) {y}[{i}];"]
    return KernelSpec(
        defines={"N": n},
        globals=[*_arrays(wide, [w], "N"), *_arrays(narrow, [x, y], "N")],
        body=[_decl_indices([i]), *_for(i, "N", lines)],
        params={"n": n, "narrow": narrow, "wide": wide, "op": op},
    )


DEFAULT_TEMPLATES: List[LoopTemplate] = [
    LoopTemplate("assignment", "element copies with an optional loop step", assignment),
    LoopTemplate("reduction", "scalar accumulation over one or two arrays", reduction),
    LoopTemplate("strided", "loads with a constant stride of 2 or 4", strided),
    LoopTemplate("predicate", "clamp through a ternary or a guarded store", predicate),
    LoopTemplate("type_cast", "widening conversions over an unrolled-by-two loop", type_cast),
    LoopTemplate("init_2d", "two-level initialization of a 2-D array", init_2d),
    LoopTemplate("matmul", "three-level scaled matrix product", matmul),
    LoopTemplate("complex_pairs", "complex multiply over interleaved arrays", complex_pairs),
    LoopTemplate("bitwise", "masks and shifts over integer arrays", bitwise),
    LoopTemplate("min_max", "min/max through the ternary operator", min_max),
    LoopTemplate("gather", "indirect loads through an index array", gather),
    LoopTemplate("mixed_width", "narrow inputs accumulated into a wide array", mixed_width),
]

TEMPLATES_BY_ID: Dict[str, LoopTemplate] = {t.template_id: t for t in DEFAULT_TEMPLATES}


def select_templates(template_ids: Sequence[str] = ()) -> List[LoopTemplate]:
    """Templates by id in the given order; all defaults when none are named."""
    if not template_ids:
        return list(DEFAULT_TEMPLATES)
    unknown = [t for t in template_ids if t not in TEMPLATES_BY_ID]
    if unknown:
        raise UnknownTemplateError(
            detail=f"Unknown templates: {', '.join(unknown)}", context={"unknown": unknown}
        )
    return [TEMPLATES_BY_ID[t] for t in template_ids]
