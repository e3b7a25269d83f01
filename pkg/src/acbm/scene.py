"""Line-oriented scene files: a structure, a source of F and an optional group element.

Format (one record per line, ``#`` starts a comment)::

    version 1
    n 1
    phi 0 1 0 -1 0 0 0 0 0          # d*d numbers, row-major
    xi 0 0 1
    eta 0 0 1
    g 1 0 0 0 -1 0 0 0 1
    F ...                          # d^3 numbers, index order (x, y, z)
    conformal 0.1 0.2 0.3          # u v w
    du ...
    dv ...
    dw ...

Instead of ``F`` a scene may give ``weingarten`` (d*d numbers) or
``generator <class> <seed>`` with an optional ``params`` line.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .classes import BASIC_CLASSES, construct_class, construct_from_weingarten, random_params
from .conformal import ConformalPointData
from .structure import Structure

VERSION = 1
_FIELD_ORDER = ("n", "phi", "xi", "eta", "g", "F", "weingarten", "generator", "params",
                "conformal", "du", "dv", "dw")


class ParseError(ValueError):
    def __init__(self, message: str, line: int | None = None, field: str | None = None):
        loc = []
        if line is not None:
            loc.append(f"line {line}")
        if field is not None:
            loc.append(f"field {field!r}")
        super().__init__(f"{', '.join(loc)}: {message}" if loc else message)
        self.line = line
        self.field = field


@dataclass(frozen=True)
class Generator:
    class_id: str
    seed: int
    params: np.ndarray | None = None


@dataclass(frozen=True, eq=False)
class Scene:
    structure: Structure
    F: np.ndarray | None = None
    weingarten: np.ndarray | None = None
    generator: Generator | None = None
    conformal: ConformalPointData | None = None

    @property
    def has_F(self) -> bool:
        return any(x is not None for x in (self.F, self.weingarten, self.generator))

    def resolve_F(self) -> np.ndarray:
        """The fundamental tensor supplied by whichever block is present."""
        s = self.structure
        if self.F is not None:
            return np.array(self.F)
        if self.weingarten is not None:
            return construct_from_weingarten(self.weingarten, s)
        if self.generator is not None:
            gen = self.generator
            params = gen.params
            if params is None:
                params = random_params(gen.class_id, s, np.random.default_rng(gen.seed))
            elif gen.class_id == "F10":
                params = np.asarray(params).reshape(s.dim, s.dim)
            elif gen.class_id in ("F4", "F5"):
                params = float(np.asarray(params).ravel()[0])
            return construct_class(gen.class_id, s, params)
        return np.zeros((s.dim,) * 3)


def _fmt(values) -> str:
    return " ".join("%.17g" % float(x) for x in np.ravel(values))


def dumps(scene: Scene) -> str:
    s = scene.structure
    lines = [f"version {VERSION}", f"n {s.n}"]
    for name in ("phi", "xi", "eta", "g"):
        lines.append(f"{name} {_fmt(getattr(s, name))}")
    if scene.F is not None:
        lines.append(f"F {_fmt(scene.F)}")
    if scene.weingarten is not None:
        lines.append(f"weingarten {_fmt(scene.weingarten)}")
    if scene.generator is not None:
        lines.append(f"generator {scene.generator.class_id} {scene.generator.seed}")
        if scene.generator.params is not None:
            lines.append(f"params {_fmt(scene.generator.params)}")
    c = scene.conformal
    if c is not None:
        c = c.sized(s.dim)
        lines.append(f"conformal {_fmt([c.u, c.v, c.w])}")
        for name in ("du", "dv", "dw"):
            lines.append(f"{name} {_fmt(getattr(c, name))}")
    return "\n".join(lines) + "\n"


def _numbers(tokens: list[str], lineno: int, key: str) -> np.ndarray:
    out = []
    for pos, tok in enumerate(tokens, start=1):
        try:
            out.append(float(tok))
        except ValueError:
            raise ParseError(f"malformed number {tok!r} (value {pos})", lineno, key) from None
    arr = np.array(out)
    if not np.all(np.isfinite(arr)):
        raise ParseError("non-finite value", lineno, key)
    return arr


def loads(text: str) -> Scene:
    records: dict[str, tuple[int, list[str]]] = {}
    version_seen = False
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, *rest = line.split()
        if key == "version":
            if rest != [str(VERSION)]:
                raise ParseError(f"unsupported version {' '.join(rest)!r}", lineno, "version")
            version_seen = True
            continue
        if not version_seen:
            raise ParseError("file must start with 'version 1'", lineno)
        if key not in _FIELD_ORDER:
            raise ParseError(f"unknown key {key!r}", lineno, key)
        if key in records:
            raise ParseError("duplicate key", lineno, key)
        records[key] = (lineno, rest)
    if not version_seen:
        raise ParseError("missing version line")

    def need(key):
        if key not in records:
            raise ParseError("missing required field", None, key)
        return records[key]

    lineno, toks = need("n")
    try:
        n = int(toks[0]) if len(toks) == 1 else None
    except ValueError:
        n = None
    if n is None or n < 1:
        raise ParseError("n must be a single positive integer", lineno, "n")
    d = 2 * n + 1

    def block(key, size, shape=None):
        lineno, toks = records[key]
        arr = _numbers(toks, lineno, key)
        if arr.size != size:
            raise ParseError(f"expected {size} values, got {arr.size}", lineno, key)
        return arr.reshape(shape) if shape else arr

    for key in ("phi", "xi", "eta", "g"):
        need(key)
    structure = Structure(block("phi", d * d, (d, d)), block("xi", d), block("eta", d), block("g", d * d, (d, d)))

    sources = [k for k in ("F", "weingarten", "generator") if k in records]
    if len(sources) > 1:
        raise ParseError(f"at most one of F, weingarten, generator may be given (got {sources})",
                         records[sources[1]][0], sources[1])
    F = block("F", d ** 3, (d, d, d)) if "F" in records else None
    W = block("weingarten", d * d, (d, d)) if "weingarten" in records else None
    gen = None
    if "generator" in records:
        lineno, toks = records["generator"]
        if len(toks) != 2 or toks[0] not in BASIC_CLASSES:
            raise ParseError("expected 'generator <F1..F11> <seed>'", lineno, "generator")
        class_id = toks[0]
        try:
            seed = int(toks[1])
        except ValueError:
            raise ParseError(f"malformed seed {toks[1]!r}", lineno, "generator") from None
        params = None
        if "params" in records:
            p_line, p_toks = records["params"]
            params = _numbers(p_toks, p_line, "params")
        gen = Generator(class_id, seed, params)
    elif "params" in records:
        raise ParseError("params without generator", records["params"][0], "params")

    conformal = None
    if "conformal" in records:
        u, v, w = block("conformal", 3)
        diffs = [block(k, d) if k in records else np.zeros(d) for k in ("du", "dv", "dw")]
        conformal = ConformalPointData(u, v, w, *diffs)
    else:
        for k in ("du", "dv", "dw"):
            if k in records:
                raise ParseError("differential without a conformal line", records[k][0], k)
    return Scene(structure, F, W, gen, conformal)


def load(path) -> Scene:
    with open(path, encoding="utf-8") as fh:
        return loads(fh.read())


def dump(scene: Scene, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(dumps(scene))
