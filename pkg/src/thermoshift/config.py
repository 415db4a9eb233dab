"""Experiment configuration: a single self-describing key-value file per run.

The format is INI (configparser). Sections:

    [space]            k, matrix (rows of 0/1 digits), metric_base
    [potential.g1]     preset = zero | constant | constant-weight | bernoulli
                       | table | weight-table, plus preset-specific keys
    [potential.g2]     optional second potential (transform target)
    [job]              past, pinned, normalization = raw|pressure,
                       arith = float|exact
    [report]           n_range, cylinders, gibbs_depth, fiber_depth,
                       potential = g1|g2, emit_pushforwards, seed, out
    [tolerances]       perron_tol, perron_max_iter, variational_tol

Words are digit strings ("0110"); rationals are "3/10" or decimal strings;
n_range is "a..b", "a..b..step" or a comma list; cylinders are
"start:word" items separated by commas.
"""

from __future__ import annotations

import configparser
import hashlib
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Optional

from .errors import ConfigError, ThermoshiftError
from .potentials import (LocallyConstantPotential, bernoulli_potential,
                         constant_potential, constant_weight_potential, from_table,
                         from_weights, zero_potential)
from .shiftspace import (PastWord, ShiftSpace, TwoSidedCylinder, Word, as_word,
                         build_shift, cylinder, past_word)

_KNOWN = {
    "space": {"k", "matrix", "metric_base"},
    "potential.g1": None,   # validated per preset
    "potential.g2": None,
    "job": {"past", "pinned", "normalization", "arith"},
    "report": {"n_range", "cylinders", "gibbs_depth", "fiber_depth",
               "potential", "emit_pushforwards", "seed", "out"},
    "tolerances": {"perron_tol", "perron_max_iter", "variational_tol"},
}

_PRESET_KEYS = {
    "zero": set(),
    "constant": {"value"},
    "constant-weight": {"weight"},
    "bernoulli": {"p", "probs"},
    "table": {"window", "table"},
    "weight-table": {"window", "weights"},
}


@dataclass
class ExperimentConfig:
    path: Path
    config_hash: str
    space: ShiftSpace
    potentials: dict[str, LocallyConstantPotential]
    past: PastWord
    pinned: Word
    normalization: str
    arith: str
    n_range: tuple[int, ...]
    cylinders: tuple[TwoSidedCylinder, ...]
    gibbs_depth: Optional[int]
    fiber_depth: int
    target: str
    emit_pushforwards: bool
    seed: int
    out_dir: Path
    perron_tol: float
    perron_max_iter: int
    variational_tol: float

    @property
    def g1(self) -> LocallyConstantPotential:
        return self.potentials["g1"]

    @property
    def g2(self) -> Optional[LocallyConstantPotential]:
        return self.potentials.get("g2")

    def require_g2(self) -> LocallyConstantPotential:
        if "g2" not in self.potentials:
            raise ConfigError("this command needs a [potential.g2] section")
        return self.potentials["g2"]


def parse_fraction(text: str, where: str) -> Fraction:
    try:
        return Fraction(text.strip())
    except (ValueError, ZeroDivisionError) as exc:
        raise ConfigError(f"{where}: cannot parse rational {text!r}: {exc}")


def parse_n_range(text: str, where: str) -> tuple[int, ...]:
    text = text.strip()
    try:
        if ".." in text:
            parts = [int(p) for p in text.split("..")]
            if len(parts) == 2:
                lo, hi, step = parts[0], parts[1], 1
            elif len(parts) == 3:
                lo, hi, step = parts
            else:
                raise ValueError("use a..b or a..b..step")
            ns = tuple(range(lo, hi + 1, step))
        else:
            ns = tuple(int(p) for p in text.split(","))
    except ValueError as exc:
        raise ConfigError(f"{where}: bad n_range {text!r}: {exc}")
    if not ns or any(n < 1 for n in ns) or list(ns) != sorted(set(ns)):
        raise ConfigError(
            f"{where}: n_range must be strictly increasing positive ints, got {ns}")
    return ns


def _parse_word_value(text: str, where: str) -> Word:
    text = text.strip()
    if not text:
        return ()
    if not text.isdigit():
        raise ConfigError(f"{where}: expected a digit word, got {text!r}")
    return as_word(text)


def _parse_matrix(text: str, k: int) -> list[list[int]]:
    rows = text.split()
    if len(rows) != k:
        raise ConfigError(f"[space] matrix: expected {k} rows, got {len(rows)}")
    out = []
    for row in rows:
        if len(row) != k or any(c not in "01" for c in row):
            raise ConfigError(
                f"[space] matrix: row {row!r} is not {k} binary digits")
        out.append([int(c) for c in row])
    return out


def _parse_table_lines(text: str, where: str) -> list[tuple[str, str]]:
    pairs = []
    for line in text.strip().splitlines():
        parts = line.split()
        if len(parts) != 2:
            raise ConfigError(f"{where}: expected 'word value' per line, got {line!r}")
        pairs.append((parts[0], parts[1]))
    if not pairs:
        raise ConfigError(f"{where}: empty table")
    return pairs


def _parse_window(text: str, where: str) -> tuple[int, int]:
    parts = text.split()
    if len(parts) != 2:
        raise ConfigError(f"{where}: window must be 'm r'")
    try:
        m, r = int(parts[0]), int(parts[1])
    except ValueError as exc:
        raise ConfigError(f"{where}: bad window: {exc}")
    return m, r


def _build_potential(space: ShiftSpace, section: str,
                     items: dict[str, str]) -> LocallyConstantPotential:
    preset = items.get("preset")
    if preset is None:
        raise ConfigError(f"[{section}] needs a preset key")
    if preset not in _PRESET_KEYS:
        raise ConfigError(
            f"[{section}] unknown preset {preset!r}; choose from "
            f"{sorted(_PRESET_KEYS)}")
    extra = set(items) - {"preset"} - _PRESET_KEYS[preset]
    if extra:
        raise ConfigError(f"[{section}] unexpected keys for preset "
                          f"{preset!r}: {sorted(extra)}")
    try:
        if preset == "zero":
            return zero_potential(space)
        if preset == "constant":
            return constant_potential(space, float(items["value"]))
        if preset == "constant-weight":
            return constant_weight_potential(
                space, parse_fraction(items["weight"], f"[{section}] weight"))
        if preset == "bernoulli":
            if "p" in items and "probs" in items:
                raise ConfigError(f"[{section}] give either p or probs, not both")
            if "p" in items:
                if space.k != 2:
                    raise ConfigError(f"[{section}] p= needs a 2-symbol alphabet")
                p = parse_fraction(items["p"], f"[{section}] p")
                return bernoulli_potential(space, [p, 1 - p])
            probs = [parse_fraction(t, f"[{section}] probs")
                     for t in items["probs"].split()]
            return bernoulli_potential(space, probs)
        if preset == "table":
            window = _parse_window(items["window"], f"[{section}] window")
            pairs = _parse_table_lines(items["table"], f"[{section}] table")
            entries = {as_word(w): float(v) for w, v in pairs}
            return from_table(space, window, entries)
        window = _parse_window(items["window"], f"[{section}] window")
        pairs = _parse_table_lines(items["weights"], f"[{section}] weights")
        weights = {as_word(w): parse_fraction(v, f"[{section}] weights")
                   for w, v in pairs}
        return from_weights(space, window, weights)
    except KeyError as exc:
        raise ConfigError(f"[{section}] preset {preset!r} needs key {exc}")
    except ConfigError:
        raise
    except (ThermoshiftError, ValueError) as exc:
        raise ConfigError(f"[{section}]: {exc}")


def load_config(path, *, out_override=None, seed_override=None,
                arith_override=None) -> ExperimentConfig:
    path = Path(path)
    try:
        raw = path.read_bytes()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}")
    digest = hashlib.sha256(raw).hexdigest()
    parser = configparser.ConfigParser(interpolation=None,
                                       inline_comment_prefixes=(";",))
    try:
        parser.read_string(raw.decode("utf-8"), source=str(path))
    except (configparser.Error, UnicodeDecodeError) as exc:
        raise ConfigError(f"cannot parse config {path}: {exc}")

    for section in parser.sections():
        if section not in _KNOWN:
            raise ConfigError(f"unknown config section [{section}]")
        known = _KNOWN[section]
        if known is not None:
            extra = set(parser[section]) - known
            if extra:
                raise ConfigError(
                    f"unknown keys in [{section}]: {sorted(extra)}")

    if "space" not in parser:
        raise ConfigError("config needs a [space] section")
    sp = parser["space"]
    try:
        k = int(sp.get("k", ""))
    except ValueError:
        raise ConfigError("[space] k must be an integer")
    try:
        space = build_shift(k, _parse_matrix(sp.get("matrix", ""), k),
                            float(sp.get("metric_base", "0.5")))
    except ConfigError:
        raise
    except (ThermoshiftError, ValueError) as exc:
        raise ConfigError(f"[space]: {exc}")

    potentials = {}
    for name in ("g1", "g2"):
        section = f"potential.{name}"
        if section in parser:
            potentials[name] = _build_potential(space, section,
                                                dict(parser[section]))
    if "g1" not in potentials:
        raise ConfigError("config needs a [potential.g1] section")

    job = parser["job"] if "job" in parser else {}
    try:
        past = past_word(space, _parse_word_value(job.get("past", "") or
                                                  _default_past(space), "[job] past"))
    except ConfigError:
        raise
    except (ThermoshiftError, ValueError) as exc:
        raise ConfigError(f"[job] past: {exc}")
    pinned = _parse_word_value(job.get("pinned", ""), "[job] pinned")
    normalization = (job.get("normalization", "raw") or "raw").strip()
    if normalization not in ("raw", "pressure"):
        raise ConfigError("[job] normalization must be raw or pressure")
    arith = (arith_override or job.get("arith", "float") or "float").strip()
    if arith not in ("float", "exact"):
        raise ConfigError("[job] arith must be float or exact")

    rep = parser["report"] if "report" in parser else {}
    n_range = parse_n_range(rep.get("n_range", "1..10"), "[report] n_range")
    cylinders = []
    cyl_text = rep.get("cylinders", "").strip()
    if cyl_text:
        for item in cyl_text.split(","):
            item = item.strip()
            if ":" not in item:
                raise ConfigError(
                    f"[report] cylinders: expected start:word, got {item!r}")
            start_text, word_text = item.split(":", 1)
            try:
                start = int(start_text)
            except ValueError:
                raise ConfigError(
                    f"[report] cylinders: bad start index {start_text!r}")
            try:
                cylinders.append(cylinder(space, start,
                                          _parse_word_value(word_text,
                                                            "[report] cylinders")))
            except ConfigError:
                raise
            except (ThermoshiftError, ValueError) as exc:
                raise ConfigError(f"[report] cylinders: {exc}")
    gibbs_depth = None
    if rep.get("gibbs_depth", "").strip():
        try:
            gibbs_depth = int(rep["gibbs_depth"])
        except ValueError:
            raise ConfigError("[report] gibbs_depth must be an integer")
    target = (rep.get("potential", "g1") or "g1").strip()
    if target not in potentials:
        raise ConfigError(f"[report] potential: no [potential.{target}] section")

    tols = parser["tolerances"] if "tolerances" in parser else {}
    try:
        cfg = ExperimentConfig(
            path=path,
            config_hash=digest,
            space=space,
            potentials=potentials,
            past=past,
            pinned=pinned,
            normalization=normalization,
            arith=arith,
            n_range=n_range,
            cylinders=tuple(cylinders),
            gibbs_depth=gibbs_depth,
            fiber_depth=int(rep.get("fiber_depth", "4")),
            target=target,
            emit_pushforwards=_parse_bool(rep.get("emit_pushforwards", "false")),
            seed=int(seed_override if seed_override is not None
                     else rep.get("seed", "0")),
            out_dir=Path(out_override if out_override is not None
                         else rep.get("out", "out")),
            perron_tol=float(tols.get("perron_tol", "1e-13")),
            perron_max_iter=int(tols.get("perron_max_iter", "500000")),
            variational_tol=float(tols.get("variational_tol", "1e-12")),
        )
    except ValueError as exc:
        raise ConfigError(f"bad numeric setting: {exc}")
    if cfg.pinned:
        try:
            space.check_admissible(cfg.pinned, what="[job] pinned word")
        except (ThermoshiftError, ValueError) as exc:
            raise ConfigError(str(exc))
    return cfg


def _default_past(space: ShiftSpace) -> str:
    # smallest symbol with an admissible self-loop, else a short cycle
    for s in range(space.k):
        if space.matrix[s][s]:
            return str(s)
    for s in range(space.k):
        for t in space.successors[s]:
            if space.matrix[t][s]:
                return f"{s}{t}"
    raise ConfigError("[job] past: cannot infer a default past word; set one")


def _parse_bool(text: str) -> bool:
    val = text.strip().lower()
    if val in ("1", "true", "yes", "on"):
        return True
    if val in ("0", "false", "no", "off", ""):
        return False
    raise ConfigError(f"expected a boolean, got {text!r}")
