"""Experiment configuration files (TOML).

Rationals are written as strings ("1/3", "0.25") so that nothing is silently parsed as a
binary float.  A file looks like::

    command = "simulate"
    seed = 7
    output = "out"

    [filter]
    builtin = "haar"            # or [filter.construct] with theorem and B

    [set]
    points = ["1/3", "2/3"]     # or intervals = [["3/8", "5/8", "closed-open"]]

    [subshift]
    J = 1
    forbidden = ["00", "11"]    # or generator = "example-3-1", truncation = 12

    [simulation]
    x0 = "1/3"
    paths = 2000
    steps = 2000
    eps = "1/1048576"

    [spectral]
    x = "1/3"
    k_max = 512
    t_max = 48

    [cohen]
    T = [["-1/2", "1/2"]]
    j_max = 30
"""
from __future__ import annotations

import dataclasses
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path

import tomli
import tomli_w


class ConfigError(ValueError):
    def __init__(self, location: str, message: str):
        super().__init__(f"{location}: {message}")
        self.location = location


def rational(value, location: str) -> Fraction:
    if isinstance(value, bool) or isinstance(value, float):
        raise ConfigError(location, f"rational must be a string or integer, got {value!r}")
    if isinstance(value, int):
        return Fraction(value)
    if not isinstance(value, str):
        raise ConfigError(location, f"expected a rational string, got {type(value).__name__}")
    try:
        return Fraction(value.strip())
    except (ValueError, ZeroDivisionError) as e:
        raise ConfigError(location, f"cannot read {value!r} as a rational ({e})") from None


def _int(value, location: str, minimum: int | None = None) -> int:
    if isinstance(value, bool) or not isinstance(value, int):
        raise ConfigError(location, f"expected an integer, got {value!r}")
    if minimum is not None and value < minimum:
        raise ConfigError(location, f"must be >= {minimum}, got {value}")
    return value


def _check_keys(table: dict, allowed: set, location: str) -> None:
    extra = sorted(set(table) - allowed)
    if extra:
        raise ConfigError(f"{location}.{extra[0]}" if location else extra[0], f"unknown key (allowed: {sorted(allowed)})")


@dataclass
class SimulationParams:
    x0: Fraction = Fraction(1, 3)
    paths: int = 2000
    steps: int = 2000
    eps: Fraction = Fraction(1, 2**20)


@dataclass
class SpectralParams:
    x: Fraction = Fraction(1, 3)
    k_max: int = 512
    t_max: int = 48


@dataclass
class CohenParams:
    T: list = field(default_factory=lambda: [(Fraction(-1, 2), Fraction(1, 2))])
    j_max: int = 30
    grid_n: int = 4096


@dataclass
class ExperimentConfig:
    command: str
    filter: dict | None = None
    set: dict | None = None
    subshift: dict | None = None
    simulation: SimulationParams = field(default_factory=SimulationParams)
    spectral: SpectralParams = field(default_factory=SpectralParams)
    cohen: CohenParams = field(default_factory=CohenParams)
    seed: int | None = None
    output: str = "."

    # -- accessors building library objects ---------------------------------

    def build_filter(self):
        from .filters import filter_from_dict

        if self.filter is None:
            raise ConfigError("filter", "this command needs a [filter] table")
        try:
            return filter_from_dict(self.filter)
        except (KeyError, ValueError, TypeError) as e:
            raise ConfigError("filter", str(e)) from e

    def build_set(self):
        from .intervals import set_from_dict

        if self.set is None:
            raise ConfigError("set", "this command needs a [set] table")
        try:
            return set_from_dict(self.set)
        except (KeyError, ValueError, TypeError) as e:
            raise ConfigError("set", str(e)) from e

    def build_subshift(self):
        """An SftSubshift, or (GeneratorFamily, truncation) for generator specs."""
        from .subshift import GENERATORS, SftSubshift

        s = self.subshift
        if s is None:
            raise ConfigError("subshift", "this command needs a [subshift] table")
        if "generator" in s:
            if s["generator"] not in GENERATORS:
                raise ConfigError("subshift.generator", f"unknown generator (known: {sorted(GENERATORS)})")
            return GENERATORS[s["generator"]](), s.get("truncation")
        try:
            return SftSubshift(s.get("J", 1), s["forbidden"])
        except (KeyError, ValueError) as e:
            raise ConfigError("subshift.forbidden", str(e)) from e


def _validate_set(d: dict, loc: str) -> dict:
    _check_keys(d, {"points", "intervals", "sft"}, loc)
    if len(d) != 1:
        raise ConfigError(loc, "give exactly one of points, intervals, sft")
    if "points" in d:
        for i, x in enumerate(d["points"]):
            rational(x, f"{loc}.points[{i}]")
    if "intervals" in d:
        from .intervals import _FLAGS

        for i, iv in enumerate(d["intervals"]):
            if not isinstance(iv, list) or len(iv) not in (2, 3):
                raise ConfigError(f"{loc}.intervals[{i}]", "expected [lo, hi] or [lo, hi, flags]")
            rational(iv[0], f"{loc}.intervals[{i}][0]")
            rational(iv[1], f"{loc}.intervals[{i}][1]")
            if len(iv) == 3 and iv[2] not in _FLAGS:
                raise ConfigError(f"{loc}.intervals[{i}][2]", f"flags must be one of {sorted(_FLAGS)}")
    if "sft" in d:
        _validate_subshift(d["sft"], f"{loc}.sft")
    return d


def _validate_subshift(d: dict, loc: str) -> dict:
    _check_keys(d, {"J", "forbidden", "generator", "truncation"}, loc)
    if "generator" in d:
        if "truncation" not in d:
            raise ConfigError(loc, "a generator needs a truncation")
        _int(d["truncation"], f"{loc}.truncation", 1)
    elif "forbidden" not in d:
        raise ConfigError(loc, "needs forbidden words or a generator")
    else:
        if not all(isinstance(w, str) for w in d["forbidden"]):
            raise ConfigError(f"{loc}.forbidden", "words must be strings such as \"00\"")
    if "J" in d:
        _int(d["J"], f"{loc}.J", 1)
    return d


def _validate_filter(d: dict, loc: str) -> dict:
    _check_keys(d, {"builtin", "construct"}, loc)
    if len(d) != 1:
        raise ConfigError(loc, "give exactly one of builtin, construct")
    if "builtin" in d:
        from .filters import _BUILTINS

        if d["builtin"] not in _BUILTINS:
            raise ConfigError(f"{loc}.builtin", f"unknown filter (known: {sorted(_BUILTINS)})")
        return d
    c = d["construct"]
    if "pieces" in c:
        return d  # a serialized filter; validated on load
    _check_keys(c, {"theorem", "B", "epsilon", "k"}, f"{loc}.construct")
    if str(c.get("theorem", "1")) not in ("1", "prop"):
        raise ConfigError(f"{loc}.construct.theorem", "must be \"1\" or \"prop\"")
    if "B" not in c:
        raise ConfigError(f"{loc}.construct", "needs the set B")
    _validate_set(c["B"], f"{loc}.construct.B")
    if c.get("epsilon", "auto") != "auto":
        rational(c["epsilon"], f"{loc}.construct.epsilon")
    if c.get("k", "auto") != "auto":
        _int(c["k"], f"{loc}.construct.k", 1)
    return d


def config_from_dict(d: dict) -> ExperimentConfig:
    _check_keys(d, {"command", "filter", "set", "subshift", "simulation", "spectral", "cohen", "seed", "output"}, "")
    if "command" not in d or not isinstance(d["command"], str):
        raise ConfigError("command", "missing or not a string")
    cfg = ExperimentConfig(command=d["command"])
    if "filter" in d:
        cfg.filter = _validate_filter(d["filter"], "filter")
    if "set" in d:
        cfg.set = _validate_set(d["set"], "set")
    if "subshift" in d:
        cfg.subshift = _validate_subshift(d["subshift"], "subshift")
    if "seed" in d:
        cfg.seed = _int(d["seed"], "seed", 0)
    if "output" in d:
        cfg.output = str(d["output"])
    if "simulation" in d:
        s = d["simulation"]
        _check_keys(s, {"x0", "paths", "steps", "eps"}, "simulation")
        base = SimulationParams()
        cfg.simulation = SimulationParams(
            x0=rational(s.get("x0", str(base.x0)), "simulation.x0"),
            paths=_int(s.get("paths", base.paths), "simulation.paths", 1),
            steps=_int(s.get("steps", base.steps), "simulation.steps", 0),
            eps=rational(s.get("eps", str(base.eps)), "simulation.eps"),
        )
    if "spectral" in d:
        s = d["spectral"]
        _check_keys(s, {"x", "k_max", "t_max"}, "spectral")
        base = SpectralParams()
        cfg.spectral = SpectralParams(
            x=rational(s.get("x", str(base.x)), "spectral.x"),
            k_max=_int(s.get("k_max", base.k_max), "spectral.k_max", 0),
            t_max=_int(s.get("t_max", base.t_max), "spectral.t_max", 1),
        )
    if "cohen" in d:
        s = d["cohen"]
        _check_keys(s, {"T", "j_max", "grid_n"}, "cohen")
        base = CohenParams()
        T = base.T
        if "T" in s:
            T = []
            for i, iv in enumerate(s["T"]):
                if not isinstance(iv, list) or len(iv) != 2:
                    raise ConfigError(f"cohen.T[{i}]", "expected [lo, hi]")
                T.append((rational(iv[0], f"cohen.T[{i}][0]"), rational(iv[1], f"cohen.T[{i}][1]")))
        cfg.cohen = CohenParams(
            T=T,
            j_max=_int(s.get("j_max", base.j_max), "cohen.j_max", 1),
            grid_n=_int(s.get("grid_n", base.grid_n), "cohen.grid_n", 2),
        )
    return cfg


def config_to_dict(cfg: ExperimentConfig) -> dict:
    out: dict = {"command": cfg.command, "output": cfg.output}
    if cfg.seed is not None:
        out["seed"] = cfg.seed
    for name in ("filter", "set", "subshift"):
        if getattr(cfg, name) is not None:
            out[name] = getattr(cfg, name)
    sim = dataclasses.asdict(cfg.simulation)
    out["simulation"] = {k: str(v) if isinstance(v, Fraction) else v for k, v in sim.items()}
    sp = dataclasses.asdict(cfg.spectral)
    out["spectral"] = {k: str(v) if isinstance(v, Fraction) else v for k, v in sp.items()}
    out["cohen"] = {
        "T": [[str(a), str(b)] for a, b in cfg.cohen.T],
        "j_max": cfg.cohen.j_max,
        "grid_n": cfg.cohen.grid_n,
    }
    return out


def loads(text: str) -> ExperimentConfig:
    try:
        data = tomli.loads(text)
    except tomli.TOMLDecodeError as e:
        raise ConfigError("toml", str(e)) from None
    return config_from_dict(data)


def dumps(cfg: ExperimentConfig) -> str:
    return tomli_w.dumps(config_to_dict(cfg))


def load(path: str | Path) -> ExperimentConfig:
    try:
        text = Path(path).read_text()
    except OSError as e:
        raise ConfigError(str(path), e.strerror or str(e)) from None
    try:
        return loads(text)
    except ConfigError as e:
        raise ConfigError(f"{path}:{e.location}", str(e).split(": ", 1)[-1]) from None
