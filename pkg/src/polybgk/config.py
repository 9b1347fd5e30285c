"""Run configuration: an INI-style ``key = value`` file with five sections.

::

    [model]   nu theta delta q                      (all required)
    [grid]    x_count x_length v_count v_max i_count i_max i_kind
    [solver]  dt t_final transport_interp conservation_fix mode
              picard_iterations picard_time_nodes splitting seed threads samples
    [init]    preset rho ux uy uz T T_tr T_int amplitude mode path tail_tolerance
    [output]  path interval

``v_max`` and ``i_max`` default to ``auto``, which sizes the cutoffs from the
initial data.  ``seed`` and ``samples`` drive the randomized lemma suite of the
``check`` command.  Every value not given in the file is logged at INFO level.
Unknown sections or keys are rejected.
"""
from __future__ import annotations

import configparser
import logging
import re
from dataclasses import dataclass, fields, replace

from .errors import ParseError, ValidationError
from .grid import GridConfig, default_cutoffs
from .initial import InitSpec
from .params import RelaxationParams
from .solver import SolverConfig

log = logging.getLogger(__name__)

_BOOL = {"true": True, "yes": True, "on": True, "1": True,
         "false": False, "no": False, "off": False, "0": False}


def _to_bool(s: str) -> bool:
    try:
        return _BOOL[s.strip().lower()]
    except KeyError:
        raise ValueError(f"not a boolean: {s!r}") from None


def _auto_float(s: str):
    return None if s.strip().lower() == "auto" else float(s)


# section -> key -> (converter, default)
SCHEMA = {
    "model": {"nu": (float, None), "theta": (float, None), "delta": (float, None), "q": (float, None)},
    "grid": {
        "x_count": (int, 1), "x_length": (float, 1.0), "v_count": (int, 32),
        "v_max": (_auto_float, None), "i_count": (int, 32), "i_max": (_auto_float, None),
        "i_kind": (str, "mapped"),
    },
    "solver": {
        "dt": (float, 0.05), "t_final": (float, 1.0), "transport_interp": (str, "linear"),
        "conservation_fix": (_to_bool, False), "mode": (str, "evolve"),
        "picard_iterations": (int, 8), "picard_time_nodes": (int, 33), "splitting": (str, "lie"),
        "seed": (int, 0), "threads": (int, 1), "samples": (int, 100),
    },
    "init": {
        "preset": (str, "equilibrium"), "rho": (float, 1.0),
        "ux": (float, 0.0), "uy": (float, 0.0), "uz": (float, 0.0),
        "T": (float, 1.0), "T_tr": (float, 2.0), "T_int": (float, 1.0),
        "amplitude": (float, 0.1), "mode": (int, 1), "path": (str, None),
        "tail_tolerance": (float, 1e-10),
    },
    "output": {"path": (str, "run.csv"), "interval": (int, 1)},
}


@dataclass(frozen=True)
class RunConfig:
    params: RelaxationParams
    grid: GridConfig
    solver: SolverConfig
    init: InitSpec
    output_path: str = "run.csv"
    seed: int = 0
    threads: int = 1
    samples: int = 100


def _locate(text: str, section: str, key: str | None = None) -> int | None:
    """1-based line of a section header, or of ``key`` inside that section."""
    current = None
    for n, line in enumerate(text.splitlines(), 1):
        s = line.strip()
        m = re.match(r"\[([^\]]+)\]", s)
        if m:
            current = m.group(1).strip()
            if key is None and current == section:
                return n
            continue
        if key is not None and current == section and re.match(rf"{re.escape(key)}\s*[=:]", s):
            return n
    return None


def _read(text: str) -> configparser.ConfigParser:
    cp = configparser.ConfigParser(interpolation=None, inline_comment_prefixes=("#", ";"))
    cp.optionxform = str
    try:
        cp.read_string(text)
    except configparser.MissingSectionHeaderError as exc:
        raise ParseError("key outside any section", lineno=exc.lineno) from None
    except (configparser.DuplicateOptionError, configparser.DuplicateSectionError) as exc:
        raise ParseError(exc.message.split(":")[-1].strip() or str(exc), lineno=exc.lineno) from None
    except configparser.ParsingError as exc:
        lineno = exc.errors[0][0] if exc.errors else None
        raise ParseError("malformed line, expected 'key = value'", lineno=lineno) from None
    return cp


def parse_config(text: str) -> RunConfig:
    cp = _read(text)
    values: dict[str, dict] = {}
    for section in cp.sections():
        if section not in SCHEMA:
            raise ParseError(f"unknown section [{section}]", lineno=_locate(text, section))
    for section, keys in SCHEMA.items():
        given = cp[section] if cp.has_section(section) else {}
        for key in given:
            if key not in keys:
                raise ParseError(f"unknown key {key!r} in [{section}]", lineno=_locate(text, section, key))
        out = {}
        for key, (conv, default) in keys.items():
            if key in given:
                raw = given[key]
                try:
                    out[key] = conv(raw)
                except ValueError as exc:
                    raise ParseError(f"[{section}] {key}: {exc}", lineno=_locate(text, section, key)) from None
            else:
                if default is None and section == "model":
                    raise ValidationError(f"[model] {key} is required")
                out[key] = default
                shown = default
                if default is None:
                    shown = "auto" if key in ("v_max", "i_max") else "unset"
                log.info("default [%s] %s = %s", section, key, shown)
        values[section] = out
    return _build(values)


def _build(v: dict) -> RunConfig:
    mdl, grd, slv, ini, out = v["model"], v["grid"], v["solver"], v["init"], v["output"]
    params = RelaxationParams(mdl["nu"], mdl["theta"], mdl["delta"], mdl["q"])
    init = InitSpec(
        preset=ini["preset"], rho=ini["rho"], U=(ini["ux"], ini["uy"], ini["uz"]),
        T=ini["T"], T_tr=ini["T_tr"], T_int=ini["T_int"], amplitude=ini["amplitude"],
        mode=ini["mode"], path=ini["path"], tail_tolerance=ini["tail_tolerance"],
    )
    v_max, i_max = grd["v_max"], grd["i_max"]
    if v_max is None or i_max is None:
        if init.preset == "file":
            raise ValidationError("preset 'file' needs explicit v_max and i_max")
        auto_v, auto_i = default_cutoffs(*init.extent(), params.delta)
        if v_max is None:
            v_max = auto_v
            log.info("auto [grid] v_max = %r", v_max)
        if i_max is None:
            i_max = auto_i
            log.info("auto [grid] i_max = %r", i_max)
    grid = GridConfig(
        x_count=grd["x_count"], x_length=grd["x_length"], v_count=grd["v_count"], v_max=v_max,
        i_count=grd["i_count"], i_max=i_max, i_kind=grd["i_kind"],
    )
    solver = SolverConfig(
        dt=slv["dt"], t_final=slv["t_final"], transport_interp=slv["transport_interp"],
        conservation_fix=slv["conservation_fix"], mode=slv["mode"],
        picard_iterations=slv["picard_iterations"], picard_time_nodes=slv["picard_time_nodes"],
        splitting=slv["splitting"], output_interval=out["interval"],
    )
    if slv["threads"] < 1:
        raise ValidationError("threads must be >= 1")
    if slv["samples"] < 1:
        raise ValidationError("samples must be >= 1")
    return RunConfig(params, grid, solver, init, out["path"], slv["seed"], slv["threads"], slv["samples"])


def load_config(path) -> RunConfig:
    with open(path, encoding="utf-8") as fh:
        return parse_config(fh.read())


def with_overrides(cfg: RunConfig, **kw) -> RunConfig:
    """Copy of ``cfg`` with any non-None keyword replaced (CLI flags)."""
    names = {f.name for f in fields(RunConfig)}
    return replace(cfg, **{k: val for k, val in kw.items() if val is not None and k in names})
