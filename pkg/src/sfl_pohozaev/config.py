"""Experiment configuration: TOML parsing, validation and defaults."""

from __future__ import annotations

import ast
import math
import operator
from dataclasses import dataclass, field
from pathlib import Path

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib

from .domains import Disk, DomainError, GridMask, Interval, Rectangle, load_grid_mask
from .sfl import check_order

SUITES = ("identity", "psd", "bochner", "degenerate", "subordination", "semilinear", "probe")
RANDOMIZED = {"identity", "degenerate", "probe"}

# Default tolerances; every pass/fail threshold used by a suite is one of these.
DEFAULT_TOLERANCES = {
    "identity": 1e-8,            # relative identity residual, closed-form bases
    "identity_grid": 1e-5,       # relative identity residual, grid bases
    "moment_diagonal": 1e-8,     # |M_kk + N/2|
    "interval_m12": 1e-8,        # |M_12 - 4/3| on the interval
    "cross_check": 1e-8,         # boundary vs volume route on distinct eigenvalues (absolute)
    "q1_closed_form": 1e-10,     # interval Q1_jk = jk (-1)^(j+k)
    "q1_diagonal": 1e-8,         # |Q1_kk - lambda_k| / lambda_k
    "classical": 1e-12,          # s = 1 comparisons
    "psd": 1e-10,                # relative PSD threshold
    "bochner": 1e-6,             # transform vs closed form
    "bochner_spot": 1e-8,        # value at xi = 0, s = 1/2 against pi
    "factorization": 1e-12,      # P vs its H_s factorization
    "degenerate": 1e-8,          # within-group Q1 and Q^s entries
    "rotation": 1e-8,            # Q^s[u] under eigengroup rotations
    "subordination": 1e-8,       # heat-semigroup quadrature vs lambda^s
    "newton": 1e-10,             # Newton stopping tolerance
    "semilinear_residual": 1e-8,
    "pohozaev_floor": 1e-6,
    "coefficient": 1e-14,
    "probe_pohozaev": 1e-6,
}


class ConfigError(ValueError):
    pass


_BINOPS = {ast.Add: operator.add, ast.Sub: operator.sub, ast.Mult: operator.mul,
           ast.Div: operator.truediv, ast.Pow: operator.pow}


def _eval_node(node):
    if isinstance(node, ast.Expression):
        return _eval_node(node.body)
    if isinstance(node, ast.Constant) and isinstance(node.value, (int, float)):
        return float(node.value)
    if isinstance(node, ast.Name) and node.id == "pi":
        return math.pi
    if isinstance(node, ast.UnaryOp) and isinstance(node.op, (ast.USub, ast.UAdd)):
        v = _eval_node(node.operand)
        return -v if isinstance(node.op, ast.USub) else v
    if isinstance(node, ast.BinOp) and type(node.op) in _BINOPS:
        return _BINOPS[type(node.op)](_eval_node(node.left), _eval_node(node.right))
    raise ConfigError("only numbers, 'pi' and + - * / ** are allowed in expressions")


def number(value, what: str = "value") -> float:
    """A float from a TOML number or an arithmetic string such as ``"2*pi"``."""
    if isinstance(value, bool):
        raise ConfigError(f"{what}: expected a number, got {value!r}")
    if isinstance(value, (int, float)):
        return float(value)
    if isinstance(value, str):
        try:
            return _eval_node(ast.parse(value, mode="eval"))
        except (SyntaxError, ZeroDivisionError) as exc:
            raise ConfigError(f"{what}: cannot evaluate {value!r}") from exc
    raise ConfigError(f"{what}: expected a number, got {value!r}")


def _pair(value, what):
    if not isinstance(value, (list, tuple)) or len(value) != 2:
        raise ConfigError(f"{what}: expected two numbers")
    return (number(value[0], what), number(value[1], what))


@dataclass(frozen=True)
class DomainEntry:
    name: str
    domain: object
    n: int


@dataclass(frozen=True)
class ProblemSpec:
    domain: str
    s: float
    p: float
    n: int | None = None


@dataclass
class ExperimentConfig:
    domains: list
    n: int
    s_values: list
    suites: list
    seed: int | None
    output_dir: Path
    classical_limit: bool = False
    tolerances: dict = field(default_factory=lambda: dict(DEFAULT_TOLERANCES))
    samples: int = 20
    rotations: int = 10
    psd_sizes: list = field(default_factory=list)
    bochner_s: list = field(default_factory=lambda: [0.25, 0.5, 0.75])
    bochner_xi: list = field(default_factory=lambda: [0.05 * i for i in range(41)])
    subordination_s: list = field(default_factory=lambda: [0.3, 0.5, 0.7])
    subordination_count: int = 10
    semilinear: ProblemSpec | None = None
    probe: ProblemSpec | None = None
    write_matrices: bool = False
    source: str = ""

    def domain(self, name: str) -> DomainEntry:
        for d in self.domains:
            if d.name == name:
                return d
        raise ConfigError(f"unknown domain {name!r}")

    def echo(self) -> dict:
        """Deterministic description of the configuration (no paths)."""
        return {
            "domains": [{"name": d.name, "n": d.n, **d.domain.describe()} for d in self.domains],
            "n": self.n, "s_values": self.s_values, "classical_limit": self.classical_limit,
            "suites": self.suites, "seed": self.seed, "tolerances": self.tolerances,
            "samples": self.samples, "rotations": self.rotations, "psd_sizes": self.psd_sizes,
            "bochner_s": self.bochner_s, "bochner_xi": self.bochner_xi,
            "subordination_s": self.subordination_s, "subordination_count": self.subordination_count,
            "semilinear": None if self.semilinear is None else vars(self.semilinear),
            "probe": None if self.probe is None else vars(self.probe),
            "write_matrices": self.write_matrices,
        }


def _parse_domain(table: dict, base: Path, default_n: int, index: int) -> DomainEntry:
    table = dict(table)
    kind = table.pop("kind", None)
    name = str(table.pop("name", kind or f"domain{index}"))
    n = int(table.pop("n", default_n))
    center = table.pop("star_center", None)
    try:
        if kind == "interval":
            dom = Interval(number(table.pop("a"), "a"), number(table.pop("b"), "b"),
                           number(center, "star_center") if center is not None else 0.0)
        elif kind == "rectangle":
            args = [number(table.pop(k), k) for k in "abcd"]
            dom = Rectangle(*args, _pair(center, "star_center") if center is not None else (0.0, 0.0))
        elif kind == "disk":
            radius = number(table.pop("radius", 1.0), "radius")
            origin = _pair(table.pop("origin", (0, 0)), "origin")
            dom = Disk(radius, origin, _pair(center, "star_center") if center is not None else origin)
        elif kind == "grid":
            sc = _pair(center, "star_center") if center is not None else None
            if "mask" in table:
                dom = load_grid_mask(base / table.pop("mask"), star_center=sc)
            elif table.pop("shape", "rectangle") == "l_shape":
                dom = GridMask.l_shape(number(table.pop("size", 1.0), "size"), number(table.pop("h"), "h"),
                                       star_center=sc)
            else:
                dom = GridMask.rectangle(number(table.pop("width", 1.0), "width"),
                                         number(table.pop("height", 1.0), "height"),
                                         number(table.pop("h"), "h"), star_center=sc)
        else:
            raise ConfigError(f"domain {name!r}: unknown kind {kind!r}")
    except KeyError as exc:
        raise ConfigError(f"domain {name!r}: missing key {exc.args[0]!r}") from None
    except (DomainError, OSError) as exc:
        raise ConfigError(f"domain {name!r}: {exc}") from exc
    if table:
        raise ConfigError(f"domain {name!r}: unknown keys {sorted(table)}")
    if n < 1:
        raise ConfigError(f"domain {name!r}: n must be positive")
    return DomainEntry(name, dom, n)


def _orders(values, what):
    out = []
    for v in values:
        try:
            out.append(check_order(number(v, what)))
        except ValueError as exc:
            raise ConfigError(str(exc)) from None
    return out


def _problem(table, defaults, cfg_domains):
    if table is None:
        return None
    t = {**defaults, **table}
    spec = ProblemSpec(str(t["domain"]), _orders([t["s"]], "s")[0], number(t["p"], "p"),
                       None if t.get("n") is None else int(t["n"]))
    if spec.domain not in [d.name for d in cfg_domains]:
        raise ConfigError(f"unknown domain {spec.domain!r}")
    return spec


def parse_config(data: dict, base: Path = Path("."), source: str = "") -> ExperimentConfig:
    data = dict(data)
    n = int(data.pop("n", 32))
    if "domains" in data:
        tables = data.pop("domains")
    elif "domain" in data:
        tables = [data.pop("domain")]
    else:
        raise ConfigError("config needs a [domain] table or [[domains]] entries")
    if isinstance(tables, dict):
        tables = [tables]
    domains = [_parse_domain(t, base, n, i) for i, t in enumerate(tables)]
    if len({d.name for d in domains}) != len(domains):
        raise ConfigError("domain names must be unique")

    s_values = _orders(data.pop("s_values", [0.5]), "s_values")
    suites = list(data.pop("suites", list(SUITES)))
    bad = [x for x in suites if x not in SUITES]
    if bad:
        raise ConfigError(f"unknown suites {bad}; choose from {list(SUITES)}")
    if len(set(suites)) != len(suites):
        raise ConfigError("suites must not repeat")
    seed = data.pop("seed", None)
    if seed is not None:
        seed = int(seed)
    tol = dict(DEFAULT_TOLERANCES)
    user_tol = data.pop("tolerances", {})
    unknown = set(user_tol) - set(tol)
    if unknown:
        raise ConfigError(f"unknown tolerances {sorted(unknown)}")
    tol.update({k: number(v, k) for k, v in user_tol.items()})

    first2d = next((d.name for d in domains if d.domain.dim == 2), domains[0].name)
    semi = _problem(data.pop("semilinear", None), {"domain": first2d, "s": 0.5, "p": 2.0}, domains)
    probe = _problem(data.pop("probe", None), {"domain": first2d, "s": 0.5, "p": 5.0}, domains)
    if "semilinear" in suites and semi is None:
        semi = _problem({}, {"domain": first2d, "s": 0.5, "p": 2.0}, domains)
    if "probe" in suites and probe is None:
        probe = _problem({}, {"domain": first2d, "s": 0.5, "p": 5.0}, domains)

    cfg = ExperimentConfig(
        domains=domains, n=n, s_values=s_values, suites=suites, seed=seed,
        output_dir=Path(data.pop("output_dir", "sfl-output")),
        classical_limit=bool(data.pop("classical_limit", False)), tolerances=tol,
        samples=int(data.pop("samples", 20)), rotations=int(data.pop("rotations", 10)),
        psd_sizes=[int(v) for v in data.pop("psd_sizes", [])],
        semilinear=semi, probe=probe, write_matrices=bool(data.pop("write_matrices", False)),
        source=source,
    )
    if "bochner_s" in data:
        cfg.bochner_s = _orders(data.pop("bochner_s"), "bochner_s")
    if "bochner_xi" in data:
        cfg.bochner_xi = [number(v, "bochner_xi") for v in data.pop("bochner_xi")]
    if "subordination_s" in data:
        cfg.subordination_s = _orders(data.pop("subordination_s"), "subordination_s")
    cfg.subordination_count = int(data.pop("subordination_count", 10))
    if data:
        raise ConfigError(f"unknown top-level keys {sorted(data)}")
    if cfg.seed is None and RANDOMIZED & set(cfg.suites):
        raise ConfigError(f"a seed is required for randomized suites {sorted(RANDOMIZED & set(cfg.suites))}")
    return cfg


def load_config(path) -> ExperimentConfig:
    path = Path(path)
    try:
        with open(path, "rb") as fh:
            data = tomllib.load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read {path}: {exc.strerror}") from exc
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"{path}: {exc}") from exc
    cfg = parse_config(data, path.parent, str(path))
    if not cfg.output_dir.is_absolute():
        cfg.output_dir = path.parent / cfg.output_dir
    return cfg
