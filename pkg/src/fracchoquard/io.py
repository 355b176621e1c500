"""Binary field files, ``key = value`` run configs and run manifests."""

from __future__ import annotations

import json
import math
import os
import struct
import subprocess
from dataclasses import dataclass, field
from importlib import metadata
from pathlib import Path

import numpy as np

from .errors import ChoquardError, FormatError, NonPositiveOmegaForPOmega, ValidationError
from .params import ProblemParams, validate_params
from .spectral import ConvolutionMode, Field, Grid, make_grid
from .symmetry import SymmetrySpec

MAGIC = b"CHQF"
VERSION = 1


class IoError(ChoquardError):
    """Filesystem failure while reading or writing an artifact."""


# -- field files ------------------------------------------------------------------


def encode_field(f: Field) -> bytes:
    """``CHQF | u32 version | u8 dim | dim x u32 n | f64 L | n^dim x f64``,
    all little-endian, payload row-major."""
    grid = f.grid
    head = MAGIC + struct.pack("<IB", VERSION, grid.dim)
    head += struct.pack(f"<{grid.dim}I", *grid.shape)
    head += struct.pack("<d", grid.half_width)
    return head + np.ascontiguousarray(f.values, dtype="<f8").tobytes()


def decode_field(data: bytes) -> Field:
    if len(data) < 9 or data[:4] != MAGIC:
        raise FormatError("bad magic: not a field file")
    version, dim = struct.unpack_from("<IB", data, 4)
    if version != VERSION:
        raise FormatError(f"unsupported version {version}")
    if dim < 1:
        raise FormatError("field file declares dimension 0")
    offset = 9
    need = offset + 4 * dim + 8
    if len(data) < need:
        raise FormatError("truncated header")
    dims = struct.unpack_from(f"<{dim}I", data, offset)
    (half_width,) = struct.unpack_from("<d", data, offset + 4 * dim)
    count = math.prod(dims)
    if len(data) != need + 8 * count:
        raise FormatError(f"payload holds {len(data) - need} bytes, expected {8 * count}")
    if len(set(dims)) != 1:
        raise FormatError(f"grid must have equal points per axis, got {dims}")
    try:
        grid = make_grid(dim, dims[0], half_width, max_elements=count)
    except ValidationError as exc:
        raise FormatError(f"invalid grid in header: {exc}") from None
    values = np.frombuffer(data, dtype="<f8", count=count, offset=need).astype(float)
    try:
        return Field(grid, values.reshape(grid.shape))
    except ValidationError as exc:
        raise FormatError(str(exc)) from None


def write_field(path, f: Field) -> None:
    try:
        Path(path).write_bytes(encode_field(f))
    except OSError as exc:
        raise IoError(f"cannot write {path}: {exc}") from exc


def read_field(path) -> Field:
    try:
        data = Path(path).read_bytes()
    except OSError as exc:
        raise IoError(f"cannot read {path}: {exc}") from exc
    return decode_field(data)


# -- run configuration -------------------------------------------------------------


def parse_config(text: str) -> dict[str, str]:
    """Plain ``key = value`` lines; ``#`` starts a comment."""
    out = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, value = line.partition("=")
        if not sep or not key.strip():
            raise ValidationError(f"config line {lineno}: expected 'key = value', got {raw!r}")
        out[key.strip().lower().replace("-", "_")] = value.strip()
    return out


def load_config(path) -> dict[str, str]:
    try:
        return parse_config(Path(path).read_text())
    except OSError as exc:
        raise IoError(f"cannot read config {path}: {exc}") from exc


_FLOATS = {"s", "alpha", "p", "omega", "L", "rho", "dt", "tol", "noise"}
_INTS = {"dim", "n", "max_iter", "seed"}
_STRS = {"solver", "symmetry", "out", "mode"}
CONFIG_KEYS = _FLOATS | _INTS | _STRS


@dataclass
class RunConfig:
    params: ProblemParams
    n: int
    L: float
    solver: str = "petviashvili"
    rho: float | None = None
    dt: float = 0.5
    max_iter: int = 2000
    tol: float = 1e-10
    noise: float = 0.0
    seed: int = 0
    symmetry: SymmetrySpec | None = None
    mode: ConvolutionMode = ConvolutionMode.FREE_SPACE
    out: str = "results"
    extra: dict = field(default_factory=dict)

    def grid(self) -> Grid:
        return make_grid(self.params.dim, self.n, self.L)

    def as_dict(self) -> dict:
        return {
            **self.params.as_dict(),
            "n": self.n,
            "L": self.L,
            "solver": self.solver,
            "rho": self.rho,
            "dt": self.dt,
            "max_iter": self.max_iter,
            "tol": self.tol,
            "noise": self.noise,
            "seed": self.seed,
            "symmetry": None if self.symmetry is None else _symmetry_text(self.symmetry),
            "mode": self.mode.value,
            "out": self.out,
        }


def _symmetry_text(spec: SymmetrySpec) -> str:
    names = {"Radial": "radial", "BlockRadial": "block-radial", "OddSwap": "odd-swap"}
    name = names[spec.kind.value]
    return name if spec.kind.value == "Radial" else f"{name}:{spec.m}"


def _convert(key, value):
    if value is None:
        return None
    try:
        if key in _FLOATS:
            return float(value)
        if key in _INTS:
            f = float(value)
            if not f.is_integer():
                raise ValueError
            return int(f)
    except (TypeError, ValueError):
        raise ValidationError(f"config key {key!r}: cannot parse {value!r}") from None
    return str(value)


def build_run_config(values: dict) -> RunConfig:
    """Validate a merged mapping (file values overridden by flags)."""
    values = {("L" if k.lower() == "l" else k): v for k, v in values.items() if v is not None}
    unknown = set(values) - CONFIG_KEYS
    if unknown:
        raise ValidationError(f"unknown config keys: {', '.join(sorted(unknown))}")
    v = {k: _convert(k, x) for k, x in values.items()}
    for key in ("dim", "s", "alpha", "p", "n", "L"):
        if key not in v:
            raise ValidationError(f"missing required setting {key!r}")
    solver = v.get("solver", "petviashvili").lower()
    if solver not in ("ngf", "petviashvili"):
        raise ValidationError(f"solver must be 'ngf' or 'petviashvili', got {solver!r}")
    omega = v.get("omega", 1.0)
    params = validate_params(v["dim"], v["s"], v["alpha"], v["p"], omega, zero_mass=omega == 0.0)
    if solver == "petviashvili" and not omega > 0:
        raise NonPositiveOmegaForPOmega("the petviashvili solver needs omega > 0")
    if solver == "ngf" and not (v.get("rho") or 0) > 0:
        raise ValidationError("the ngf solver needs rho > 0")
    try:
        mode = ConvolutionMode(v.get("mode", ConvolutionMode.FREE_SPACE.value))
    except ValueError:
        raise ValidationError(f"unknown convolution mode {v.get('mode')!r}") from None
    cfg = RunConfig(
        params=params,
        n=v["n"],
        L=v["L"],
        solver=solver,
        rho=v.get("rho"),
        dt=v.get("dt", 0.5),
        max_iter=v.get("max_iter", 2000),
        tol=v.get("tol", 1e-10),
        noise=v.get("noise", 0.0),
        seed=v.get("seed", 0),
        symmetry=SymmetrySpec.parse(v["symmetry"]) if v.get("symmetry") else None,
        mode=mode,
        out=v.get("out", "results"),
    )
    cfg.grid()
    if cfg.symmetry is not None:
        cfg.symmetry.check(params.dim)
    return cfg


# -- manifest ------------------------------------------------------------------------------------


def version_string() -> str:
    """``git describe`` of the source tree when available, else the package version."""
    try:
        base = metadata.version("artifact")
    except metadata.PackageNotFoundError:
        base = "0+unknown"
    try:
        out = subprocess.run(
            ["git", "describe", "--always", "--dirty", "--tags"],
            cwd=os.path.dirname(__file__),
            capture_output=True,
            text=True,
            timeout=5,
        )
        if out.returncode == 0 and out.stdout.strip():
            return f"{base}+g{out.stdout.strip()}"
    except (OSError, subprocess.SubprocessError):
        pass
    return base


def write_manifest(directory, command: str, argv: list[str], config: dict, seed: int | None) -> Path:
    path = Path(directory) / "manifest.json"
    doc = {
        "command": command,
        "argv": list(argv),
        "version": version_string(),
        "seed": seed,
        "config": config,
    }
    write_json(path, doc)
    return path


def write_json(path, doc) -> None:
    try:
        Path(path).parent.mkdir(parents=True, exist_ok=True)
        Path(path).write_text(json.dumps(doc, indent=2, sort_keys=True, default=_json_default) + "\n")
    except OSError as exc:
        raise IoError(f"cannot write {path}: {exc}") from exc


def _json_default(obj):
    if isinstance(obj, (np.floating, np.integer)):
        return obj.item()
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if hasattr(obj, "value"):
        return obj.value
    raise TypeError(f"not JSON serializable: {type(obj).__name__}")
