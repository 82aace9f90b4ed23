"""Atom geometry, dipole orientations, bath parameters, and config ingestion.

Reduced units throughout: positions in dipole lengths, times in
(dipole length)/c, temperature as k_B*T*(dipole length)/(hbar*c).
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional, Sequence, Union

import numpy as np

__all__ = [
    "DEFAULT_ALPHA",
    "ConfigError",
    "DipoleOrientationError",
    "BathParams",
    "AtomConfig",
    "LatticeSpec",
    "ParsedConfig",
    "build_config",
    "pair_geometry",
    "config_to_dict",
    "parse_config",
    "load_config",
]

# Fine-structure constant as used for all default couplings.
DEFAULT_ALPHA = 1.0 / 137.06

_UNIT_TOL = 1e-12


class ConfigError(ValueError):
    """Malformed configuration (bad schema, bad field value, unknown key)."""


class DipoleOrientationError(ValueError):
    """Dipoles are not parallel; the closed-form kernel path does not apply."""


@dataclass(frozen=True)
class BathParams:
    """Bath coupling parameters in reduced units.

    kappa is the dimensionless UV cutoff (max wave number times dipole
    length); theta_T the reduced temperature, with 0 selecting the exact
    zero-temperature closed forms.
    """

    kappa: float
    alpha: float = DEFAULT_ALPHA
    theta_T: float = 0.0

    def __post_init__(self):
        if not (math.isfinite(self.kappa) and self.kappa > 0.0):
            raise ConfigError(f"kappa must be positive and finite, got {self.kappa!r}")
        if not (math.isfinite(self.alpha) and self.alpha > 0.0):
            raise ConfigError(f"alpha must be positive and finite, got {self.alpha!r}")
        if not (math.isfinite(self.theta_T) and self.theta_T >= 0.0):
            raise ConfigError(f"theta_T must be non-negative, got {self.theta_T!r}")


def _as_readonly(a: np.ndarray) -> np.ndarray:
    a = np.array(a, dtype=float)
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class AtomConfig:
    """Positions and dipole orientations of N atoms plus the observed subset.

    Positions are in units of the dipole length.  Duplicate positions are
    allowed (they represent the zero-separation limit).  ``selected`` lists
    the sub-cluster whose decoherence is studied; the remaining atoms only
    contribute indirectly.
    """

    positions: np.ndarray
    dipoles: np.ndarray
    selected: tuple[int, ...] = field(default=())

    def __post_init__(self):
        pos = _as_readonly(np.atleast_2d(self.positions))
        dip = _as_readonly(np.atleast_2d(self.dipoles))
        if pos.ndim != 2 or pos.shape[1] != 3:
            raise ConfigError(f"positions must be (N, 3), got shape {pos.shape}")
        if dip.shape != pos.shape:
            raise ConfigError(f"dipoles must match positions shape {pos.shape}, got {dip.shape}")
        if not np.all(np.isfinite(pos)):
            raise ConfigError("positions must be finite")
        norms = np.linalg.norm(dip, axis=1)
        if not np.all(np.abs(norms - 1.0) <= _UNIT_TOL):
            raise ConfigError("dipole vectors must have unit norm (within 1e-12)")
        sel = tuple(int(i) for i in self.selected) or tuple(range(len(pos)))
        if len(set(sel)) != len(sel):
            raise ConfigError(f"selected indices must be distinct, got {sel}")
        if sel and (min(sel) < 0 or max(sel) >= len(pos)):
            raise ConfigError(f"selected indices out of range 0..{len(pos) - 1}: {sel}")
        object.__setattr__(self, "positions", pos)
        object.__setattr__(self, "dipoles", dip)
        object.__setattr__(self, "selected", sel)

    @property
    def n_atoms(self) -> int:
        return self.positions.shape[0]

    @property
    def n_selected(self) -> int:
        return len(self.selected)

    @property
    def unselected(self) -> tuple[int, ...]:
        chosen = set(self.selected)
        return tuple(i for i in range(self.n_atoms) if i not in chosen)

    def dipoles_parallel(self, tol: float = 1e-9) -> bool:
        return bool(np.all(np.abs(self.dipoles - self.dipoles[0]) <= tol))

    def require_parallel_dipoles(self) -> np.ndarray:
        if not self.dipoles_parallel():
            raise DipoleOrientationError(
                "closed-form kernels require all dipoles oriented in the same direction"
            )
        return self.dipoles[0]


@dataclass(frozen=True)
class LatticeSpec:
    """Regular-lattice generator parameters (spacing in dipole lengths)."""

    kind: str
    nx: int = 1
    ny: int = 1
    spacing: float = 1.0

    _KINDS = ("square2d", "linear", "explicit")

    def __post_init__(self):
        if self.kind not in self._KINDS:
            raise ConfigError(f"lattice kind must be one of {self._KINDS}, got {self.kind!r}")
        if self.kind == "explicit":
            return
        if int(self.nx) < 1 or (self.kind == "square2d" and int(self.ny) < 1):
            raise ConfigError("lattice extents nx, ny must be positive integers")
        if not (math.isfinite(self.spacing) and self.spacing > 0.0):
            raise ConfigError(f"lattice spacing must be positive, got {self.spacing!r}")

    @property
    def n_atoms(self) -> int:
        if self.kind == "square2d":
            return int(self.nx) * int(self.ny)
        if self.kind == "linear":
            return int(self.nx)
        raise ConfigError("explicit configurations carry their own atom list")


def _unit_vector(v: Sequence[float], what: str) -> np.ndarray:
    arr = np.asarray(v, dtype=float)
    if arr.shape != (3,) or not np.all(np.isfinite(arr)):
        raise ConfigError(f"{what} must be a finite 3-vector, got {v!r}")
    norm = float(np.linalg.norm(arr))
    if norm == 0.0:
        raise ConfigError(f"{what} must be nonzero")
    return arr / norm


def build_config(
    spec: LatticeSpec,
    dipole: Sequence[float] = (0.0, 0.0, 1.0),
    selected: Sequence[int] = (),
) -> AtomConfig:
    """Lay atoms out on the lattice with a common dipole direction."""
    u = _unit_vector(dipole, "dipole")
    a = float(spec.spacing)
    if spec.kind == "square2d":
        pos = [
            (ix * a, iy * a, 0.0) for ix in range(int(spec.nx)) for iy in range(int(spec.ny))
        ]
    elif spec.kind == "linear":
        pos = [(ix * a, 0.0, 0.0) for ix in range(int(spec.nx))]
    else:
        raise ConfigError("explicit configurations carry their own atom list")
    positions = np.asarray(pos, dtype=float)
    dipoles = np.tile(u, (len(pos), 1))
    return AtomConfig(positions=positions, dipoles=dipoles, selected=tuple(selected))


def pair_geometry(cfg: AtomConfig, i: int, j: int) -> tuple[float, float]:
    """Separation and dipole angle for an atom pair, in reduced units.

    Returns (r_ij, theta_ij) with theta folded into [0, pi/2]; only even
    functions of theta enter the kernels, so the fold makes the result
    symmetric under i <-> j.  Coincident atoms (including i = j) return
    (0, 0) by convention.
    """
    n = cfg.n_atoms
    if not (0 <= i < n and 0 <= j < n):
        raise IndexError(f"atom indices ({i}, {j}) out of range for {n} atoms")
    u = cfg.require_parallel_dipoles()
    delta = cfg.positions[i] - cfg.positions[j]
    r = float(np.linalg.norm(delta))
    if r == 0.0:
        return 0.0, 0.0
    cos_theta = abs(float(np.dot(u, delta)) / r)
    theta = math.acos(min(1.0, cos_theta))
    return r, theta


# ---------------------------------------------------------------------------
# JSON configuration schema
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ParsedConfig:
    """A fully validated configuration: bath, atoms, and optional lattice."""

    bath: BathParams
    atoms: AtomConfig
    lattice: Optional[LatticeSpec] = None
    dipole: tuple[float, float, float] = (0.0, 0.0, 1.0)

    def with_spacing(self, spacing: float) -> "ParsedConfig":
        """Rebuild a lattice configuration at a different spacing."""
        if self.lattice is None or self.lattice.kind == "explicit":
            raise ConfigError("spacing sweeps require a lattice configuration")
        lat = LatticeSpec(self.lattice.kind, self.lattice.nx, self.lattice.ny, float(spacing))
        atoms = build_config(lat, self.dipole, self.atoms.selected)
        return ParsedConfig(self.bath, atoms, lat, self.dipole)


def _reject_unknown(obj: dict, allowed: set, where: str) -> None:
    unknown = set(obj) - allowed
    if unknown:
        raise ConfigError(f"unknown key(s) {sorted(unknown)} in {where}")


def _require(obj: dict, key: str, where: str):
    if key not in obj:
        raise ConfigError(f"missing required key {key!r} in {where}")
    return obj[key]


def _as_number(value, where: str) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(f"{where} must be a number, got {value!r}")
    return float(value)


def _as_int(value, where: str) -> int:
    if isinstance(value, bool) or not isinstance(value, int):
        raise ConfigError(f"{where} must be an integer, got {value!r}")
    return int(value)


def parse_config(doc: dict) -> ParsedConfig:
    """Validate a configuration document against the schema.

    Schema::

        { "bath":  {"alpha": real?, "kappa": real, "temperature": real?},
          "atoms": {"lattice": {"kind": "square2d"|"linear",
                                "nx": int, "ny": int?, "spacing": real}}
                   | {"explicit": [{"pos": [x,y,z], "dipole": [ux,uy,uz]}]},
          "selected": [int]? }

    Unknown keys are rejected anywhere in the document; dipole vectors are
    normalized on ingestion.  Lattice configurations take the default dipole
    direction normal to the lattice plane.
    """
    if not isinstance(doc, dict):
        raise ConfigError(f"config root must be an object, got {type(doc).__name__}")
    _reject_unknown(doc, {"bath", "atoms", "selected"}, "config root")

    bath_doc = _require(doc, "bath", "config root")
    if not isinstance(bath_doc, dict):
        raise ConfigError("'bath' must be an object")
    _reject_unknown(bath_doc, {"alpha", "kappa", "temperature"}, "'bath'")
    bath = BathParams(
        kappa=_as_number(_require(bath_doc, "kappa", "'bath'"), "bath.kappa"),
        alpha=_as_number(bath_doc.get("alpha", DEFAULT_ALPHA), "bath.alpha"),
        theta_T=_as_number(bath_doc.get("temperature", 0.0), "bath.temperature"),
    )

    atoms_doc = _require(doc, "atoms", "config root")
    if not isinstance(atoms_doc, dict):
        raise ConfigError("'atoms' must be an object")
    _reject_unknown(atoms_doc, {"lattice", "explicit"}, "'atoms'")
    if ("lattice" in atoms_doc) == ("explicit" in atoms_doc):
        raise ConfigError("'atoms' must contain exactly one of 'lattice' or 'explicit'")

    selected_doc = doc.get("selected", [])
    if not isinstance(selected_doc, list):
        raise ConfigError("'selected' must be a list of atom indices")
    selected = tuple(_as_int(i, "selected[]") for i in selected_doc)

    if "lattice" in atoms_doc:
        lat_doc = atoms_doc["lattice"]
        if not isinstance(lat_doc, dict):
            raise ConfigError("'atoms.lattice' must be an object")
        _reject_unknown(lat_doc, {"kind", "nx", "ny", "spacing"}, "'atoms.lattice'")
        kind = _require(lat_doc, "kind", "'atoms.lattice'")
        if kind not in ("square2d", "linear"):
            raise ConfigError(f"lattice kind must be 'square2d' or 'linear', got {kind!r}")
        lat = LatticeSpec(
            kind=kind,
            nx=_as_int(_require(lat_doc, "nx", "'atoms.lattice'"), "lattice.nx"),
            ny=_as_int(lat_doc.get("ny", 1), "lattice.ny"),
            spacing=_as_number(_require(lat_doc, "spacing", "'atoms.lattice'"), "lattice.spacing"),
        )
        # Default dipole: normal to the lattice plane (the z axis for both
        # generated kinds), so in-plane pairs sit at theta = pi/2.
        dipole = (0.0, 0.0, 1.0)
        atoms = build_config(lat, dipole, selected)
        return ParsedConfig(bath, atoms, lat, dipole)

    entries = atoms_doc["explicit"]
    if not isinstance(entries, list) or not entries:
        raise ConfigError("'atoms.explicit' must be a non-empty list")
    positions = []
    dipoles = []
    for idx, entry in enumerate(entries):
        where = f"'atoms.explicit[{idx}]'"
        if not isinstance(entry, dict):
            raise ConfigError(f"{where} must be an object")
        _reject_unknown(entry, {"pos", "dipole"}, where)
        pos = _require(entry, "pos", where)
        dip = _require(entry, "dipole", where)
        if not (isinstance(pos, list) and len(pos) == 3):
            raise ConfigError(f"{where}.pos must be [x, y, z]")
        positions.append([_as_number(v, f"{where}.pos") for v in pos])
        if not (isinstance(dip, list) and len(dip) == 3):
            raise ConfigError(f"{where}.dipole must be [ux, uy, uz]")
        dipoles.append(_unit_vector([_as_number(v, f"{where}.dipole") for v in dip], f"{where}.dipole"))
    atoms = AtomConfig(
        positions=np.asarray(positions, dtype=float),
        dipoles=np.asarray(dipoles, dtype=float),
        selected=selected,
    )
    return ParsedConfig(bath, atoms, None, (0.0, 0.0, 1.0))


def load_config(path: Union[str, Path]) -> ParsedConfig:
    """Parse a JSON configuration file."""
    text = Path(path).read_text()
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: invalid JSON at line {exc.lineno}, column {exc.colno}: {exc.msg}") from exc
    return parse_config(doc)


def config_to_dict(parsed: ParsedConfig) -> dict:
    """Serialize back to the JSON schema (round-trips positions bit-exactly)."""
    bath = {
        "alpha": parsed.bath.alpha,
        "kappa": parsed.bath.kappa,
        "temperature": parsed.bath.theta_T,
    }
    if parsed.lattice is not None and parsed.lattice.kind != "explicit":
        atoms = {
            "lattice": {
                "kind": parsed.lattice.kind,
                "nx": int(parsed.lattice.nx),
                "ny": int(parsed.lattice.ny),
                "spacing": parsed.lattice.spacing,
            }
        }
    else:
        atoms = {
            "explicit": [
                {"pos": [float(x) for x in p], "dipole": [float(u) for u in d]}
                for p, d in zip(parsed.atoms.positions, parsed.atoms.dipoles)
            ]
        }
    return {"bath": bath, "atoms": atoms, "selected": [int(i) for i in parsed.atoms.selected]}
