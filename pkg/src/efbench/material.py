"""Pole-residue equivalent-fluid material models.

A material is described by two frequency response functions, the equivalent
compressibility ``C(w) = 1/K(w)`` and the equivalent specific volume
``v(w) = 1/rho(w)``. Each one is a rational function

    F(w) = F_inf + sum_j A_j / (alpha_j - i w)
           + 1/2 sum_k [ (B_k + i C_k) / (beta_k + i gamma_k - i w)
                        + (B_k - i C_k) / (beta_k - i gamma_k - i w) ]

with ``alpha_j > 0`` and ``beta_k > 0`` so that every term is the transform of
a causal, decaying kernel. Evaluation here uses that sign convention
literally; :mod:`efbench.spectral` documents how it maps onto the DFT.

Residues are stored in units of ``quantity / s`` (``1/(Pa s)`` for the
compressibility), so that ``A/alpha`` carries the unit of the quantity.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass, field, replace
from typing import NamedTuple

import numpy as np
import yaml

from .errors import MaterialParseError, MaterialValidationError


class RealPole(NamedTuple):
    residue: float
    pole: float


class ComplexPair(NamedTuple):
    b: float
    c: float
    beta: float
    gamma: float


@dataclass(frozen=True)
class RationalFRF:
    constant: float
    real_poles: tuple[RealPole, ...] = ()
    complex_pairs: tuple[ComplexPair, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "constant", float(self.constant))
        object.__setattr__(
            self, "real_poles", tuple(RealPole(*map(float, p)) for p in self.real_poles)
        )
        object.__setattr__(
            self,
            "complex_pairs",
            tuple(ComplexPair(*map(float, p)) for p in self.complex_pairs),
        )
        values = [self.constant]
        values += [v for p in self.real_poles for v in p]
        values += [v for p in self.complex_pairs for v in p]
        if not all(math.isfinite(v) for v in values):
            raise MaterialValidationError("coefficients must be finite")
        for p in self.real_poles:
            if p.pole <= 0:
                raise MaterialValidationError("pole must be positive")
        for p in self.complex_pairs:
            if p.beta <= 0:
                raise MaterialValidationError("pole must be positive (beta)")
            if p.gamma < 0:
                raise MaterialValidationError("gamma must be nonnegative")

    @property
    def is_constant(self) -> bool:
        return not self.real_poles and not self.complex_pairs

    @property
    def residue_sum(self) -> float:
        """Sum of residue magnitudes, bounding ``|F(w) - F_inf| * |w|``."""
        total = sum(abs(p.residue) for p in self.real_poles)
        total += sum(math.hypot(p.b, p.c) for p in self.complex_pairs)
        return total


@dataclass(frozen=True)
class EquivalentFluid:
    name: str
    compressibility: RationalFRF
    specific_volume: RationalFRF = field(repr=False)

    def __post_init__(self):
        for key in ("compressibility", "specific_volume"):
            if not getattr(self, key).constant > 0:
                raise MaterialValidationError(
                    "high-frequency constant must be positive", f"{key}.constant")

    @property
    def c_inf(self) -> float:
        """High-frequency sound speed ``sqrt(v_inf / C_inf)`` in m/s."""
        ratio = self.specific_volume.constant / self.compressibility.constant
        if not ratio > 0:
            raise MaterialValidationError(
                "v_inf / C_inf must be positive to define a wave speed"
            )
        return math.sqrt(ratio)


def _scalar_or_array(out):
    return out[()] if out.ndim == 0 else out


def evaluate_frf(model: RationalFRF, omega):
    """Evaluate the rational model at real angular frequency ``omega`` (rad/s).

    Vectorised over ``omega``. Each term is written in real/imaginary form so
    the result is exactly conjugate-symmetric and exactly real at ``omega=0``.
    """
    w = np.asarray(omega, dtype=float)
    re = np.full(w.shape, model.constant)
    im = np.zeros(w.shape)
    for a, alpha in model.real_poles:
        den = alpha * alpha + w * w
        re = re + a * alpha / den
        im = im + a * w / den
    for b, c, beta, gamma in model.complex_pairs:
        # (b + ic) / (beta + i(gamma - w)) and its partner (b - ic) / (beta - i(gamma + w))
        g1 = gamma - w
        g2 = gamma + w
        d1 = beta * beta + g1 * g1
        d2 = beta * beta + g2 * g2
        re1 = (b * beta + c * g1) / d1
        im1 = (c * beta - b * g1) / d1
        re2 = (b * beta + c * g2) / d2
        im2 = (b * g2 - c * beta) / d2
        re = re + 0.5 * (re1 + re2)
        im = im + 0.5 * (im1 + im2)
    return _scalar_or_array(re + 1j * im)


def evaluate_frf_derivative(model: RationalFRF, omega):
    """Closed-form ``dF/dw`` of the rational model."""
    w = np.asarray(omega, dtype=float)
    out = np.zeros(w.shape, dtype=complex)
    for a, alpha in model.real_poles:
        out = out + 1j * a / (alpha - 1j * w) ** 2
    for b, c, beta, gamma in model.complex_pairs:
        s1 = beta + 1j * gamma - 1j * w
        s2 = beta - 1j * gamma - 1j * w
        out = out + 0.5j * ((b + 1j * c) / s1**2 + (b - 1j * c) / s2**2)
    return _scalar_or_array(out)


def builtin_mat1() -> EquivalentFluid:
    """The strongly damping fictitious porous material ``mat1``."""
    return EquivalentFluid(
        name="mat1",
        compressibility=RationalFRF(
            constant=6.5866e-6,
            real_poles=(RealPole(3.32994e-1, 591390.0), RealPole(1.37113e-1, 37500.0)),
        ),
        specific_volume=RationalFRF(
            constant=0.772093,
            real_poles=(RealPole(-20397.84, 84764.0), RealPole(-10110.46, 21687.0)),
        ),
    )


BUILTIN_MATERIALS = {"mat1": builtin_mat1}


def get_builtin(name: str) -> EquivalentFluid:
    try:
        return BUILTIN_MATERIALS[name]()
    except KeyError:
        known = ", ".join(sorted(BUILTIN_MATERIALS))
        raise MaterialParseError(f"unknown material {name!r} (known: {known})") from None


def lossless_limit(mat: EquivalentFluid) -> EquivalentFluid:
    """Drop all poles, keeping ``C_inf`` and ``v_inf`` (a nondispersive medium)."""
    return replace(
        mat,
        name=f"{mat.name}-lossless",
        compressibility=RationalFRF(mat.compressibility.constant),
        specific_volume=RationalFRF(mat.specific_volume.constant),
    )


# ---------------------------------------------------------------------------
# material files

_NUMBER = re.compile(r"^[+-]?(\d+\.?\d*|\.\d+)([eE][+-]?\d+)?$")
_FRF_KEYS = ("constant", "real_poles", "complex_pairs")
_POLE_KEYS = ("residue", "pole")
_PAIR_KEYS = ("b", "c", "beta", "gamma")


def _line(node) -> int:
    return node.start_mark.line + 1


def _mapping(node, path, required, optional=()):
    if not isinstance(node, yaml.MappingNode):
        raise MaterialParseError("expected a mapping", path, _line(node))
    out = {}
    for key_node, value_node in node.value:
        key = key_node.value
        if key not in required and key not in optional:
            raise MaterialParseError(f"unknown field {key!r}", path, _line(key_node))
        if key in out:
            raise MaterialParseError(f"duplicate field {key!r}", path, _line(key_node))
        out[key] = value_node
    for key in required:
        if key not in out:
            raise MaterialParseError(f"missing field {key!r}", path, _line(node))
    return out


def _number(node, path) -> float:
    if not isinstance(node, yaml.ScalarNode) or not _NUMBER.match(node.value.strip()):
        raise MaterialParseError("expected a decimal number", path, _line(node))
    return float(node.value)


def _sequence(node, path):
    if not isinstance(node, yaml.SequenceNode):
        raise MaterialParseError("expected a list", path, _line(node))
    return node.value


def _parse_frf(node, path) -> RationalFRF:
    fields = _mapping(node, path, required=("constant",), optional=_FRF_KEYS[1:])
    constant = _number(fields["constant"], f"{path}.constant")
    if not constant > 0:
        raise MaterialValidationError("high-frequency constant must be positive",
                                      f"{path}.constant", _line(fields["constant"]))
    poles = []
    for i, item in enumerate(_sequence(fields["real_poles"], f"{path}.real_poles")
                             if "real_poles" in fields else []):
        where = f"{path}.real_poles[{i}]"
        entry = _mapping(item, where, required=_POLE_KEYS)
        residue = _number(entry["residue"], f"{where}.residue")
        pole = _number(entry["pole"], f"{where}.pole")
        if pole <= 0:
            raise MaterialValidationError("pole must be positive", f"{where}.pole",
                                          _line(entry["pole"]))
        poles.append(RealPole(residue, pole))
    pairs = []
    for i, item in enumerate(_sequence(fields["complex_pairs"], f"{path}.complex_pairs")
                             if "complex_pairs" in fields else []):
        where = f"{path}.complex_pairs[{i}]"
        entry = _mapping(item, where, required=_PAIR_KEYS)
        vals = {k: _number(entry[k], f"{where}.{k}") for k in _PAIR_KEYS}
        if vals["beta"] <= 0:
            raise MaterialValidationError("pole must be positive", f"{where}.beta",
                                          _line(entry["beta"]))
        if vals["gamma"] < 0:
            raise MaterialValidationError("gamma must be nonnegative", f"{where}.gamma",
                                          _line(entry["gamma"]))
        pairs.append(ComplexPair(**vals))
    return RationalFRF(constant, tuple(poles), tuple(pairs))


def parse_material(text: str) -> EquivalentFluid:
    """Parse a material file (see ``docs/material_format.md``)."""
    try:
        root = yaml.compose(text, Loader=yaml.SafeLoader)
    except yaml.MarkedYAMLError as exc:
        line = exc.problem_mark.line + 1 if exc.problem_mark else None
        raise MaterialParseError(f"malformed file ({exc.problem})", None, line) from None
    if root is None:
        raise MaterialParseError("empty material file")
    fields = _mapping(root, "", required=("name", "compressibility", "specific_volume"))
    name_node = fields["name"]
    if not isinstance(name_node, yaml.ScalarNode) or not name_node.value.strip():
        raise MaterialParseError("expected a non-empty string", "name", _line(name_node))
    return EquivalentFluid(
        name=name_node.value.strip(),
        compressibility=_parse_frf(fields["compressibility"], "compressibility"),
        specific_volume=_parse_frf(fields["specific_volume"], "specific_volume"),
    )


def _quote(text: str) -> str:
    """Double-quoted YAML scalar (escapes survive a parse unchanged)."""
    return yaml.safe_dump(text, default_style='"', width=math.inf).strip()


def _fmt(x: float) -> str:
    return repr(float(x))


def _serialize_frf(model: RationalFRF, key: str) -> list[str]:
    lines = [f"{key}:", f"  constant: {_fmt(model.constant)}"]
    if model.real_poles:
        lines.append("  real_poles:")
        lines += [f"    - {{residue: {_fmt(a)}, pole: {_fmt(p)}}}" for a, p in model.real_poles]
    else:
        lines.append("  real_poles: []")
    if model.complex_pairs:
        lines.append("  complex_pairs:")
        lines += [
            f"    - {{b: {_fmt(b)}, c: {_fmt(c)}, beta: {_fmt(be)}, gamma: {_fmt(g)}}}"
            for b, c, be, g in model.complex_pairs
        ]
    else:
        lines.append("  complex_pairs: []")
    return lines


def serialize_material(mat: EquivalentFluid) -> str:
    """Inverse of :func:`parse_material`; floats are written with ``repr``."""
    lines = ["# efbench material file", f"name: {_quote(mat.name)}"]
    lines += _serialize_frf(mat.compressibility, "compressibility")
    lines += _serialize_frf(mat.specific_volume, "specific_volume")
    return "\n".join(lines) + "\n"


def load_material(path) -> EquivalentFluid:
    with open(path, encoding="utf-8") as fh:
        return parse_material(fh.read())
