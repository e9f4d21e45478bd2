"""Experiment configuration: an INI-style ``.cfg`` file, validated in one pass.

Every problem in a file is collected and reported together. Unknown sections
and keys are errors. ``dump_config`` writes a file that loads back to an
equal config.
"""

from __future__ import annotations

import configparser
import io
import math
from dataclasses import dataclass, field, fields, replace
from importlib import resources

from .detection import DetectorModel
from .errors import ValidationError
from .source import SpdcSource
from .tpa import CollectionSetup, GaussianBeam, SampleCell
from .units import SpectralWidth

BUNDLED_CONFIG = "paper.cfg"


def _key(lo=None, hi=None, lo_open=False, optional=False, default=None, kind=float, choices=None):
    return field(default=default, metadata=dict(lo=lo, hi=hi, lo_open=lo_open, optional=optional,
                                                kind=kind, choices=choices))


@dataclass(frozen=True)
class SourceSection:
    pair_rate_per_watt: float = _key(lo=0)
    pump_power_w: float = _key(lo=0)
    center_wavelength_nm: float = _key(lo=0, lo_open=True)
    bandwidth_fwhm_nm: float = _key(lo=0, lo_open=True)
    pump_linewidth_fwhm_hz: float = _key(lo=0, lo_open=True)
    pair_rate_per_watt_err: float = _key(lo=0, optional=True, default=0.0)
    saturation_power_w: float | None = _key(lo=0, lo_open=True, optional=True)


@dataclass(frozen=True)
class BeamSection:
    waist_um: float = _key(lo=0, lo_open=True)
    wavelength_nm: float = _key(lo=0, lo_open=True)
    waist_position_mm: float = _key(optional=True, default=0.0)
    focal_integral_per_m: float | None = _key(lo=0, lo_open=True, optional=True)


@dataclass(frozen=True)
class CellSection:
    length_mm: float = _key(lo=0, lo_open=True)
    concentration_mmol_per_l: float = _key(lo=0)
    sigma2_gm: float = _key(lo=0)
    fluorescence_yield: float = _key(lo=0, hi=1)
    sigma2_gm_err: float = _key(lo=0, optional=True, default=0.0)
    center_offset_mm: float = _key(optional=True, default=0.0)


@dataclass(frozen=True)
class CollectionSection:
    eta_col: float = _key(lo=0, hi=1)
    eta_det: float = _key(lo=0, hi=1)
    eta_col_err: float = _key(lo=0, optional=True, default=0.0)
    # eta_col was fitted with this file's cross section, so the two are correlated
    eta_col_calibrated: bool = _key(optional=True, default=True, kind=bool)


@dataclass(frozen=True)
class DetectorSection:
    efficiency: float = _key(lo=0, hi=1)
    dead_time_ns: float = _key(lo=0, optional=True, default=0.0)
    dark_rate_per_s: float = _key(lo=0, optional=True, default=0.0)


@dataclass(frozen=True)
class CountingSection:
    coincidence_window_ns: float = _key(lo=0, lo_open=True)
    pre_split_transmission: float = _key(lo=0, hi=1, optional=True, default=1.0)
    splitter_ratio: float = _key(lo=0, hi=1, optional=True, default=0.5)
    duration_s: float = _key(lo=0, lo_open=True, optional=True, default=1.0)


@dataclass(frozen=True)
class ThresholdSection:
    dark_rate_per_s: float = _key(lo=0)
    duration_s: float = _key(lo=0, lo_open=True)
    measured_per_s: float | None = _key(lo=0, optional=True)
    measured_err_per_s: float = _key(lo=0, optional=True, default=0.0)


@dataclass(frozen=True)
class PredictionSection:
    qef_flux: str = _key(optional=True, default="pair", kind=str, choices=("pair", "photon"))
    tpa_flux: str = _key(optional=True, default="photon", kind=str, choices=("pair", "photon"))


SECTIONS = {
    "source": SourceSection,
    "beam": BeamSection,
    "cell": CellSection,
    "collection": CollectionSection,
    "detector_a": DetectorSection,
    "detector_b": DetectorSection,
    "counting": CountingSection,
    "threshold": ThresholdSection,
    "prediction": PredictionSection,
}
OPTIONAL_SECTIONS = {"prediction"}


@dataclass(frozen=True)
class ExperimentConfig:
    source: SourceSection
    beam: BeamSection
    cell: CellSection
    collection: CollectionSection
    detector_a: DetectorSection
    detector_b: DetectorSection
    counting: CountingSection
    threshold: ThresholdSection
    prediction: PredictionSection = PredictionSection()

    def spdc_source(self):
        s = self.source
        return SpdcSource(s.pair_rate_per_watt,
                          SpectralWidth.from_fwhm_nm(s.bandwidth_fwhm_nm, s.center_wavelength_nm),
                          s.pump_linewidth_fwhm_hz, s.saturation_power_w,
                          s.center_wavelength_nm * 1e-9)

    def gaussian_beam(self):
        b = self.beam
        return GaussianBeam(b.waist_um * 1e-6, b.wavelength_nm * 1e-9, b.waist_position_mm * 1e-3)

    def sample_cell(self):
        c = self.cell
        return SampleCell.from_lab_units(c.length_mm, c.concentration_mmol_per_l, c.sigma2_gm,
                                         c.fluorescence_yield)

    def collection_setup(self):
        return CollectionSetup(self.collection.eta_col, self.collection.eta_det)

    def detector(self, arm):
        d = self.detector_a if arm == "a" else self.detector_b
        return DetectorModel(d.efficiency, d.dead_time_ns * 1e-9, d.dark_rate_per_s)


def _line_of(text, section, key=None):
    current = None
    for n, line in enumerate(text.splitlines(), 1):
        s = line.strip()
        if s.startswith("[") and s.endswith("]"):
            current = s[1:-1].strip()
            if key is None and current == section:
                return n
        elif current == section and key is not None and "=" in s:
            if s.split("=", 1)[0].strip().lower() == key:
                return n
    return None


def _where(text, section, key=None):
    n = _line_of(text, section, key)
    name = f"{section}.{key}" if key else f"[{section}]"
    return f"line {n}: {name}" if n else name


def _parse_value(raw, meta):
    kind = meta["kind"]
    if kind is bool:
        v = raw.strip().lower()
        if v in ("true", "yes", "1", "on"):
            return True
        if v in ("false", "no", "0", "off"):
            return False
        raise ValueError(f"expected a boolean, got {raw!r}")
    if kind is str:
        v = raw.strip()
        if meta["choices"] and v not in meta["choices"]:
            raise ValueError(f"must be one of {', '.join(meta['choices'])}, got {v!r}")
        return v
    v = float(raw)
    if not math.isfinite(v):
        raise ValueError(f"must be finite, got {raw!r}")
    lo, hi = meta["lo"], meta["hi"]
    if lo is not None and (v <= lo if meta["lo_open"] else v < lo):
        raise ValueError(f"must be {'>' if meta['lo_open'] else '>='} {lo}, got {v:g}")
    if hi is not None and v > hi:
        raise ValueError(f"must be <= {hi}, got {v:g}")
    return v


def parse_config(text, source="<config>"):
    parser = configparser.ConfigParser(interpolation=None, inline_comment_prefixes=("#", ";"))
    try:
        parser.read_string(text, source=source)
    except configparser.Error as exc:
        raise ValidationError([f"{source}: parse error: {exc}"]) from None

    errors = []
    for sec in parser.sections():
        if sec not in SECTIONS:
            errors.append(f"{source}: {_where(text, sec)}: unknown section")

    built = {}
    for sec, cls in SECTIONS.items():
        if not parser.has_section(sec):
            if sec in OPTIONAL_SECTIONS:
                built[sec] = cls()
                continue
            required = [f.name for f in fields(cls) if not f.metadata["optional"]]
            errors.append(f"{source}: missing section [{sec}] (required keys: {', '.join(required)})")
            continue
        known = {f.name: f for f in fields(cls)}
        for key in parser[sec]:
            if key not in known:
                errors.append(f"{source}: {_where(text, sec, key)}: unknown key")
        values = {}
        for name, f in known.items():
            if name not in parser[sec] or parser[sec][name].strip() == "":
                if not f.metadata["optional"]:
                    errors.append(f"{source}: {_where(text, sec)}: missing required key {sec}.{name}")
                continue
            try:
                values[name] = _parse_value(parser[sec][name], f.metadata)
            except ValueError as exc:
                msg = str(exc)
                if msg.startswith("could not convert"):
                    msg = f"not a number: {parser[sec][name]!r}"
                errors.append(f"{source}: {_where(text, sec, name)}: {msg}")
        built[sec] = cls(**values)

    if errors:
        raise ValidationError(errors)
    return ExperimentConfig(**built)


def load_config(path=None):
    """Load and validate a config file; ``None`` loads the bundled reference config."""
    if path is None or str(path) == "paper":
        text = resources.files("etpa.data").joinpath(BUNDLED_CONFIG).read_text(encoding="utf-8")
        return parse_config(text, BUNDLED_CONFIG)
    with open(path, encoding="utf-8") as fh:
        text = fh.read()
    return parse_config(text, str(path))


def _fmt(v):
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float):
        return repr(v)
    return str(v)


def dump_config(cfg):
    """Resolved config as text; optional keys left unset are omitted."""
    out = io.StringIO()
    for sec in SECTIONS:
        section = getattr(cfg, sec)
        out.write(f"[{sec}]\n")
        for f in fields(section):
            v = getattr(section, f.name)
            if v is not None:
                out.write(f"{f.name} = {_fmt(v)}\n")
        out.write("\n")
    return out.getvalue()


def with_overrides(cfg, section, **values):
    return replace(cfg, **{section: replace(getattr(cfg, section), **values)})
