"""
Scenario files: INI sections of `key = value` lines. Frequencies carry a unit
suffix (`g_MHz = 20`) and are converted to rad/s; decoherence rates take the
same suffixes but stay plain rates (1/s). Files with `units = rad_s` (the
manifests written after every run) take bare SI keys instead.
"""
import configparser
import logging
import re
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from backend import models
from backend.errors import CatSimError, ConfigError

logger = logging.getLogger(__name__)

FREQ_UNITS = {'GHz': 1e9, 'MHz': 1e6, 'kHz': 1e3, 'Hz': 1.0}
TIME_UNITS = {'ps': 1e-12, 'ns': 1e-9, 'us': 1e-6, 's': 1.0}
GT_SUFFIX = 'gt_over_2pi'

# variant -> (atom levels, simulation frame)
VARIANTS = {
    'qrm_lab': (2, 'lab'),
    'spurious': (2, 'lab'),
    'rwa': (2, 'drive-rotating'),
    'interaction_full': (2, 'interaction'),
    'effective': (2, 'interaction'),
    'effective_detuned': (2, 'interaction'),
    'deformation': (2, 'interaction'),
    'qutrit_lab': (3, 'lab'),
    'qutrit_rwa': (3, 'drive-rotating'),
    'arbitrary_anharmonic': (3, 'drive-rotating'),
}

QUBIT_KEYS = ('omega_q', 'omega_r', 'omega_d', 'g', 'Omega')
QUTRIT_KEYS = ('omega_eg', 'omega_fe', 'xi', 'omega_r', 'omega_d', 'g1', 'g2', 'Omega1', 'Omega2')
RATE_KEYS = ('gamma1', 'gamma2', 'gamma_phi', 'kappa')
SPURIOUS_FREQ_KEYS = ('omega_prime', 'omega_c')

QUBIT_INITIAL = ('g0', 'e0', 'plus0', 'minus0')
QUTRIT_INITIAL = ('g0', 'e0', 'f0', 'v0', 'vplus', 'vminus', 'v1', 'v2', 'v3')
ENCODE_PATTERN = re.compile(r'^encode\(\s*([^,()]+)\s*,\s*([^,()]+)\s*\)$')

SCHEMA = """\
[scenario]     name, variant, frame, units (cyclic | rad_s), fock_cutoff, t_end_<ns|us|s|gt_over_2pi>
[parameters]   qubit: omega_q, omega_r, omega_d, g, Omega (suffix _GHz/_MHz/_kHz/_Hz)
               qutrit: omega_eg, omega_fe or xi, omega_r, omega_d, g1, g2, Omega1, Omega2, selection, mode
[decoherence]  enabled, gamma1, gamma2, gamma_phi, kappa (suffix _MHz/_kHz/_Hz, plain rates)
[spurious]     omega_prime, phi_prime, omega_c, phi_c
[integrator]   dt_<ps|ns|s>, sample_stride, store_states, allow_coarse_dt, renormalize, max_norm_drift
[initial]      state (g0 | e0 | f0 | plus0 | minus0 | encode(c_g, c_e) | v0 | vplus | vminus | v1 | v2 | v3)
[measurement]  basis (comma list of g, e, f, +, -), time_<unit>, frame (native | interaction)
[wigner]       enabled, points, extent
[sweep]        axis1, axis1_range_<unit> = start, stop, count (or axis1_values_<unit> = v1, v2, ...), axis2, axis2_range_<unit>, time_<unit>, jobs"""

SECTIONS = ('scenario', 'parameters', 'decoherence', 'spurious', 'integrator',
            'initial', 'measurement', 'wigner', 'sweep', 'run')


@dataclass(frozen=True)
class MeasurementPlan:
    bases: tuple = ()
    time: float = None
    frame: str = 'native'


@dataclass(frozen=True)
class WignerRequest:
    enabled: bool = False
    points: int = 161
    extent: float = None


@dataclass(frozen=True)
class SweepSpec:
    axes: tuple  # ((rate name, values), (rate name, values))
    time: float
    jobs: int = 1


@dataclass
class ScenarioConfig:
    name: str
    variant: str
    frame: str
    fock_cutoff: int
    params: object
    t_end: float
    initial: str = 'g0'
    decoherence: models.DecoherenceParams = field(default_factory=models.DecoherenceParams)
    decoherence_enabled: bool = False
    spurious: models.SpuriousDriveParams = None
    integrator: dict = field(default_factory=dict)
    measurement: MeasurementPlan = field(default_factory=MeasurementPlan)
    wigner: WignerRequest = field(default_factory=WignerRequest)
    sweep: SweepSpec = None
    path: str = None

    @property
    def atom_levels(self) -> int:
        return VARIANTS[self.variant][0]

    @property
    def coupling(self) -> float:
        """The coupling that sets the natural time unit (g, or g1 for a qutrit)."""
        return self.params.g if isinstance(self.params, models.QubitParams) else self.params.g1


# --- Reading ---

def _line_map(text: str) -> dict:
    """(section, key) -> 1-based line number."""
    lines, section = {}, None
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line[0] in '#;':
            continue
        header = re.match(r'^\[([^\]]+)\]$', line)
        if header:
            section = header.group(1).strip()
            lines[(section, None)] = lineno
            continue
        key = re.match(r'^([^=:]+?)\s*[=:]', line)
        if key and section is not None:
            lines[(section, key.group(1).strip())] = lineno
    return lines


class _Reader:
    """Typed access to a parsed scenario with line-precise errors."""

    def __init__(self, parser: configparser.ConfigParser, lines: dict, path: str, rad_s: bool):
        self.parser = parser
        self.lines = lines
        self.path = path
        self.rad_s = rad_s
        self.used = set()

    def fail(self, message: str, section: str = None, key: str = None):
        lineno = self.lines.get((section, key)) if section else None
        raise ConfigError(message, lineno=lineno, path=self.path)

    def has(self, section: str) -> bool:
        return self.parser.has_section(section)

    def raw(self, section: str, key: str, default=None):
        if not self.parser.has_option(section, key):
            return default
        self.used.add((section, key))
        return self.parser.get(section, key).strip()

    def boolean(self, section: str, key: str, default: bool) -> bool:
        value = self.raw(section, key)
        if value is None:
            return default
        if value.lower() not in configparser.ConfigParser.BOOLEAN_STATES:
            self.fail(f"'{key}' must be a boolean, got '{value}'", section, key)
        return configparser.ConfigParser.BOOLEAN_STATES[value.lower()]

    def integer(self, section: str, key: str, default: int) -> int:
        value = self.raw(section, key)
        if value is None:
            return default
        try:
            return int(value)
        except ValueError:
            self.fail(f"'{key}' must be an integer, got '{value}'", section, key)

    def number(self, section: str, key: str, value: str) -> float:
        try:
            return float(value)
        except ValueError:
            self.fail(f"'{key}' must be a number, got '{value}'", section, key)

    def _matches(self, section: str, base: str, units: dict) -> list:
        if not self.has(section):
            return []
        found = []
        for key in self.parser.options(section):
            if key == base and self.rad_s:
                found.append((key, 1.0))
            elif key.startswith(base + '_') and key[len(base) + 1:] in units:
                found.append((key, units[key[len(base) + 1:]]))
        if len(found) > 1:
            self.fail(f"'{base}' is given more than once ({', '.join(k for k, _ in found)})",
                      section, found[1][0])
        return found

    def frequency(self, section: str, base: str, default=None):
        """Angular frequency in rad/s."""
        found = self._matches(section, base, FREQ_UNITS)
        if not found:
            self._reject_bare(section, base)
            return default
        key, scale = found[0]
        value = self.number(section, key, self.raw(section, key))
        return value if self.rad_s and key == base else 2 * np.pi * scale * value

    def rate(self, section: str, base: str, default=None):
        """Plain rate in 1/s."""
        found = self._matches(section, base, FREQ_UNITS)
        if not found:
            self._reject_bare(section, base)
            return default
        key, scale = found[0]
        return scale * self.number(section, key, self.raw(section, key))

    def time(self, section: str, base: str, coupling: float, default=None):
        units = dict(TIME_UNITS, **{GT_SUFFIX: None})
        found = self._matches(section, base, units)
        if not found:
            self._reject_bare(section, base)
            return default
        key, scale = found[0]
        value = self.number(section, key, self.raw(section, key))
        if key.endswith(GT_SUFFIX):
            if not coupling > 0:
                self.fail(f"'{key}' needs a positive coupling", section, key)
            return value * 2 * np.pi / coupling
        return value * scale

    def _reject_bare(self, section: str, base: str):
        if self.has(section) and self.parser.has_option(section, base) and not self.rad_s:
            self.fail(f"'{base}' needs a unit suffix (e.g. {base}_MHz) unless units = rad_s", section, base)

    def unknown_keys(self):
        for section in self.parser.sections():
            if section == 'run':
                continue
            for key in self.parser.options(section):
                if (section, key) not in self.used:
                    self.fail(f"unknown key '{key}' in [{section}]", section, key)


def _read_parser(path: Path):
    try:
        text = path.read_text()
    except OSError as e:
        raise ConfigError(f"cannot read scenario: {e}", path=str(path)) from e
    if not text.strip():
        raise ConfigError(f"scenario file is empty; expected sections:\n{SCHEMA}", path=str(path))
    parser = configparser.ConfigParser(interpolation=None, inline_comment_prefixes=('#', ';'))
    parser.optionxform = str
    try:
        parser.read_string(text, source=str(path))
    except configparser.MissingSectionHeaderError as e:
        raise ConfigError("key outside any [section]", lineno=e.lineno, path=str(path)) from e
    except (configparser.DuplicateOptionError, configparser.DuplicateSectionError) as e:
        raise ConfigError(e.message.split(': ', 1)[-1], lineno=e.lineno, path=str(path)) from e
    except configparser.ParsingError as e:
        lineno, line = e.errors[0]
        raise ConfigError(f"cannot parse line {line!r}", lineno=lineno, path=str(path)) from e
    return parser, _line_map(text)


def _parse_params(r: _Reader, levels: int, variant: str):
    s = 'parameters'
    if not r.has(s):
        r.fail(f"missing [parameters] section; expected:\n{SCHEMA}")
    try:
        if levels == 2:
            values = {k: r.frequency(s, k) for k in QUBIT_KEYS}
            missing = [k for k, v in values.items() if v is None]
            if missing:
                r.fail(f"[parameters] is missing {', '.join(missing)}", s)
            return models.QubitParams(**values)

        omega_eg = r.frequency(s, 'omega_eg')
        omega_fe = r.frequency(s, 'omega_fe')
        xi = r.frequency(s, 'xi')
        if omega_fe is None and xi is not None and omega_eg is not None:
            omega_fe = omega_eg + xi
        g1, omega1 = r.frequency(s, 'g1'), r.frequency(s, 'Omega1')
        values = {
            'omega_eg': omega_eg, 'omega_fe': omega_fe,
            'omega_r': r.frequency(s, 'omega_r'), 'omega_d': r.frequency(s, 'omega_d'),
            'g1': g1, 'Omega1': omega1,
            # the harmonic sqrt(2) ratios are exact when left out
            'g2': r.frequency(s, 'g2', None if g1 is None else np.sqrt(2.0) * g1),
            'Omega2': r.frequency(s, 'Omega2', None if omega1 is None else np.sqrt(2.0) * omega1),
        }
        missing = [k for k, v in values.items() if v is None]
        if missing:
            r.fail(f"[parameters] is missing {', '.join(missing)}", s)
        default_mode = {'qutrit_rwa': 'harmonic', 'arbitrary_anharmonic': 'general'}.get(variant, 'free')
        return models.QutritParams(**values, selection=r.raw(s, 'selection', 'cascade'),
                                   mode=r.raw(s, 'mode', default_mode))
    except CatSimError as e:
        if isinstance(e, ConfigError):
            raise
        r.fail(str(e), s)


def _parse_decoherence(r: _Reader):
    s = 'decoherence'
    if not r.has(s):
        return models.DecoherenceParams(), False
    rates = {k: r.rate(s, k) for k in RATE_KEYS}
    enabled = r.boolean(s, 'enabled', True)
    try:
        d = models.DecoherenceParams(gamma1=rates['gamma1'] or 0.0, gamma2=rates['gamma2'],
                                     gamma_phi=rates['gamma_phi'] or 0.0, kappa=rates['kappa'] or 0.0)
    except CatSimError as e:
        r.fail(str(e), s)
    return d, enabled


def _parse_spurious(r: _Reader):
    s = 'spurious'
    if not r.has(s):
        return None
    values = {k: r.frequency(s, k, 0.0) for k in SPURIOUS_FREQ_KEYS}
    phases = {}
    for key in ('phi_prime', 'phi_c'):
        raw = r.raw(s, key, '0')
        phases[key] = r.number(s, key, raw)
    try:
        return models.SpuriousDriveParams(omega_prime=values['omega_prime'], phi_prime=phases['phi_prime'],
                                          omega_c=values['omega_c'], phi_c=phases['phi_c'])
    except CatSimError as e:
        r.fail(str(e), s)


def _parse_initial(r: _Reader, levels: int) -> str:
    label = r.raw('initial', 'state', 'g0')
    allowed = QUBIT_INITIAL if levels == 2 else QUTRIT_INITIAL
    if label in allowed:
        return label
    match = ENCODE_PATTERN.match(label)
    if match:
        for part in match.groups():
            try:
                complex(part.replace(' ', ''))
            except ValueError:
                r.fail(f"encode coefficient '{part}' is not a number", 'initial', 'state')
        return label
    r.fail(f"initial state '{label}' is not valid for a {levels}-level atom; "
           f"choose one of {', '.join(allowed)} or encode(c_g, c_e)", 'initial', 'state')


def encode_coefficients(label: str) -> tuple:
    match = ENCODE_PATTERN.match(label)
    return tuple(complex(part.replace(' ', '')) for part in match.groups())


def _parse_range(r: _Reader, s: str, axis: str) -> np.ndarray:
    """`<axis>_range_<unit> = start, stop, count` or an explicit `<axis>_values_<unit>` list."""
    ranged = r._matches(s, f'{axis}_range', FREQ_UNITS)
    listed = r._matches(s, f'{axis}_values', FREQ_UNITS)
    if not ranged and not listed:
        r.fail(f"[sweep] needs '{axis}_range_<unit> = start, stop, count'", s)
    if ranged and listed:
        r.fail(f"give either {axis}_range or {axis}_values, not both", s, listed[0][0])
    key, scale = (ranged or listed)[0]
    parts = [p.strip() for p in r.raw(s, key).split(',')]
    if ranged:
        if len(parts) != 3:
            r.fail(f"'{key}' must read start, stop, count", s, key)
        start, stop = (r.number(s, key, p) * scale for p in parts[:2])
        try:
            count = int(parts[2])
        except ValueError:
            r.fail(f"'{key}' count must be an integer", s, key)
        if count < 1:
            r.fail(f"'{key}' count must be positive", s, key)
        values = np.linspace(start, stop, count)
    else:
        values = np.array([r.number(s, key, p) * scale for p in parts])
    if np.any(values < 0):
        r.fail(f"'{key}' includes negative rates", s, key)
    return values


def _parse_sweep(r: _Reader, coupling: float, t_end: float):
    s = 'sweep'
    if not r.has(s):
        return None
    axes = []
    for axis in ('axis1', 'axis2'):
        name = r.raw(s, axis)
        if name not in RATE_KEYS:
            r.fail(f"'{axis}' must name one of {', '.join(RATE_KEYS)}", s, axis)
        axes.append((name, _parse_range(r, s, axis)))
    if axes[0][0] == axes[1][0]:
        r.fail("sweep axes must be different rates", s, 'axis2')
    time = r.time(s, 'time', coupling, t_end)
    return SweepSpec(axes=tuple(axes), time=time, jobs=r.integer(s, 'jobs', 1))


def load_scenario(path) -> ScenarioConfig:
    """
    Parses and validates a scenario file.
    Args:
        path: Path to the .cfg (or a manifest.ini).
    Returns:
        ScenarioConfig with every quantity in rad/s, 1/s and s.
    """
    path = Path(path)
    parser, lines = _read_parser(path)
    for section in parser.sections():
        if section not in SECTIONS:
            raise ConfigError(f"unknown section [{section}]", lineno=lines.get((section, None)), path=str(path))
    if not parser.has_section('scenario'):
        raise ConfigError(f"missing [scenario] section; expected:\n{SCHEMA}", path=str(path))

    units = parser.get('scenario', 'units', fallback='cyclic').strip()
    if units not in ('cyclic', 'rad_s'):
        raise ConfigError(f"units must be 'cyclic' or 'rad_s', got '{units}'",
                          lineno=lines.get(('scenario', 'units')), path=str(path))
    r = _Reader(parser, lines, str(path), rad_s=(units == 'rad_s'))
    r.raw('scenario', 'units')

    variant = r.raw('scenario', 'variant')
    if variant not in VARIANTS:
        r.fail(f"variant must be one of {', '.join(VARIANTS)}, got '{variant}'", 'scenario', 'variant')
    levels, native_frame = VARIANTS[variant]
    frame = r.raw('scenario', 'frame', native_frame)
    if frame != native_frame:
        r.fail(f"variant '{variant}' runs in the '{native_frame}' frame, not '{frame}'", 'scenario', 'frame')
    r.boolean('scenario', 'deterministic', True)

    params = _parse_params(r, levels, variant)
    coupling = params.g if levels == 2 else params.g1
    t_end = r.time('scenario', 't_end', coupling)
    if t_end is None or not t_end > 0:
        r.fail("[scenario] needs a positive t_end_<ns|us|s|gt_over_2pi>", 'scenario')
    fock_cutoff = r.integer('scenario', 'fock_cutoff', 40)
    if fock_cutoff < 2:
        r.fail("fock_cutoff must be at least 2", 'scenario', 'fock_cutoff')

    decoherence, enabled = _parse_decoherence(r)
    spurious = _parse_spurious(r)
    if variant == 'spurious' and spurious is None:
        r.fail("variant 'spurious' needs a [spurious] section", 'scenario', 'variant')

    integrator = {}
    if r.has('integrator'):
        dt = r.time('integrator', 'dt', coupling)
        if dt is not None:
            integrator['dt'] = dt
        for key in ('store_states', 'allow_coarse_dt', 'renormalize'):
            if parser.has_option('integrator', key):
                integrator[key] = r.boolean('integrator', key, False)
        if parser.has_option('integrator', 'sample_stride'):
            integrator['sample_stride'] = r.integer('integrator', 'sample_stride', 1)
        if parser.has_option('integrator', 'max_norm_drift'):
            integrator['max_norm_drift'] = r.number('integrator', 'max_norm_drift',
                                                    r.raw('integrator', 'max_norm_drift'))

    bases = ()
    m_time, m_frame = None, 'native'
    if r.has('measurement'):
        bases = tuple(b.strip() for b in r.raw('measurement', 'basis', '').split(',') if b.strip())
        allowed = ('g', 'e', '+', '-') if levels == 2 else ('g', 'e', 'f', '+', '-')
        for b in bases:
            if b not in allowed:
                r.fail(f"measurement basis '{b}' is not one of {', '.join(allowed)}", 'measurement', 'basis')
        m_time = r.time('measurement', 'time', coupling)
        if m_time is not None and not 0 < m_time <= t_end * (1 + 1e-12):
            r.fail("measurement time must lie in (0, t_end]", 'measurement')
        m_frame = r.raw('measurement', 'frame', 'native')
        if m_frame not in ('native', 'interaction'):
            r.fail(f"measurement frame must be 'native' or 'interaction', got '{m_frame}'", 'measurement', 'frame')

    wigner = WignerRequest()
    if r.has('wigner'):
        extent = r.raw('wigner', 'extent')
        wigner = WignerRequest(
            enabled=r.boolean('wigner', 'enabled', True),
            points=r.integer('wigner', 'points', 161),
            extent=None if extent is None else r.number('wigner', 'extent', extent),
        )

    config = ScenarioConfig(
        name=r.raw('scenario', 'name', path.stem), variant=variant, frame=frame,
        fock_cutoff=fock_cutoff, params=params, t_end=t_end,
        initial=_parse_initial(r, levels), decoherence=decoherence, decoherence_enabled=enabled,
        spurious=spurious, integrator=integrator,
        measurement=MeasurementPlan(bases=bases, time=m_time, frame=m_frame),
        wigner=wigner, sweep=_parse_sweep(r, coupling, t_end), path=str(path),
    )
    r.unknown_keys()
    logger.info("Loaded scenario '%s' (%s, %s frame)", config.name, variant, frame)
    return config


# --- Manifests ---

def manifest_sections(config: ScenarioConfig, run_info: dict = None) -> dict:
    """
    Resolved scenario as INI sections in rad/s, 1/s and s. Loading the result
    with load_scenario gives back the same ScenarioConfig.
    """
    p = config.params
    if isinstance(p, models.QubitParams):
        parameters = {k: getattr(p, k) for k in QUBIT_KEYS}
    else:
        parameters = {k: getattr(p, k) for k in QUTRIT_KEYS if k != 'xi'}
        parameters.update(selection=p.selection, mode=p.mode)

    sections = {
        'scenario': {'name': config.name, 'variant': config.variant, 'frame': config.frame,
                     'units': 'rad_s', 'fock_cutoff': config.fock_cutoff, 't_end': config.t_end},
        'parameters': parameters,
    }
    d = config.decoherence
    sections['decoherence'] = {'enabled': config.decoherence_enabled, 'gamma1': d.gamma1,
                               'gamma2': d.resolved_gamma2, 'gamma_phi': d.gamma_phi, 'kappa': d.kappa}
    if config.spurious is not None:
        s = config.spurious
        sections['spurious'] = {'omega_prime': s.omega_prime, 'phi_prime': s.phi_prime,
                                'omega_c': s.omega_c, 'phi_c': s.phi_c}
    if config.integrator:
        sections['integrator'] = dict(config.integrator)
    sections['initial'] = {'state': config.initial}
    m = config.measurement
    if m.bases or m.time is not None:
        sections['measurement'] = {'basis': ', '.join(m.bases), 'frame': m.frame}
        if m.time is not None:
            sections['measurement']['time'] = m.time
    if config.wigner.enabled:
        sections['wigner'] = {'enabled': True, 'points': config.wigner.points}
        if config.wigner.extent is not None:
            sections['wigner']['extent'] = config.wigner.extent
    if config.sweep is not None:
        sw = config.sweep
        sections['sweep'] = {'time': sw.time, 'jobs': sw.jobs}
        for i, (name, values) in enumerate(sw.axes, start=1):
            sections['sweep'][f'axis{i}'] = name
            sections['sweep'][f'axis{i}_values_Hz'] = ', '.join(repr(float(v)) for v in values)
    if run_info:
        sections['run'] = dict(run_info)
    return sections
