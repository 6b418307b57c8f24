'''
Physical constants, unit conversions and the validated parameter set shared by every
solver and experiment. Energies are joules, powers watts, rates bits; dB/dBm only appear
at the configuration boundary.

Device indices are 0-based throughout the package: device 0 is D1, device 1 is D2.
'''
import math
import re
from dataclasses import dataclass, replace
from typing import Optional, Tuple

import numpy as np

from wpcn_mdp.utils import dbm_to_watts, db_to_linear, short_hash

# deterministic factor of the channel power gain, 1.25e-3 * d^-beta
PATHLOSS_CONSTANT = 1.25e-3


class ConfigurationError(ValueError):
    def __init__(self, violations):
        if isinstance(violations, str):
            violations = [violations]
        self.violations = list(violations)
        super().__init__("; ".join(self.violations))


class ContractViolation(ValueError):
    ''' an operation was called outside its precondition '''
    pass


def noise_power_watts(psd_dbm_per_hz, bandwidth_hz):
    '''
    Noise power sigma^2 in watts from a spectral density in dBm/Hz over a bandwidth in Hz.
    '''
    if not bandwidth_hz > 0:
        raise ConfigurationError(f"bandwidth_hz must be > 0, got {bandwidth_hz}")

    return 10.0 ** ((psd_dbm_per_hz + 10.0 * math.log10(bandwidth_hz) - 30.0) / 10.0)


def mean_channel_gain(d_m, beta):
    if not d_m > 0:
        raise ConfigurationError(f"distance must be > 0, got {d_m}")

    return PATHLOSS_CONSTANT * d_m ** (-beta)


def battery_capacity_joules(d_m, beta_ref, zeta_joules):
    '''
    Battery size E_max = 1.25e-3 * d^-beta_ref * zeta. beta_ref is kept separate from the
    propagation exponent so that a pathloss sweep does not resize the batteries.
    '''
    if not d_m > 0:
        raise ConfigurationError(f"distance must be > 0, got {d_m}")
    if not zeta_joules > 0:
        raise ConfigurationError(f"zeta must be > 0, got {zeta_joules}")

    return PATHLOSS_CONSTANT * d_m ** (-beta_ref) * zeta_joules


def parse_gamma_db(text):
    '''
    "perfect" -> 0.0, "-70 dB" / "−70" / -70 -> 1e-7 (linear leakage factor)
    '''
    if isinstance(text, (int, float)):
        return db_to_linear(float(text))

    cleaned = str(text).strip().replace("−", "-").lower()
    if cleaned in ("perfect", "inf", "-inf"):
        return 0.0

    cleaned = re.sub(r"\s*db$", "", cleaned)
    try:
        return db_to_linear(float(cleaned))
    except ValueError:
        raise ConfigurationError(f"gamma_db: cannot parse {text!r} (number in dB or 'perfect')")


@dataclass(frozen=True)
class DeviceParams:
    distance_m: float
    harvest_efficiency: float
    battery_scale_zeta_joules: float
    b_max: int = 10
    # None -> E_max / T
    rho_max_w: Optional[float] = None
    # None -> distance_m
    battery_ref_distance_m: Optional[float] = None


DEFAULT_DEVICES = (DeviceParams(distance_m=5.0, harvest_efficiency=0.8, battery_scale_zeta_joules=0.1),
                   DeviceParams(distance_m=10.0, harvest_efficiency=0.8, battery_scale_zeta_joules=1.0))


@dataclass(frozen=True)
class SystemParams:
    '''
    Immutable parameter set. Construct through `validate` (or `load_params`) so that every
    invariant is checked; the constructor itself does not validate, which lets tests build
    degenerate instances such as zero-quanta batteries.
    '''

    slot_length_T: float = 1.0
    p_max: float = 2.0
    gamma_si: float = 0.0
    noise_psd_dbm_per_hz: float = -125.0
    bandwidth_hz: float = 1e6
    alpha: float = 0.5
    devices: Tuple[DeviceParams, DeviceParams] = DEFAULT_DEVICES
    pathloss_beta: float = 2.0
    pathloss_beta_ref_battery: float = 2.0

    # discretization
    channel_bins: int = 2
    tau_grid_steps: int = 10
    p_grid_levels: int = 2

    # relative value iteration
    rvi_tolerance: float = 1e-6
    rvi_max_iterations: int = 100_000
    rvi_damping: float = 0.5
    max_states: int = 2_000_000

    ##########
    # Derived quantities
    ##########

    @property
    def noise_power(self):
        return noise_power_watts(self.noise_psd_dbm_per_hz, self.bandwidth_hz)

    def mean_gain(self, device):
        return mean_channel_gain(self.devices[device].distance_m, self.pathloss_beta)

    def battery_capacity(self, device):
        dev = self.devices[device]
        ref = dev.battery_ref_distance_m if dev.battery_ref_distance_m is not None else dev.distance_m
        return battery_capacity_joules(ref, self.pathloss_beta_ref_battery, dev.battery_scale_zeta_joules)

    def b_max(self, device):
        return self.devices[device].b_max

    def quantum(self, device):
        # a zero-quanta battery never stores anything; any positive quantum keeps the floor at 0
        return self.battery_capacity(device) / max(self.devices[device].b_max, 1)

    def rho_max(self, device):
        dev = self.devices[device]
        if dev.rho_max_w is not None:
            return dev.rho_max_w
        return self.battery_capacity(device) / self.slot_length_T

    def tau_values(self):
        return self.slot_length_T * np.arange(self.tau_grid_steps + 1) / self.tau_grid_steps

    def p_values(self):
        return np.linspace(0.0, self.p_max, self.p_grid_levels)

    ##########
    # Validation and serialization
    ##########

    def check(self):
        '''
        :return: list of violated invariants, empty when the parameters are valid
        '''
        violations = []

        def require(ok, message):
            if not ok:
                violations.append(message)

        require(self.slot_length_T > 0, f"slot_length_s must be > 0, got {self.slot_length_T}")
        require(self.p_max > 0, f"p_max_w must be > 0, got {self.p_max}")
        require(0.0 <= self.gamma_si <= 1.0, f"gamma_si must be in [0, 1], got {self.gamma_si}")
        require(self.bandwidth_hz > 0, f"bandwidth_hz must be > 0, got {self.bandwidth_hz}")
        require(math.isfinite(self.noise_psd_dbm_per_hz),
                f"noise_psd_dbm_per_hz must be finite, got {self.noise_psd_dbm_per_hz}")
        require(0.0 <= self.alpha <= 1.0, f"alpha must be in [0, 1], got {self.alpha}")
        require(self.pathloss_beta >= 0, f"beta must be >= 0, got {self.pathloss_beta}")
        require(self.pathloss_beta_ref_battery >= 0,
                f"beta_ref_battery must be >= 0, got {self.pathloss_beta_ref_battery}")

        require(len(self.devices) == 2, f"exactly two devices are supported, got {len(self.devices)}")
        for i, dev in enumerate(self.devices, start=1):
            require(dev.distance_m > 0, f"d{i}_m must be > 0, got {dev.distance_m}")
            require(0.0 < dev.harvest_efficiency <= 1.0, f"eta{i} must be in (0, 1], got {dev.harvest_efficiency}")
            require(dev.battery_scale_zeta_joules > 0, f"zeta{i}_j must be > 0, got {dev.battery_scale_zeta_joules}")
            require(dev.b_max >= 1, f"b{i}_max must be >= 1 (at least 2 battery levels), got {dev.b_max}")
            require(dev.rho_max_w is None or dev.rho_max_w > 0, f"rho{i}_max_w must be > 0, got {dev.rho_max_w}")
            require(dev.battery_ref_distance_m is None or dev.battery_ref_distance_m > 0,
                    f"battery_ref_d{i}_m must be > 0, got {dev.battery_ref_distance_m}")

        require(self.channel_bins >= 1, f"channel_bins must be >= 1, got {self.channel_bins}")
        require(self.tau_grid_steps >= 2, f"tau_grid_steps must be >= 2, got {self.tau_grid_steps}")
        require(self.p_grid_levels >= 2, f"p_grid_levels must be >= 2 (0 and p_max), got {self.p_grid_levels}")
        require(self.rvi_tolerance > 0, f"rvi_tolerance must be > 0, got {self.rvi_tolerance}")
        require(self.rvi_max_iterations >= 1, f"rvi_max_iterations must be >= 1, got {self.rvi_max_iterations}")
        require(0.0 < self.rvi_damping <= 1.0, f"rvi_damping must be in (0, 1], got {self.rvi_damping}")
        require(self.max_states >= 1, f"max_states must be >= 1, got {self.max_states}")

        return violations

    def to_raw(self):
        '''
        Canonical key/value rendering; `validate(params.to_raw()) == params`.
        '''
        raw = {
            "slot_length_s": self.slot_length_T,
            "p_max_w": self.p_max,
            "gamma_si": self.gamma_si,
            "noise_psd_dbm_per_hz": self.noise_psd_dbm_per_hz,
            "bandwidth_hz": self.bandwidth_hz,
            "alpha": self.alpha,
            "beta": self.pathloss_beta,
            "beta_ref_battery": self.pathloss_beta_ref_battery,
            "channel_bins": self.channel_bins,
            "tau_grid_steps": self.tau_grid_steps,
            "p_grid_levels": self.p_grid_levels,
            "rvi_tolerance": self.rvi_tolerance,
            "rvi_max_iterations": self.rvi_max_iterations,
            "rvi_damping": self.rvi_damping,
            "max_states": self.max_states,
        }
        for i, dev in enumerate(self.devices, start=1):
            raw[f"d{i}_m"] = dev.distance_m
            raw[f"eta{i}"] = dev.harvest_efficiency
            raw[f"zeta{i}_j"] = dev.battery_scale_zeta_joules
            raw[f"b{i}_max"] = dev.b_max
            if dev.rho_max_w is not None:
                raw[f"rho{i}_max_w"] = dev.rho_max_w
            if dev.battery_ref_distance_m is not None:
                raw[f"battery_ref_d{i}_m"] = dev.battery_ref_distance_m

        return {k: repr(v) for k, v in raw.items()}

    def params_hash(self):
        canonical = "\n".join(f"{k}={v}" for k, v in sorted(self.to_raw().items()))
        return short_hash(canonical)

    def with_overrides(self, **overrides):
        '''
        Returns a re-validated copy with config keys replaced, e.g. with_overrides(beta=3.0).
        '''
        raw = self.to_raw()
        if "gamma_db" in overrides:
            raw.pop("gamma_si", None)
        if "p_max_dbm" in overrides:
            raw.pop("p_max_w", None)
        raw.update(overrides)
        return validate(raw)


##########
# Raw configuration handling
##########

_FLOAT_KEYS = {
    "slot_length_s": "slot_length_T",
    "p_max_w": "p_max",
    "noise_psd_dbm_per_hz": "noise_psd_dbm_per_hz",
    "bandwidth_hz": "bandwidth_hz",
    "alpha": "alpha",
    "beta": "pathloss_beta",
    "beta_ref_battery": "pathloss_beta_ref_battery",
    "rvi_tolerance": "rvi_tolerance",
    "rvi_damping": "rvi_damping",
}

_INT_KEYS = {
    "channel_bins": "channel_bins",
    "tau_grid_steps": "tau_grid_steps",
    "p_grid_levels": "p_grid_levels",
    "rvi_max_iterations": "rvi_max_iterations",
    "max_states": "max_states",
}

_DEVICE_FLOAT_KEYS = {
    "d{}_m": "distance_m",
    "eta{}": "harvest_efficiency",
    "zeta{}_j": "battery_scale_zeta_joules",
    "rho{}_max_w": "rho_max_w",
    "battery_ref_d{}_m": "battery_ref_distance_m",
}

_DEVICE_INT_KEYS = {
    "b{}_max": "b_max",
}

_SPECIAL_KEYS = {"gamma_db", "gamma_si", "p_max_dbm"}


def known_keys():
    keys = set(_FLOAT_KEYS) | set(_INT_KEYS) | _SPECIAL_KEYS
    for i in (1, 2):
        keys |= {k.format(i) for k in _DEVICE_FLOAT_KEYS}
        keys |= {k.format(i) for k in _DEVICE_INT_KEYS}
    return keys


def _to_float(key, value, violations):
    try:
        return float(str(value).replace("−", "-"))
    except ValueError:
        violations.append(f"{key}: expected a number, got {value!r}")


def _to_int(key, value, violations):
    try:
        as_float = float(value)
    except ValueError:
        violations.append(f"{key}: expected an integer, got {value!r}")
        return None
    if not as_float.is_integer():
        violations.append(f"{key}: expected an integer, got {value!r}")
        return None
    return int(as_float)


def validate(raw_config):
    '''
    Turns a raw configuration (mapping of config keys to strings or numbers) into a
    SystemParams, raising ConfigurationError with every violation found. Unspecified keys
    take the default operating point. A SystemParams is checked and returned unchanged.

    :param raw_config: mapping, or an existing SystemParams
    :return: SystemParams
    '''
    if isinstance(raw_config, SystemParams):
        violations = raw_config.check()
        if violations:
            raise ConfigurationError(violations)
        return raw_config

    raw = dict(raw_config or {})
    violations = []

    unknown = sorted(set(raw) - known_keys())
    for key in unknown:
        violations.append(f"{key}: unknown configuration key")

    fields = {}
    for key, name in _FLOAT_KEYS.items():
        if key in raw:
            fields[name] = _to_float(key, raw[key], violations)
    for key, name in _INT_KEYS.items():
        if key in raw:
            fields[name] = _to_int(key, raw[key], violations)

    if "gamma_db" in raw and "gamma_si" in raw:
        violations.append("gamma_db and gamma_si are mutually exclusive")
    elif "gamma_db" in raw:
        try:
            fields["gamma_si"] = parse_gamma_db(raw["gamma_db"])
        except ConfigurationError as e:
            violations.extend(e.violations)
    elif "gamma_si" in raw:
        fields["gamma_si"] = _to_float("gamma_si", raw["gamma_si"], violations)

    if "p_max_dbm" in raw and "p_max_w" in raw:
        violations.append("p_max_dbm and p_max_w are mutually exclusive")
    elif "p_max_dbm" in raw:
        dbm = _to_float("p_max_dbm", raw["p_max_dbm"], violations)
        if dbm is not None:
            fields["p_max"] = dbm_to_watts(dbm)

    devices = []
    for i, default in enumerate(DEFAULT_DEVICES, start=1):
        dev_fields = {}
        for key, name in _DEVICE_FLOAT_KEYS.items():
            if key.format(i) in raw:
                dev_fields[name] = _to_float(key.format(i), raw[key.format(i)], violations)
        for key, name in _DEVICE_INT_KEYS.items():
            if key.format(i) in raw:
                dev_fields[name] = _to_int(key.format(i), raw[key.format(i)], violations)
        devices.append(replace(default, **dev_fields))
    fields["devices"] = tuple(devices)

    # parse errors leave None behind; report them before checking bounds
    if violations:
        raise ConfigurationError(violations)

    params = SystemParams(**fields)
    violations = params.check()
    if violations:
        raise ConfigurationError(violations)

    return params


def read_config(path):
    '''
    Reads a `key = value` file; '#' starts a comment, blank lines are ignored.
    '''
    raw = {}
    with open(path, "r") as f:
        for lineno, line in enumerate(f, start=1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue

            if "=" not in line:
                raise ConfigurationError(f"{path}:{lineno}: expected 'key = value', got {line!r}")

            key, value = (s.strip() for s in line.split("=", 1))
            raw[key] = value

    return raw


def load_params(path=None, **overrides):
    raw = read_config(path) if path else {}
    if "gamma_db" in overrides:
        raw.pop("gamma_si", None)
    if "gamma_si" in overrides:
        raw.pop("gamma_db", None)
    if "p_max_dbm" in overrides:
        raw.pop("p_max_w", None)
    if "p_max_w" in overrides:
        raw.pop("p_max_dbm", None)
    raw.update({k: v for k, v in overrides.items() if v is not None})
    return validate(raw)
