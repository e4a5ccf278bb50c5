"""Directional mmWave link budget.

Received power, interference, SINR and Shannon rate for directional links
between nodes on a plane.  Every transmitter and receiver of a scheduled link
points its boresight at its link partner; gains toward third parties are
taken at the angular offset from that boresight.

Units: mW, Hz, metres, seconds, bit/s.  dB appears only inside
:class:`AntennaModel`.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field
from typing import Iterable, Mapping, NamedTuple, Sequence

SPEED_OF_LIGHT = 299_792_458.0


class Link(NamedTuple):
    """Directed link ``tx -> rx`` between two node ids."""

    tx: int
    rx: int


def db_to_linear(db: float) -> float:
    return 10.0 ** (db / 10.0)


def dbm_to_mw(dbm: float) -> float:
    return 10.0 ** (dbm / 10.0)


@dataclass(frozen=True)
class RadioParams:
    """Physical-layer constants of the caching network.

    Defaults follow the 60 GHz system used throughout: 2160 MHz of
    bandwidth, -134 dBm/MHz noise, free-space exponent, 30 dBm transmit power.
    """

    bandwidth: float = 2160e6  # Hz
    noise_density: float = dbm_to_mw(-134.0) / 1e6  # mW/Hz
    pathloss_exp: float = 2.0
    tx_power: float = dbm_to_mw(30.0)  # mW
    rho: float = 1.0
    carrier_frequency: float = 60e9  # Hz
    eta: float = 0.5
    slot_duration: float = 1.0  # s
    k0: float = field(init=False)

    def __post_init__(self):
        for name in ("bandwidth", "noise_density", "pathloss_exp", "tx_power",
                     "carrier_frequency", "slot_duration"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be strictly positive")
        if not 0.0 < self.eta < 1.0:
            raise ValueError("eta must lie in (0, 1)")
        if not 0.0 < self.rho <= 1.0:
            raise ValueError("rho must lie in (0, 1]")
        wavelength = SPEED_OF_LIGHT / self.carrier_frequency
        object.__setattr__(self, "k0", (wavelength / (4.0 * math.pi)) ** 2)

    @property
    def noise_power(self) -> float:
        """N0 * W in mW."""
        return self.noise_density * self.bandwidth

    def replace(self, **changes) -> "RadioParams":
        values = self.to_dict()
        values.update(changes)
        return RadioParams(**values)

    def to_dict(self) -> dict:
        d = asdict(self)
        d.pop("k0")
        return d

    @classmethod
    def from_dict(cls, d: Mapping) -> "RadioParams":
        """Build from a config section.

        Accepts either linear fields (``tx_power`` in mW, ``noise_density`` in
        mW/Hz) or their log forms ``tx_power_dbm`` / ``noise_dbm_per_mhz``.
        """
        d = dict(d)
        if "tx_power_dbm" in d:
            d["tx_power"] = dbm_to_mw(d.pop("tx_power_dbm"))
        if "noise_dbm_per_mhz" in d:
            d["noise_density"] = dbm_to_mw(d.pop("noise_dbm_per_mhz")) / 1e6
        unknown = set(d) - {f for f in cls.__dataclass_fields__ if f != "k0"}
        if unknown:
            raise ValueError(f"unknown radio fields: {sorted(unknown)}")
        return cls(**d)


@dataclass(frozen=True)
class AntennaModel:
    """Gaussian main lobe (linear scale) with a flat side lobe."""

    beamwidth: float = 30.0  # half-power beamwidth, degrees

    def __post_init__(self):
        if not 0.0 < self.beamwidth < 180.0:
            raise ValueError("half-power beamwidth must lie in (0, 180) degrees")

    @property
    def main_lobe(self) -> float:
        return 2.6 * self.beamwidth

    @property
    def max_gain_db(self) -> float:
        return 10.0 * math.log10((1.6162 / math.sin(math.radians(self.beamwidth / 2.0))) ** 2)

    @property
    def side_lobe_db(self) -> float:
        return -0.4111 * math.log(self.beamwidth) - 10.579

    def gain_db(self, theta: float) -> float:
        return antenna_gain(theta, self)

    def gain(self, theta: float) -> float:
        """Linear gain at ``theta`` degrees off boresight."""
        return db_to_linear(antenna_gain(theta, self))

    def to_dict(self) -> dict:
        return {"beamwidth": self.beamwidth}

    @classmethod
    def from_dict(cls, d: Mapping) -> "AntennaModel":
        return cls(**d)


def antenna_gain(theta: float, model: AntennaModel) -> float:
    """Gain in dB at ``theta`` degrees (0..180) off boresight.

    At exactly half the main-lobe width the main-lobe branch is used.
    """
    if not 0.0 <= theta <= 180.0:
        raise ValueError(f"angle {theta} outside [0, 180] degrees")
    if theta <= model.main_lobe / 2.0:
        return model.max_gain_db - 3.01 * (2.0 * theta / model.beamwidth) ** 2
    return model.side_lobe_db


def off_axis_angle(origin: Sequence[float], boresight: Sequence[float],
                   target: Sequence[float]) -> float:
    """Angle in degrees between origin->boresight and origin->target."""
    bx, by = boresight[0] - origin[0], boresight[1] - origin[1]
    tx, ty = target[0] - origin[0], target[1] - origin[1]
    if (bx == 0.0 and by == 0.0) or (tx == 0.0 and ty == 0.0):
        raise ValueError("coincident nodes have no direction")
    ang = abs(math.degrees(math.atan2(bx * ty - by * tx, bx * tx + by * ty)))
    return min(ang, 180.0)


def _distance(a: Sequence[float], b: Sequence[float]) -> float:
    return math.hypot(a[0] - b[0], a[1] - b[1])


def path_gain(distance: float, tx_gain: float, rx_gain: float, params: RadioParams) -> float:
    """Received power in mW for linear gains at ``distance`` metres."""
    if distance <= 0.0:
        raise ValueError("link distance must be positive")
    return params.k0 * tx_gain * rx_gain * distance ** (-params.pathloss_exp) * params.tx_power


def received_power(tx: Sequence[float], rx: Sequence[float],
                   tx_boresight: Sequence[float], rx_boresight: Sequence[float],
                   params: RadioParams, antenna: AntennaModel,
                   gain_override_db: tuple[float, float] | None = None) -> float:
    """Power in mW arriving at ``rx`` from ``tx``.

    Positions are (x, y) pairs.  ``tx_boresight``/``rx_boresight`` are the
    points each side is steered at.  ``gain_override_db`` replaces both
    antenna gains, e.g. ``(0, 0)`` for isotropic ends.
    """
    d = _distance(tx, rx)
    if d <= 0.0:
        raise ValueError("transmitter and receiver coincide")
    if gain_override_db is not None:
        gt, gr = (db_to_linear(g) for g in gain_override_db)
    else:
        gt = antenna.gain(off_axis_angle(tx, tx_boresight, rx))
        gr = antenna.gain(off_axis_angle(rx, rx_boresight, tx))
    return path_gain(d, gt, gr, params)


def interference_power(interferer: Link, victim: Link, positions: Mapping[int, Sequence[float]],
                       params: RadioParams, antenna: AntennaModel) -> float:
    """Interference in mW at the victim's receiver from the interferer's transmitter."""
    u, v = interferer
    i, j = victim
    if u == j:
        raise ValueError("interferer transmitter is the victim receiver")
    pu, pj = positions[u], positions[j]
    return params.rho * received_power(pu, pj, positions[v], positions[i], params, antenna)


def signal_power(link: Link, positions: Mapping[int, Sequence[float]],
                 params: RadioParams, antenna: AntennaModel) -> float:
    pi, pj = positions[link.tx], positions[link.rx]
    return received_power(pi, pj, pj, pi, params, antenna)


def sinr(link: Link, concurrent: Iterable[Link], positions: Mapping[int, Sequence[float]],
         params: RadioParams, antenna: AntennaModel) -> float:
    link = Link(*link)
    others = [Link(*c) for c in concurrent]
    if link in others:
        raise ValueError("link cannot interfere with itself")
    interference = sum(interference_power(c, link, positions, params, antenna) for c in others)
    return signal_power(link, positions, params, antenna) / (params.noise_power + interference)


def rate_from_sinr(gamma: float, params: RadioParams) -> float:
    return params.eta * params.bandwidth * math.log2(1.0 + gamma)


def link_rate(link: Link, concurrent: Iterable[Link], positions: Mapping[int, Sequence[float]],
              params: RadioParams, antenna: AntennaModel, active: bool = True) -> float:
    """Achievable rate in bit/s; an inactive (unscheduled) link carries 0."""
    if not active:
        return 0.0
    return rate_from_sinr(sinr(link, concurrent, positions, params, antenna), params)


def worst_case_rate(link: Link, positions: Mapping[int, Sequence[float]],
                    params: RadioParams, antenna: AntennaModel, sigma: float) -> float:
    """Rate with the interference term pinned at ``sigma * Pt``."""
    if sigma < 0:
        raise ValueError("sigma must be non-negative")
    s = signal_power(Link(*link), positions, params, antenna)
    return rate_from_sinr(s / (params.noise_power + sigma * params.tx_power), params)


def aligned_rate(distance: float, params: RadioParams, antenna: AntennaModel) -> float:
    """Noise-limited rate of a boresight-aligned link of the given length."""
    g = db_to_linear(antenna.max_gain_db)
    return rate_from_sinr(path_gain(distance, g, g, params) / params.noise_power, params)
