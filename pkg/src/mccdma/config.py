"""Simulation configuration: defaults, validation, and config-file parsing.

Config files are plain key-value text, one `key = value` pair per line
with `#` comments. Every key has a default matching the outdoor system
parameterization (57.6 MHz sampling, 1024-point FFT, 736 used carriers,
30-symbol frames, spreading length 32 at full load).
"""

from __future__ import annotations

from dataclasses import dataclass, fields, replace
from pathlib import Path

_CHIP_MAPPINGS = ("1Da", "1Db", "2Da", "2Db")
_DETECTORS = ("zf", "mmse")
_MODULATIONS = ("qpsk", "16qam")
_CODINGS = ("none", "turbo_r12")
#: Special channel_profile tokens besides a file path: the packaged
#: outdoor profile, an exact all-ones channel, and a synthetic test
#: channel that is i.i.d. Rayleigh per subcarrier and static per frame.
_PROFILE_TOKENS = ("bran_e", "flat", "iid_rayleigh")


@dataclass(frozen=True)
class SimConfig:
    """Full parameterization of one simulated link."""

    # multicarrier dimensions
    fft_size: int = 1024
    used_carriers: int = 736
    guard_samples: int = 216
    sampling_freq_hz: float = 57.6e6
    frame_symbols: int = 30

    # access scheme
    lc: int = 32
    num_users: int = 32
    chip_mapping: str = "1Db"
    time_spread: int = 2  # slots per block, 2D mappings only

    # antennas and detection
    nt: int = 1
    nr: int = 1
    detector: str = "mmse"
    gamma_mode: str = "genie"

    # modulation and coding
    modulation: str = "qpsk"
    coding: str = "none"
    turbo_iterations: int = 6
    interleaver_seed: int = 1

    # channel
    channel_profile: str = "bran_e"
    bs_spacing_lambda: float = 10.0
    ms_spacing_lambda: float = 0.5
    velocity_kmh: float = 60.0
    carrier_freq_hz: float = 5.0e9
    num_subrays: int = 20

    # sweep control
    ebn0_db: tuple = (0.0, 2.0, 4.0, 6.0, 8.0, 10.0)
    target_bit_errors: int = 1000
    max_frames: int = 20000
    master_seed: int = 0

    def __post_init__(self):
        if self.chip_mapping not in _CHIP_MAPPINGS:
            raise ValueError(f"chip_mapping must be one of {_CHIP_MAPPINGS}")
        if self.detector not in _DETECTORS:
            raise ValueError(f"detector must be one of {_DETECTORS}")
        if self.modulation not in _MODULATIONS:
            raise ValueError(f"modulation must be one of {_MODULATIONS}")
        if self.coding not in _CODINGS:
            raise ValueError(f"coding must be one of {_CODINGS}")
        if self.nt not in (1, 2) or self.nr not in (1, 2):
            raise ValueError("nt and nr must be 1 or 2")
        if self.lc < 2 or (self.lc & (self.lc - 1)) != 0:
            raise ValueError("lc must be a power of two >= 2")
        if not 1 <= self.num_users <= self.lc:
            raise ValueError("num_users must be in [1, lc]")
        if self.nt == 2 and self.frame_symbols % 2 != 0:
            raise ValueError("space-time coding needs an even number of frame symbols")
        if self.frame_symbols < 1:
            raise ValueError("frame_symbols must be positive")
        if not (self.gamma_mode == "genie" or self.gamma_mode.startswith("fixed:")):
            raise ValueError("gamma_mode must be 'genie' or 'fixed:<linear value>'")
        if self.gamma_mode.startswith("fixed:"):
            if self.fixed_gamma() <= 0:
                raise ValueError("fixed gamma must be positive")
        if len(self.ebn0_db) == 0:
            raise ValueError("ebn0_db list must not be empty")
        if self.target_bit_errors < 1 or self.max_frames < 1:
            raise ValueError("stop rule parameters must be positive")

    def fixed_gamma(self) -> float:
        return float(self.gamma_mode.split(":", 1)[1])

    @property
    def bits_per_symbol(self) -> int:
        return 2 if self.modulation == "qpsk" else 4

    @property
    def code_rate(self) -> float:
        return 1.0 if self.coding == "none" else 0.5

    @property
    def velocity_mps(self) -> float:
        return self.velocity_kmh / 3.6


def _coerce(kind, raw: str):
    raw = raw.strip()
    if kind is tuple:
        return tuple(float(v) for v in raw.split(",") if v.strip())
    if kind is int:
        return int(raw)
    if kind is float:
        return float(raw)
    return raw


def parse_config_text(text: str, base: SimConfig | None = None) -> SimConfig:
    """Parse `key = value` lines into a SimConfig, defaulting missing keys."""
    base = base or SimConfig()
    defaults = SimConfig()
    known = {f.name for f in fields(SimConfig)}
    updates = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValueError(f"line {lineno}: expected 'key = value', got {raw!r}")
        key, value = (part.strip() for part in line.split("=", 1))
        if key not in known:
            raise ValueError(f"line {lineno}: unknown config key {key!r}")
        kind = type(getattr(defaults, key))
        try:
            updates[key] = _coerce(kind, value)
        except ValueError as exc:
            raise ValueError(f"line {lineno}: bad value for {key!r}: {exc}") from exc
    return replace(base, **updates)


def load_config(path) -> SimConfig:
    return parse_config_text(Path(path).read_text())


def describe(config: SimConfig) -> str:
    """Render the configuration back as config-file text."""
    lines = []
    for f in fields(SimConfig):
        value = getattr(config, f.name)
        if isinstance(value, tuple):
            value = ",".join(repr(v) for v in value)
        lines.append(f"{f.name} = {value}")
    return "\n".join(lines)
