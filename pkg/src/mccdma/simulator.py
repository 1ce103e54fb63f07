"""Frame-level Monte Carlo engine: transmit chain, sweeps, and reporting.

One frame runs the full chain: user bits -> optional turbo coding and
frame interleaving -> constellation mapping -> fast-transform spreading ->
chip mapping -> per-subcarrier space-time encoding -> OFDM -> channel and
noise -> OFDM front-end -> equalization/combining -> chip demapping ->
despreading -> bias-corrected detection (hard, or soft demapping into the
turbo decoder) for every active user.

Randomness is organized as counter-based substreams keyed by
(master seed, frame index, domain), so sweep results depend only on the
configuration and master seed, never on worker count or scheduling. The
stop rule is evaluated on fixed-size frame batches for the same reason.

The channel is applied per subcarrier in the frequency domain (the guard
interval exceeds the profile delay spread, making this equivalent to
time-domain convolution); the OFDM modulate/demodulate pair still runs on
the transmit grids so every frame exercises the waveform path end to end.
"""

from __future__ import annotations

import csv
import io
import math
import multiprocessing
from dataclasses import dataclass
from functools import lru_cache
from importlib import resources

import numpy as np

from . import channel as chan
from . import coding, modem, ofdm, spreading, stbc
from .config import SimConfig

_DOMAIN_DATA = 0
_DOMAIN_CHANNEL = 1
_DOMAIN_NOISE = 2

#: Frames per stop-rule check. Fixed (not tied to the worker count) so the
#: number of simulated frames is a pure function of config and seed.
BATCH_FRAMES = 16

#: Noise-variance floor handed to the soft demapper on a noiseless run.
_SOFT_VARIANCE_FLOOR = 1e-12

CSV_COLUMNS = (
    "ebn0_db",
    "detector",
    "chip_mapping",
    "nt",
    "nr",
    "users",
    "lc",
    "modulation",
    "coding",
    "bits",
    "bit_errors",
    "ber",
    "frames",
    "frame_errors",
    "fer",
    "master_seed",
)


def substream(master_seed: int, *key: int) -> np.random.Generator:
    """Independent counter-based generator for one (frame, domain) pair."""
    seq = np.random.SeedSequence(entropy=master_seed, spawn_key=tuple(key))
    return np.random.Generator(np.random.Philox(seq))


def noise_variance_for(ebn0_db: float, config: SimConfig) -> float:
    """Per-cell complex noise variance for a target Eb/N0.

    With unit total transmit energy per used subcarrier, the energy per
    information bit is 1/(R*m) regardless of load, so
    N0 = 1 / (R * m * 10^(Eb/N0 / 10)). The guard-interval efficiency
    loss is deliberately not charged to Eb/N0, and each receive antenna
    sees the same N0 (array gain arises from combining).
    """
    return 1.0 / (
        config.code_rate * config.bits_per_symbol * 10.0 ** (ebn0_db / 10.0)
    )


@dataclass
class ErrorStats:
    """Accumulated error counters for one (config, Eb/N0) point."""

    bits_sent: int = 0
    bit_errors: int = 0
    frames_sent: int = 0
    frame_errors: int = 0
    user_frames: int = 0
    user_frame_errors: int = 0
    degenerate_cells: int = 0

    def __add__(self, other: "ErrorStats") -> "ErrorStats":
        return ErrorStats(
            self.bits_sent + other.bits_sent,
            self.bit_errors + other.bit_errors,
            self.frames_sent + other.frames_sent,
            self.frame_errors + other.frame_errors,
            self.user_frames + other.user_frames,
            self.user_frame_errors + other.user_frame_errors,
            self.degenerate_cells + other.degenerate_cells,
        )

    @property
    def ber(self) -> float:
        return self.bit_errors / self.bits_sent if self.bits_sent else 0.0

    @property
    def fer(self) -> float:
        return self.frame_errors / self.frames_sent if self.frames_sent else 0.0

    @property
    def user_fer(self) -> float:
        return self.user_frame_errors / self.user_frames if self.user_frames else 0.0


def packaged_profile_path(name: str):
    return resources.files("mccdma").joinpath("profiles", f"{name}.profile")


class FrameEngine:
    """Precomputed per-configuration state for running frames."""

    def __init__(self, config: SimConfig):
        self.config = config
        self.params = ofdm.OfdmParams(
            fft_size=config.fft_size,
            used_carriers=config.used_carriers,
            guard_samples=config.guard_samples,
            sampling_freq_hz=config.sampling_freq_hz,
        )
        self.freqs = ofdm.subcarrier_frequencies(self.params)
        self.n_streams = 2 if config.nt == 2 else 1
        self.n_slots = config.frame_symbols // self.n_streams
        self.mapping = spreading.ChipMapping(
            config.chip_mapping,
            config.lc,
            config.used_carriers,
            self.n_slots,
            config.time_spread,
        )
        self.codes = spreading.generate_walsh_hadamard(config.lc, config.num_users)
        self.constellation = modem.make_constellation(config.modulation)

        self.symbols_per_user = self.mapping.num_blocks * self.n_streams
        raw_bits = self.symbols_per_user * self.constellation.bits_per_symbol
        self.coded_bits_per_user = raw_bits
        if config.coding == "turbo_r12":
            k = (raw_bits - 2 * coding.TAIL_BITS_PER_ENCODER) // 2
            if k < 2 or 2 * k + 2 * coding.TAIL_BITS_PER_ENCODER != raw_bits:
                raise ValueError(
                    f"frame capacity of {raw_bits} coded bits does not fit the "
                    "rate-1/2 code; adjust the grid or mapping"
                )
            self.turbo = coding.TurboCode(
                k,
                iterations=config.turbo_iterations,
                interleaver_seed=config.interleaver_seed,
            )
            self.interleaver = coding.ChannelInterleaver(
                raw_bits, seed=(config.interleaver_seed, 1)
            )
            self.info_bits_per_user = k
        else:
            self.turbo = None
            self.interleaver = None
            self.info_bits_per_user = raw_bits

        self.channel_kind = "geometric"
        self.profile = None
        token = config.channel_profile
        if token == "flat":
            self.channel_kind = "flat"
        elif token == "iid_rayleigh":
            self.channel_kind = "iid_rayleigh"
        else:
            path = packaged_profile_path(token) if token == "bran_e" else token
            self.profile = chan.load_profile(path, num_subrays=config.num_subrays)
        self.spatial = chan.SpatialConfig(
            nt=config.nt,
            nr=config.nr,
            bs_spacing_lambda=config.bs_spacing_lambda,
            ms_spacing_lambda=config.ms_spacing_lambda,
            velocity_mps=config.velocity_mps,
            carrier_freq_hz=config.carrier_freq_hz,
        )
        ts = self.params.symbol_duration_s
        self.symbol_times = (np.arange(config.frame_symbols) + 0.5) * ts
        # one channel snapshot per space-time pair, at the pair midpoint
        self.pair_times = (2 * np.arange(self.n_slots) + 1.0) * ts

    # -- transmit path ---------------------------------------------------

    def draw_bits(self, rng: np.random.Generator) -> np.ndarray:
        return rng.integers(
            0, 2, size=(self.config.num_users, self.info_bits_per_user), dtype=np.int64
        )

    def modulate_users(self, tx_bits: np.ndarray) -> np.ndarray:
        """Code, interleave and map each user's bits to symbols."""
        if self.turbo is not None:
            coded = self.turbo.encode(tx_bits)
            coded = self.interleaver.interleave(coded)
        else:
            coded = tx_bits
        symbols = modem.map_bits(coded.ravel(), self.constellation)
        return symbols.reshape(self.config.num_users, self.symbols_per_user)

    def build_tx_grids(self, symbols: np.ndarray) -> np.ndarray:
        """Spread, place and space-time encode into (nt, symbols, carriers)."""
        cfg = self.config
        if self.n_streams == 2:
            grids = []
            for part in (symbols[:, 0::2], symbols[:, 1::2]):
                chips = spreading.spread(part, self.codes)
                grids.append(self.mapping.map_chips(chips))
            enc = stbc.alamouti_encode(grids[0], grids[1])  # (2, 2, slots, K)
            phys = np.empty(
                (2, cfg.frame_symbols, cfg.used_carriers), dtype=complex
            )
            phys[:, 0::2] = enc[:, 0]
            phys[:, 1::2] = enc[:, 1]
            return phys
        chips = spreading.spread(symbols, self.codes)
        return self.mapping.map_chips(chips)[None, :, :]

    def transmit(self, tx_bits: np.ndarray) -> spreading.ResourceGrid:
        """Public frame builder returning the per-antenna resource grid."""
        phys = self.build_tx_grids(self.modulate_users(tx_bits))
        return spreading.ResourceGrid(np.moveaxis(phys, 1, 2).copy())

    def _through_waveform(self, phys: np.ndarray) -> np.ndarray:
        """Run each antenna grid through OFDM synthesis and the front-end."""
        out = np.empty_like(phys)
        for t in range(phys.shape[0]):
            samples = ofdm.modulate(phys[t].T, self.params)
            out[t] = ofdm.demodulate(samples, self.params).T
        return out

    # -- channel ---------------------------------------------------------

    def draw_channel(self, rng: np.random.Generator):
        """Per-symbol trace and per-detection-snapshot trace."""
        cfg = self.config
        s = cfg.frame_symbols
        shape = (cfg.nt, cfg.nr, cfg.used_carriers)
        if self.channel_kind == "flat":
            h = np.ones(shape, dtype=complex)
        elif self.channel_kind == "iid_rayleigh":
            h = (rng.standard_normal(shape) + 1j * rng.standard_normal(shape)) / math.sqrt(2.0)
        else:
            realization = chan.realize(self.profile, self.spatial, rng)
            times = np.concatenate([self.symbol_times, self.pair_times])
            full = chan.frequency_response(realization, times, self.freqs)
            trace = full[:s]
            eq = full[s:] if self.n_streams == 2 else trace
            return trace, eq
        trace = np.broadcast_to(h[None], (s,) + shape)
        n_eq = self.n_slots if self.n_streams == 2 else s
        eq = np.broadcast_to(h[None], (n_eq,) + shape)
        return trace, eq

    # -- receive path ----------------------------------------------------

    def detector_gamma(self, n0: float) -> float:
        cfg = self.config
        if cfg.detector == "zf":
            return math.inf
        if cfg.gamma_mode == "genie":
            es_chip = cfg.num_users / cfg.lc
            return math.inf if n0 == 0 else es_chip / n0
        return cfg.fixed_gamma()

    def receive(self, rx: np.ndarray, eq_trace: np.ndarray, n0: float):
        """Equalize, despread and detect; returns (bits, stats extras)."""
        cfg = self.config
        h_det = np.moveaxis(eq_trace, 0, 2) / math.sqrt(cfg.nt)  # (nt, nr, snap, K)
        bank = stbc.compute_equalizer(h_det, cfg.detector, self.detector_gamma(n0))

        if self.n_streams == 2:
            received = np.stack([rx[:, 0::2], rx[:, 1::2]], axis=1)
            z_streams = stbc.combine(received, bank)
        else:
            z_streams = (stbc.equalize_single(rx, bank),)

        estimates = np.empty(
            (cfg.num_users, self.symbols_per_user), dtype=complex
        )
        for i, z in enumerate(z_streams):
            chips = self.mapping.demap_chips(z)
            estimates[:, i :: self.n_streams] = spreading.despread_all(chips, self.codes)

        energy_blocks = self.mapping.gather_cells(bank.channel_energy)
        rho_blocks = stbc.rho_from_energy(energy_blocks, bank.inv_gamma)
        rho_sym = np.repeat(rho_blocks, self.n_streams)
        rho_all = np.tile(rho_sym, cfg.num_users)

        if self.turbo is None:
            bits = modem.demap_hard(estimates.ravel(), rho_all, self.constellation)
            return bits.reshape(cfg.num_users, -1), bank
        gain_blocks = self.mapping.gather_cells(bank.noise_gain())
        sigma2_blocks = rho_blocks**2 * max(n0, 0.0) * gain_blocks.mean(axis=1)
        sigma2_blocks = np.maximum(sigma2_blocks, _SOFT_VARIANCE_FLOOR)
        sigma2_sym = np.repeat(sigma2_blocks, self.n_streams)
        llrs = modem.demap_soft(
            estimates.ravel(),
            rho_all,
            np.tile(sigma2_sym, cfg.num_users),
            self.constellation,
        )
        llrs = llrs.reshape(cfg.num_users, self.coded_bits_per_user)
        llrs = self.interleaver.deinterleave(llrs)
        bits, _ = self.turbo.decode(llrs)
        return bits, bank

    # -- one frame ---------------------------------------------------------

    def run_frame(self, ebn0_db: float, frame_index: int, master_seed: int) -> ErrorStats:
        cfg = self.config
        n0 = noise_variance_for(ebn0_db, cfg)
        data_rng = substream(master_seed, frame_index, _DOMAIN_DATA)
        chan_rng = substream(master_seed, frame_index, _DOMAIN_CHANNEL)
        noise_rng = substream(master_seed, frame_index, _DOMAIN_NOISE)

        tx_bits = self.draw_bits(data_rng)
        phys = self.build_tx_grids(self.modulate_users(tx_bits))
        phys = self._through_waveform(phys)

        trace, eq_trace = self.draw_channel(chan_rng)
        rx = chan.apply_channel(phys, trace)
        unit_noise = noise_rng.standard_normal(rx.shape) + 1j * noise_rng.standard_normal(
            rx.shape
        )
        rx = rx + unit_noise * math.sqrt(n0 / 2.0)

        rx_bits, bank = self.receive(rx, eq_trace, n0)
        wrong = rx_bits != tx_bits
        bit_errors = int(wrong.sum())
        users_hit = int(wrong.any(axis=1).sum())
        return ErrorStats(
            bits_sent=tx_bits.size,
            bit_errors=bit_errors,
            frames_sent=1,
            frame_errors=1 if bit_errors else 0,
            user_frames=cfg.num_users,
            user_frame_errors=users_hit,
            degenerate_cells=bank.degenerate_cells,
        )


@lru_cache(maxsize=8)
def get_engine(config: SimConfig) -> FrameEngine:
    return FrameEngine(config)


def run_frame(
    config: SimConfig, ebn0_db: float, frame_index: int, master_seed: int
) -> ErrorStats:
    """Run one frame; deterministic in (config, ebn0, frame index, seed)."""
    return get_engine(config).run_frame(ebn0_db, frame_index, master_seed)


def _frame_task(args) -> ErrorStats:
    return run_frame(*args)


def sweep(
    config: SimConfig,
    ebn0_list=None,
    master_seed: int | None = None,
    workers: int = 1,
    on_point=None,
) -> list[dict]:
    """Run the Monte Carlo sweep and return one result row per Eb/N0 point.

    Each point accumulates frames in fixed-size batches until the target
    bit-error count or the frame cap is reached. Results are identical
    for any worker count.
    """
    points = tuple(ebn0_list) if ebn0_list is not None else config.ebn0_db
    if len(points) == 0:
        raise ValueError("ebn0 list must not be empty")
    seed = config.master_seed if master_seed is None else master_seed

    pool = None
    if workers > 1:
        pool = multiprocessing.get_context("fork").Pool(processes=workers)
    try:
        rows = []
        for ebn0 in points:
            stats = ErrorStats()
            frames_done = 0
            while (
                stats.bit_errors < config.target_bit_errors
                and frames_done < config.max_frames
            ):
                batch = min(BATCH_FRAMES, config.max_frames - frames_done)
                tasks = [
                    (config, float(ebn0), frames_done + i, seed) for i in range(batch)
                ]
                if pool is None:
                    results = [_frame_task(t) for t in tasks]
                else:
                    results = pool.map(_frame_task, tasks)
                for r in results:
                    stats = stats + r
                frames_done += batch
            row = _result_row(config, float(ebn0), stats, seed)
            rows.append(row)
            if on_point is not None:
                on_point(row)
        return rows
    finally:
        if pool is not None:
            pool.close()
            pool.join()


def _result_row(config: SimConfig, ebn0: float, stats: ErrorStats, seed: int) -> dict:
    return {
        "ebn0_db": ebn0,
        "detector": config.detector,
        "chip_mapping": config.chip_mapping,
        "nt": config.nt,
        "nr": config.nr,
        "users": config.num_users,
        "lc": config.lc,
        "modulation": config.modulation,
        "coding": config.coding,
        "bits": stats.bits_sent,
        "bit_errors": stats.bit_errors,
        "ber": stats.ber,
        "frames": stats.frames_sent,
        "frame_errors": stats.frame_errors,
        "fer": stats.fer,
        "master_seed": seed,
        # extras kept out of the CSV
        "user_frames": stats.user_frames,
        "user_frame_errors": stats.user_frame_errors,
        "user_fer": stats.user_fer,
    }


def rows_to_csv(rows) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(CSV_COLUMNS)
    for row in rows:
        writer.writerow([row[col] for col in CSV_COLUMNS])
    return buf.getvalue()


def parse_csv(text: str) -> list[dict]:
    reader = csv.DictReader(io.StringIO(text))
    rows = []
    for rec in reader:
        row = dict(rec)
        for key in ("nt", "nr", "users", "lc", "bits", "bit_errors", "frames",
                    "frame_errors", "master_seed"):
            row[key] = int(row[key])
        for key in ("ebn0_db", "ber", "fer"):
            row[key] = float(row[key])
        rows.append(row)
    return rows


def summarize(rows) -> str:
    """Human-readable sweep summary, including the per-user frame error rate."""
    lines = []
    for row in rows:
        parts = [
            f"Eb/N0 {row['ebn0_db']:>5.1f} dB",
            f"ber {row['ber']:.3e}",
            f"fer {row['fer']:.3e}",
        ]
        if "user_fer" in row:
            parts.append(f"user-fer {row['user_fer']:.3e}")
        parts.append(f"({row['bit_errors']}/{row['bits']} bits, {row['frames']} frames)")
        lines.append("  ".join(parts))
    return "\n".join(lines)


def link_info(config: SimConfig) -> dict:
    """Derived rate and dimensioning figures for the `info` command."""
    engine = get_engine(config)
    frame_duration = config.frame_symbols * engine.params.symbol_duration_s
    info_bits_frame = config.num_users * engine.info_bits_per_user
    return {
        "subcarrier_spacing_khz": engine.params.subcarrier_spacing_hz / 1e3,
        "symbol_duration_us": engine.params.symbol_duration_s * 1e6,
        "frame_duration_ms": frame_duration * 1e3,
        "chip_blocks_per_frame": engine.mapping.num_blocks * engine.n_streams,
        "symbols_per_user_per_frame": engine.symbols_per_user,
        "info_bits_per_user_per_frame": engine.info_bits_per_user,
        "info_bits_per_frame": info_bits_frame,
        "throughput_mbit_s": info_bits_frame / frame_duration / 1e6,
    }
