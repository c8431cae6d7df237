"""Monte Carlo goodput estimation and closed-form reliability grids.

Goodput trials are evaluated in fixed-size chunks. Chunk c draws its
channels from an independent stream seeded by (master_seed, c) and
partial sums are reduced in chunk order, so results are bit-identical for a
given seed no matter how many workers evaluate the chunks. The channel
stream does not depend on the scheme, which makes the qualifying event of
plain beam sweeping and its early-stopping variant identical per trial.
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from functools import lru_cache
from typing import Optional, Sequence

import numpy as np

from .channel import DEFAULT_RHO, TWO_PI, CodebookRole, make_codebook, quantize_phases
from .control import (
    DEFAULT_HEADER_BITS,
    DEFAULT_SYMBOLS_PER_TTI,
    ControlChannelState,
    ControlMessage,
    ControlMode,
    Scheme,
    control_reliability,
    db_to_linear,
    message_catalog,
)
from .errors import InvalidParameterError
from .frames import TTI_MS, SchemeParams, alg_ttis, control_spans, frame_ttis

CHUNK_TRIALS = 4096
DEFAULT_CODEBOOK_SEED = 7
_INV_SQRT2 = 1.0 / np.sqrt(2.0)


@dataclass(frozen=True)
class GoodputResult:
    frame_ms: float
    scheme: Scheme
    mode: ControlMode
    goodput_mbps: float       # mean payload bits delivered per frame second / 1e6
    overhead_ms: float        # mean non-payload frame time
    success_prob: float       # mean per-trial success (control reliability included)
    n_trials: int
    seed: int
    goodput_se: float = 0.0   # Monte Carlo standard error of goodput_mbps


@dataclass(frozen=True)
class ReliabilityCell:
    snr_ris_db: float
    snr_ue_db: float
    reliability: float


@dataclass(frozen=True)
class _SweepTask:
    """Everything a worker needs to evaluate one chunk of trials."""

    scheme: Scheme
    n_elements: int
    rho: float
    quant_bits: int
    target_snr: float
    codebook_size: int
    codebook_seed: int
    codebook_style: str
    seed: int
    n_trials: int
    frames_ttis: tuple[int, ...]
    fixed_overhead_ttis: int    # INI + SET message TTIs in band + switch time
    alg_const_ttis: int         # full ALG span (unused for early stopping)
    es_per_eval_ttis: int       # 0 unless early stopping


@lru_cache(maxsize=16)
def _codebook_matrix(
    n_elements: int, size: int, quant_bits: int, seed: int, style: str
) -> np.ndarray:
    cb = make_codebook(CodebookRole.BSW, n_elements, size, quant_bits, seed, style)
    matrix = np.exp(1j * np.stack([e.phases for e in cb.entries]))
    matrix.setflags(write=False)    # cached and shared across calls
    return matrix


def _chunk_outcomes(task: _SweepTask, chunk_index: int, m: int):
    """Per-trial (rate, success, evaluations) for one chunk of m trials.

    rate is in bit/s/Hz; evaluations is the number of sweep entries tried
    before stopping (None for the rate-adaptive scheme).
    """
    rng = np.random.default_rng([task.seed, chunk_index])
    draws = rng.standard_normal((4, m, task.n_elements))
    f = (draws[0] + 1j * draws[1]) * _INV_SQRT2
    g = (draws[2] + 1j * draws[3]) * _INV_SQRT2
    fg = f * g
    if task.scheme is Scheme.OCE:
        phi_star = (-np.angle(fg)) % TWO_PI
        quantized = quantize_phases(phi_star, task.quant_bits)
        s = np.sum(fg * np.exp(1j * quantized), axis=1)
        snr = task.rho * np.abs(s) ** 2
        rate = np.log2(1.0 + snr)
        success = np.ones(m)
        evals = None
    else:
        entry_matrix = _codebook_matrix(
            task.n_elements, task.codebook_size, task.quant_bits,
            task.codebook_seed, task.codebook_style,
        )
        snr = task.rho * np.abs(fg @ entry_matrix.T) ** 2
        qualifying = snr >= task.target_snr
        success = qualifying.any(axis=1).astype(float)
        first = np.argmax(qualifying, axis=1) + 1
        evals = np.where(success > 0.0, first, task.codebook_size)
        rate = np.full(m, np.log2(1.0 + task.target_snr))
    return rate, success, evals


def _chunk_partials(task: _SweepTask, chunk_index: int) -> np.ndarray:
    """Per-frame partial sums [sum rsp, sum rsp^2, sum success, sum overhead_ttis]."""
    start = chunk_index * CHUNK_TRIALS
    m = min(CHUNK_TRIALS, task.n_trials - start)
    rate, success, evals = _chunk_outcomes(task, chunk_index, m)
    out = np.zeros((len(task.frames_ttis), 4))
    for i, total in enumerate(task.frames_ttis):
        if task.es_per_eval_ttis:
            oh = task.fixed_overhead_ttis + task.es_per_eval_ttis * evals
            pay = np.maximum(0, total - oh)
            overhead_sum = float(np.minimum(oh, total).sum())
        else:
            oh = task.fixed_overhead_ttis + task.alg_const_ttis
            pay = max(0, total - oh)
            overhead_sum = float(min(oh, total)) * m
        rsp = rate * success * pay
        out[i, 0] = rsp.sum()
        out[i, 1] = (rsp * rsp).sum()
        out[i, 2] = success.sum()
        out[i, 3] = overhead_sum
    return out


def select_config(entry_snrs: Sequence[float], target_snr: float):
    """Beam-sweeping selection: (success, best qualifying index, first qualifying index).

    Indices are 0-based positions in the codebook, None on outage. The best
    qualifying entry is what the setup message signals; the first qualifying
    entry is where an early-stopped sweep ends.
    """
    snrs = np.asarray(entry_snrs, dtype=float)
    qualifying = snrs >= target_snr
    if not qualifying.any():
        return False, None, None
    best = int(np.argmax(np.where(qualifying, snrs, -np.inf)))
    first = int(np.argmax(qualifying))
    return True, best, first


def goodput_sweep(
    params: SchemeParams,
    mode: ControlMode,
    frame_grid_ms: Sequence[float],
    bandwidth_hz: float,
    n_trials: int,
    seed: int,
    *,
    rho: float = DEFAULT_RHO,
    assume_perfect_control: bool = True,
    control_state: Optional[ControlChannelState] = None,
    header_bits: int = DEFAULT_HEADER_BITS,
    ini_carries_full_codebook: bool = False,
    tti_ms: float = TTI_MS,
    codebook_seed: int = DEFAULT_CODEBOOK_SEED,
    codebook_style: str = "random",
    workers: int = 1,
) -> list[GoodputResult]:
    """Estimate goodput for every frame length of a grid with one trial set.

    All grid points share the same per-trial channel outcomes, which is
    exactly what element-wise calls with a common master seed would produce
    since the trial streams depend only on (seed, chunk).
    """
    if n_trials < 1:
        raise InvalidParameterError("n_trials must be >= 1")
    if not bandwidth_hz > 0:
        raise InvalidParameterError("bandwidth_hz must be > 0")
    if not rho > 0:
        raise InvalidParameterError("rho must be > 0")
    if len(frame_grid_ms) == 0:
        raise InvalidParameterError("frame grid must be non-empty")
    frames = tuple(frame_ttis(f, tti_ms) for f in frame_grid_ms)

    catalog = message_catalog(
        params.scheme, params.n_elements, params.quant_bits,
        params.bsw_codebook_size, header_bits, ini_carries_full_codebook,
    )
    spans = control_spans(catalog, mode)
    fixed = spans.ini_in_band + spans.set_in_band + params.switch_ttis
    if params.scheme is Scheme.BSW_ES:
        es_per_eval = 2 if params.es_reservation else 1
        alg_const = 0
    else:
        es_per_eval = 0
        alg_const = alg_ttis(params)

    reliability = 1.0
    if not assume_perfect_control:
        if control_state is None:
            raise InvalidParameterError(
                "control_state is required when assume_perfect_control is off"
            )
        reliability = control_reliability(catalog, control_state, mode)

    task = _SweepTask(
        scheme=params.scheme,
        n_elements=params.n_elements,
        rho=rho,
        quant_bits=params.quant_bits,
        target_snr=params.target_snr,
        codebook_size=params.bsw_codebook_size,
        codebook_seed=codebook_seed,
        codebook_style=codebook_style,
        seed=seed,
        n_trials=n_trials,
        frames_ttis=frames,
        fixed_overhead_ttis=fixed,
        alg_const_ttis=alg_const,
        es_per_eval_ttis=es_per_eval,
    )

    n_chunks = math.ceil(n_trials / CHUNK_TRIALS)
    if workers <= 1:
        partials = [_chunk_partials(task, c) for c in range(n_chunks)]
    else:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            partials = list(pool.map(_chunk_partials, [task] * n_chunks, range(n_chunks)))

    sums = partials[0].copy()
    for p in partials[1:]:    # fixed chunk order keeps the reduction deterministic
        sums += p

    results = []
    for i, f_ms in enumerate(frame_grid_ms):
        total = frames[i]
        sum_rsp, sum_rsp2, sum_success, sum_oh = sums[i]
        scale = bandwidth_hz * reliability / (total * 1e6)
        mean_rsp = sum_rsp / n_trials
        var_rsp = max(0.0, sum_rsp2 / n_trials - mean_rsp * mean_rsp)
        results.append(GoodputResult(
            frame_ms=float(f_ms),
            scheme=params.scheme,
            mode=mode,
            goodput_mbps=scale * mean_rsp,
            overhead_ms=sum_oh / n_trials * tti_ms,
            success_prob=reliability * sum_success / n_trials,
            n_trials=n_trials,
            seed=seed,
            goodput_se=scale * math.sqrt(var_rsp / n_trials),
        ))
    return results


def goodput(
    params: SchemeParams,
    mode: ControlMode,
    frame_ms: float,
    bandwidth_hz: float,
    n_trials: int,
    seed: int,
    **kwargs,
) -> GoodputResult:
    """Single-frame goodput estimate; see goodput_sweep for keyword options."""
    return goodput_sweep(params, mode, [frame_ms], bandwidth_hz, n_trials, seed,
                         **kwargs)[0]


def crossover_frame(
    oce_curve: Sequence[GoodputResult],
    bsw_curve: Sequence[GoodputResult],
) -> Optional[float]:
    """Smallest grid frame where rate adaptation overtakes beam sweeping for good.

    Ties count as an overtake. Returns None when no suffix of the grid is
    dominated by the rate-adaptive curve.
    """
    if len(oce_curve) != len(bsw_curve) or len(oce_curve) == 0:
        raise InvalidParameterError("curves must share a non-empty frame grid")
    for a, b in zip(oce_curve, bsw_curve):
        if a.frame_ms != b.frame_ms:
            raise InvalidParameterError("curves must share a non-empty frame grid")
    idx = None
    for i in reversed(range(len(oce_curve))):
        if oce_curve[i].goodput_mbps >= bsw_curve[i].goodput_mbps:
            idx = i
        else:
            break
    return None if idx is None else oce_curve[idx].frame_ms


def _validate_grid(grid_db: Sequence[float], name: str):
    if len(grid_db) == 0:
        raise InvalidParameterError(f"{name} must be non-empty")
    if any(b <= a for a, b in zip(grid_db, grid_db[1:])):
        raise InvalidParameterError(f"{name} must be strictly increasing")


def reliability_grid(
    catalog: list[ControlMessage],
    mode: ControlMode,
    snr_ris_grid_db: Sequence[float],
    snr_ue_grid_db: Sequence[float],
    symbols_per_tti: int = DEFAULT_SYMBOLS_PER_TTI,
) -> list[list[ReliabilityCell]]:
    """Closed-form control reliability on a dB grid, rows over the RIS axis."""
    _validate_grid(snr_ris_grid_db, "snr_ris_grid_db")
    _validate_grid(snr_ue_grid_db, "snr_ue_grid_db")
    rows = []
    for ris_db in snr_ris_grid_db:
        row = []
        for ue_db in snr_ue_grid_db:
            state = ControlChannelState(
                avg_snr_ue=db_to_linear(ue_db),
                avg_snr_ris=db_to_linear(ris_db),
                symbols_per_tti=symbols_per_tti,
            )
            row.append(ReliabilityCell(
                snr_ris_db=float(ris_db),
                snr_ue_db=float(ue_db),
                reliability=control_reliability(catalog, state, mode),
            ))
        rows.append(row)
    return rows


def calibrate_rho(
    n_elements: int = 100,
    quant_bits: int = 2,
    codebook_size: int = 32,
    target_snr: float = 10.0,
    codebook_seed: int = DEFAULT_CODEBOOK_SEED,
    codebook_style: str = "random",
    n_trials: int = 100_000,
    seed: int = 0,
    target_success: float = 0.5,
) -> float:
    """Reference SNR making beam sweeping succeed at a chosen rate.

    The per-entry SNR scales linearly in rho, so success(rho) is the
    fraction of trials whose best entry statistic exceeds target/rho and the
    calibrated value is read off the empirical quantile directly.
    """
    if not 0.0 < target_success < 1.0:
        raise InvalidParameterError("target_success must be in (0, 1)")
    entry_matrix = _codebook_matrix(
        n_elements, codebook_size, quant_bits, codebook_seed, codebook_style
    )
    maxima = []
    n_chunks = math.ceil(n_trials / CHUNK_TRIALS)
    for c in range(n_chunks):
        m = min(CHUNK_TRIALS, n_trials - c * CHUNK_TRIALS)
        rng = np.random.default_rng([seed, c])
        draws = rng.standard_normal((4, m, n_elements))
        f = (draws[0] + 1j * draws[1]) * _INV_SQRT2
        g = (draws[2] + 1j * draws[3]) * _INV_SQRT2
        stat = np.abs((f * g) @ entry_matrix.T) ** 2
        maxima.append(stat.max(axis=1))
    best = np.concatenate(maxima)
    return float(target_snr / np.quantile(best, 1.0 - target_success))
