import numpy as np
import pytest

from riscplane.control import ControlMode, Scheme, message_catalog
from riscplane.errors import InvalidParameterError
from riscplane.frames import (
    ChannelUse,
    FramePhase,
    FramePlan,
    PhaseKind,
    SchemeParams,
    alg_ttis,
    build_frame,
    control_spans,
    frame_ttis,
    overhead_ms,
    overhead_ttis,
    validate_causality,
)


def default_catalog(scheme):
    return message_catalog(scheme, 100, 2, 32, 16)


def default_params(scheme, **kw):
    return SchemeParams(scheme=scheme, **kw)


def inband_total(plan):
    return sum(p.tti_span for p in plan.phases
               if p.channel_usage is not ChannelUse.OUT_OF_BAND)


# ---------------------------------------------------------------------------
# Frame construction
# ---------------------------------------------------------------------------

def test_oce_default_frame_budget_at_60ms():
    # INI 2 + ALG (100 pilots + 2 proc) + SET (3 messages + 1 switch) = 108 TTIs
    plan = build_frame(default_params(Scheme.OCE), ControlMode.IB_C, 60.0,
                       default_catalog(Scheme.OCE))
    assert plan.total_ttis == 120
    assert plan.span(PhaseKind.INI) == 2
    assert plan.span(PhaseKind.ALG) == 102
    assert plan.span(PhaseKind.SET) == 4
    assert plan.pay_ttis == 12
    assert overhead_ms(plan) == pytest.approx(54.0)


def test_bsw_default_overhead_arithmetic():
    # 2 INI + (32 pilots + 2 proc) + (2 SET messages + 1 switch) = 39 TTIs
    params = default_params(Scheme.BSW)
    catalog = default_catalog(Scheme.BSW)
    assert overhead_ttis(params, ControlMode.IB_C, catalog) == 39
    plan = build_frame(params, ControlMode.IB_C, 40.0, catalog)
    assert overhead_ms(plan) == pytest.approx(19.5)


def test_out_of_band_removes_risc_messages_from_frame():
    params = default_params(Scheme.OCE)
    catalog = default_catalog(Scheme.OCE)
    plan = build_frame(params, ControlMode.OB_C, 60.0, catalog)
    assert plan.span(PhaseKind.INI) == 1
    assert plan.span(PhaseKind.SET) == 2      # UE SET message + switch time
    assert plan.pay_ttis == 120 - 105
    ob = [p for p in plan.phases if p.channel_usage is ChannelUse.OUT_OF_BAND]
    assert sum(p.tti_span for p in ob) == 3   # RISC INI (1) + RISC SET (2)
    assert inband_total(plan) == plan.total_ttis


def test_overhead_gap_between_modes_is_small():
    for scheme in (Scheme.OCE, Scheme.BSW, Scheme.BSW_ES):
        params = default_params(scheme)
        catalog = default_catalog(scheme)
        plans = {mode: build_frame(params, mode, 100.0, catalog)
                 for mode in (ControlMode.IB_C, ControlMode.OB_C)}
        gap = abs(overhead_ms(plans[ControlMode.IB_C]) - overhead_ms(plans[ControlMode.OB_C]))
        assert gap <= 2.0


def test_early_stop_alg_span():
    params = default_params(Scheme.BSW_ES)
    catalog = default_catalog(Scheme.BSW_ES)
    plan = build_frame(params, ControlMode.IB_C, 60.0, catalog, stop_index=1)
    assert plan.span(PhaseKind.ALG) == 2
    exhausted = build_frame(params, ControlMode.IB_C, 60.0, catalog)
    assert exhausted.span(PhaseKind.ALG) == 64
    bsw_alg = alg_ttis(default_params(Scheme.BSW))
    assert 2 < bsw_alg    # early stop at the first entry beats the full sweep


def test_early_stop_reservation_can_be_disabled():
    params = default_params(Scheme.BSW_ES, es_reservation=False)
    assert alg_ttis(params, stop_index=5) == 5
    assert alg_ttis(params) == 32


def test_early_stop_span_bounds():
    params = default_params(Scheme.BSW_ES)
    full_sweep = alg_ttis(default_params(Scheme.BSW))
    for k in range(1, 33):
        reserved = k    # one reserved SET slot per evaluation
        assert alg_ttis(params, stop_index=k) <= full_sweep + reserved
    assert alg_ttis(params) == 2 * 32


def test_short_frame_clamps_payload_to_null_rate():
    plan = build_frame(default_params(Scheme.OCE), ControlMode.IB_C, 10.0,
                       default_catalog(Scheme.OCE))
    assert plan.pay_ttis == 0
    assert overhead_ms(plan) == pytest.approx(10.0)
    assert inband_total(plan) == plan.total_ttis
    assert validate_causality(plan) is None


def test_frame_must_be_tti_multiple():
    with pytest.raises(InvalidParameterError):
        build_frame(default_params(Scheme.OCE), ControlMode.IB_C, 10.3,
                    default_catalog(Scheme.OCE))
    with pytest.raises(InvalidParameterError):
        frame_ttis(-5.0)
    assert frame_ttis(4.0) == 8


def test_stop_index_only_for_early_stopping():
    with pytest.raises(InvalidParameterError):
        build_frame(default_params(Scheme.BSW), ControlMode.IB_C, 60.0,
                    default_catalog(Scheme.BSW), stop_index=3)
    with pytest.raises(InvalidParameterError):
        build_frame(default_params(Scheme.BSW_ES), ControlMode.IB_C, 60.0,
                    default_catalog(Scheme.BSW_ES), stop_index=0)


# ---------------------------------------------------------------------------
# Causality
# ---------------------------------------------------------------------------

def test_generated_plans_pass_causality():
    plan = build_frame(default_params(Scheme.OCE), ControlMode.IB_C, 60.0,
                       default_catalog(Scheme.OCE))
    assert validate_causality(plan) is None


def test_payload_before_setup_is_rejected():
    plan = FramePlan(tti_ms=0.5, total_ttis=10, phases=(
        FramePhase(PhaseKind.INI, 1, ChannelUse.IN_BAND),
        FramePhase(PhaseKind.ALG, 3, ChannelUse.IN_BAND),
        FramePhase(PhaseKind.PAY, 4, ChannelUse.IN_BAND),
        FramePhase(PhaseKind.SET, 2, ChannelUse.IN_BAND),
    ))
    violation = validate_causality(plan)
    assert violation is not None
    assert violation.pair == (PhaseKind.PAY, PhaseKind.SET)


def test_setup_before_algorithm_is_rejected():
    plan = FramePlan(tti_ms=0.5, total_ttis=10, phases=(
        FramePhase(PhaseKind.INI, 1, ChannelUse.IN_BAND),
        FramePhase(PhaseKind.SET, 2, ChannelUse.IN_BAND),
        FramePhase(PhaseKind.ALG, 3, ChannelUse.IN_BAND),
        FramePhase(PhaseKind.PAY, 4, ChannelUse.IN_BAND),
    ))
    violation = validate_causality(plan)
    assert violation is not None
    assert violation.pair == (PhaseKind.ALG, PhaseKind.SET)


def test_zero_span_payload_needs_no_setup():
    plan = FramePlan(tti_ms=0.5, total_ttis=4, phases=(
        FramePhase(PhaseKind.PAY, 0, ChannelUse.IN_BAND),
        FramePhase(PhaseKind.INI, 4, ChannelUse.IN_BAND),
    ))
    assert validate_causality(plan) is None


def test_plan_conservation_enforced_at_construction():
    with pytest.raises(InvalidParameterError):
        FramePlan(tti_ms=0.5, total_ttis=10, phases=(
            FramePhase(PhaseKind.PAY, 4, ChannelUse.IN_BAND),
        ))


# ---------------------------------------------------------------------------
# Randomized conservation and ordering properties
# ---------------------------------------------------------------------------

def random_setup(rng):
    scheme = rng.choice([Scheme.OCE, Scheme.BSW, Scheme.BSW_ES])
    params = SchemeParams(
        scheme=scheme,
        n_elements=int(rng.integers(1, 200)),
        bsw_codebook_size=int(rng.integers(1, 64)),
        quant_bits=int(rng.integers(1, 5)),
        proc_ttis=int(rng.integers(0, 5)),
        switch_ttis=int(rng.integers(1, 4)),
    )
    catalog = message_catalog(scheme, params.n_elements, params.quant_bits,
                              params.bsw_codebook_size, int(rng.integers(0, 64)))
    mode = rng.choice([ControlMode.IB_C, ControlMode.OB_C])
    frame_ms = int(rng.integers(1, 300)) * 0.5
    stop = None
    if scheme is Scheme.BSW_ES and rng.random() < 0.5:
        stop = int(rng.integers(1, params.bsw_codebook_size + 1))
    return params, mode, frame_ms, catalog, stop


def test_random_plans_conserve_and_respect_causality():
    rng = np.random.default_rng(42)
    for _ in range(1000):
        params, mode, frame_ms, catalog, stop = random_setup(rng)
        plan = build_frame(params, mode, frame_ms, catalog, stop_index=stop)
        assert inband_total(plan) == plan.total_ttis
        assert validate_causality(plan) is None
        assert plan.pay_ttis >= 0


def test_payload_monotone_in_frame_length():
    params = default_params(Scheme.BSW)
    catalog = default_catalog(Scheme.BSW)
    spans = [build_frame(params, ControlMode.IB_C, f, catalog).pay_ttis
             for f in np.arange(5.0, 100.5, 2.5)]
    assert all(b >= a for a, b in zip(spans, spans[1:]))


def test_out_of_band_payload_never_smaller():
    rng = np.random.default_rng(43)
    for _ in range(200):
        params, _, frame_ms, catalog, stop = random_setup(rng)
        ib = build_frame(params, ControlMode.IB_C, frame_ms, catalog, stop_index=stop)
        ob = build_frame(params, ControlMode.OB_C, frame_ms, catalog, stop_index=stop)
        assert ob.pay_ttis >= ib.pay_ttis


def test_control_spans_split_by_mode():
    catalog = default_catalog(Scheme.OCE)
    ib = control_spans(catalog, ControlMode.IB_C)
    ob = control_spans(catalog, ControlMode.OB_C)
    assert ib.ini_in_band == 2 and ib.set_in_band == 3
    assert ib.ini_out_of_band == 0 and ib.set_out_of_band == 0
    assert ob.ini_in_band == 1 and ob.set_in_band == 1
    assert ob.ini_out_of_band == 1 and ob.set_out_of_band == 2
