"""TTI-granular frame timelines for the three control schemes.

A frame is INI -> ALG -> SET -> PAY. The INI and SET phases carry the
control messages, the ALG phase holds the pilot sweep plus processing, and
whatever time is left goes to PAY. Out-of-band control messages overlap the
in-band timeline and cost no frame TTIs; the surface reconfiguration time
always elapses on the frame timeline regardless of control mode.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import NamedTuple, Optional

from .control import ControlMessage, ControlMode, MsgPhase, Recipient, Scheme
from .errors import InvalidParameterError

TTI_MS = 0.5


class PhaseKind(Enum):
    INI = "ini"
    ALG = "alg"
    SET = "set"
    PAY = "pay"


class ChannelUse(Enum):
    IN_BAND = "in_band"
    OUT_OF_BAND = "out_of_band"
    NONE = "none"    # elapsing frame time with no transmission (processing, reconfiguration)


@dataclass(frozen=True)
class FramePhase:
    kind: PhaseKind
    tti_span: int
    channel_usage: ChannelUse

    def __post_init__(self):
        if self.tti_span < 0:
            raise InvalidParameterError("tti_span must be >= 0")


@dataclass(frozen=True)
class FramePlan:
    """Ordered timeline of one frame.

    Every span except OUT_OF_BAND ones elapses on the frame timeline, so
    those spans must sum to total_ttis. Phase ordering is checked separately
    by validate_causality so that hand-built invalid plans can be expressed.
    """

    tti_ms: float
    phases: tuple[FramePhase, ...]
    total_ttis: int

    def __post_init__(self):
        if not self.tti_ms > 0:
            raise InvalidParameterError("tti_ms must be > 0")
        phases = tuple(self.phases)
        object.__setattr__(self, "phases", phases)
        inband = sum(p.tti_span for p in phases
                     if p.channel_usage is not ChannelUse.OUT_OF_BAND)
        if inband != self.total_ttis:
            raise InvalidParameterError(
                f"in-band spans sum to {inband}, expected total_ttis={self.total_ttis}"
            )

    def span(self, kind: PhaseKind) -> int:
        """Total in-band TTIs of one phase kind."""
        return sum(p.tti_span for p in self.phases
                   if p.kind is kind and p.channel_usage is not ChannelUse.OUT_OF_BAND)

    @property
    def pay_ttis(self) -> int:
        return self.span(PhaseKind.PAY)

    @property
    def frame_ms(self) -> float:
        return self.total_ttis * self.tti_ms


@dataclass(frozen=True)
class SchemeParams:
    scheme: Scheme
    n_elements: int = 100
    bsw_codebook_size: int = 32
    quant_bits: int = 2
    target_snr: float = 10.0       # linear; beam-sweeping qualification threshold
    proc_ttis: int = 2             # ALG processing time
    switch_ttis: int = 1           # surface configuration load time
    es_reservation: bool = True    # reserve a SET slot after each sweep evaluation

    def __post_init__(self):
        if self.n_elements < 1 or self.bsw_codebook_size < 1 or self.quant_bits < 1:
            raise InvalidParameterError("counts must be >= 1")
        if self.proc_ttis < 0:
            raise InvalidParameterError("proc_ttis must be >= 0")
        if self.switch_ttis < 1:
            raise InvalidParameterError("switch_ttis must be >= 1")
        if not self.target_snr > 0:
            raise InvalidParameterError("target_snr must be > 0")


@dataclass(frozen=True)
class CausalityViolation:
    """Names the phase pair whose ordering breaks the causality constraint."""

    pair: tuple[PhaseKind, PhaseKind]
    detail: str


class ControlSpans(NamedTuple):
    ini_in_band: int
    ini_out_of_band: int
    set_in_band: int
    set_out_of_band: int


def control_spans(catalog: list[ControlMessage], mode: ControlMode) -> ControlSpans:
    """In-band and out-of-band TTI costs of the catalog's INI and SET messages."""
    spans = {(MsgPhase.INI, True): 0, (MsgPhase.INI, False): 0,
             (MsgPhase.SET, True): 0, (MsgPhase.SET, False): 0}
    for msg in catalog:
        off_band = msg.recipient is Recipient.RISC and mode is ControlMode.OB_C
        spans[(msg.phase, not off_band)] += msg.tti_cost
    return ControlSpans(
        ini_in_band=spans[(MsgPhase.INI, True)],
        ini_out_of_band=spans[(MsgPhase.INI, False)],
        set_in_band=spans[(MsgPhase.SET, True)],
        set_out_of_band=spans[(MsgPhase.SET, False)],
    )


def alg_ttis(params: SchemeParams, stop_index: Optional[int] = None) -> int:
    """In-band ALG span of a scheme.

    OCE sweeps one pilot TTI per element, beam sweeping one per codebook
    entry, both followed by the processing time. Early stopping spends one
    pilot plus one reserved SET opportunity per evaluated entry and ends at
    stop_index (None means the sweep was exhausted).
    """
    if params.scheme is Scheme.OCE:
        return params.n_elements + params.proc_ttis
    if params.scheme is Scheme.BSW:
        return params.bsw_codebook_size + params.proc_ttis
    evals = params.bsw_codebook_size if stop_index is None else stop_index
    per_eval = 2 if params.es_reservation else 1
    return per_eval * evals


def frame_ttis(frame_ms: float, tti_ms: float = TTI_MS) -> int:
    """Frame length in TTIs; rejects durations that are not TTI multiples."""
    if not frame_ms > 0:
        raise InvalidParameterError("frame_ms must be > 0")
    ratio = frame_ms / tti_ms
    total = round(ratio)
    if abs(ratio - total) > 1e-9 or total < 1:
        raise InvalidParameterError(
            f"frame_ms={frame_ms} is not a positive multiple of tti_ms={tti_ms}"
        )
    return total


def build_frame(
    params: SchemeParams,
    mode: ControlMode,
    frame_ms: float,
    catalog: list[ControlMessage],
    stop_index: Optional[int] = None,
    tti_ms: float = TTI_MS,
) -> FramePlan:
    """Assemble the INI/ALG/SET/PAY timeline of one frame.

    When the control phases do not fit, they are truncated at the frame
    boundary and PAY gets span 0 (the null-rate condition).
    """
    if stop_index is not None:
        if params.scheme is not Scheme.BSW_ES:
            raise InvalidParameterError("stop_index is only meaningful for BSW_ES")
        if not 1 <= stop_index <= params.bsw_codebook_size:
            raise InvalidParameterError("stop_index must be in [1, bsw_codebook_size]")
    total = frame_ttis(frame_ms, tti_ms)
    spans = control_spans(catalog, mode)
    alg = alg_ttis(params, stop_index)

    timeline: list[FramePhase] = []
    budget = total

    def push(kind: PhaseKind, span: int, usage: ChannelUse):
        nonlocal budget
        if usage is ChannelUse.OUT_OF_BAND:
            if span > 0:
                timeline.append(FramePhase(kind, span, usage))
            return
        take = min(span, budget)
        budget -= take
        if take > 0:
            timeline.append(FramePhase(kind, take, usage))

    push(PhaseKind.INI, spans.ini_in_band, ChannelUse.IN_BAND)
    push(PhaseKind.INI, spans.ini_out_of_band, ChannelUse.OUT_OF_BAND)
    if params.scheme is Scheme.BSW_ES:
        push(PhaseKind.ALG, alg, ChannelUse.IN_BAND)
    else:
        push(PhaseKind.ALG, alg - params.proc_ttis, ChannelUse.IN_BAND)
        push(PhaseKind.ALG, params.proc_ttis, ChannelUse.NONE)
    push(PhaseKind.SET, spans.set_in_band, ChannelUse.IN_BAND)
    push(PhaseKind.SET, spans.set_out_of_band, ChannelUse.OUT_OF_BAND)
    push(PhaseKind.SET, params.switch_ttis, ChannelUse.NONE)
    timeline.append(FramePhase(PhaseKind.PAY, budget, ChannelUse.IN_BAND))

    return FramePlan(tti_ms=tti_ms, phases=tuple(timeline), total_ttis=total)


def overhead_ttis(
    params: SchemeParams,
    mode: ControlMode,
    catalog: list[ControlMessage],
    stop_index: Optional[int] = None,
) -> int:
    """Frame TTIs consumed before PAY can start (unclamped)."""
    spans = control_spans(catalog, mode)
    return (spans.ini_in_band + alg_ttis(params, stop_index)
            + spans.set_in_band + params.switch_ttis)


def validate_causality(plan: FramePlan) -> Optional[CausalityViolation]:
    """Check that configurations are computed and signaled before use.

    Returns None when the plan is causally valid, otherwise a violation
    naming the offending phase pair: (ALG, SET) when configuration signaling
    precedes the algorithmic phase that computes it, (PAY, SET) when a
    configuration-consuming payload phase precedes its setup signaling.
    """
    seen_set = False
    for ph in plan.phases:
        if ph.kind is PhaseKind.SET:
            seen_set = True
        elif ph.kind is PhaseKind.ALG and seen_set:
            return CausalityViolation(
                pair=(PhaseKind.ALG, PhaseKind.SET),
                detail="SET signaling scheduled before the ALG phase computing its content",
            )
    seen_set = False
    for ph in plan.phases:
        if ph.kind is PhaseKind.SET:
            seen_set = True
        elif ph.kind is PhaseKind.PAY and ph.tti_span > 0 and not seen_set:
            return CausalityViolation(
                pair=(PhaseKind.PAY, PhaseKind.SET),
                detail="payload phase scheduled before the SET phase loading its configuration",
            )
    return None


def overhead_ms(plan: FramePlan) -> float:
    """Frame time not spent on payload."""
    return (plan.total_ttis - plan.pay_ttis) * plan.tti_ms
