"""Access categories, EDCA/PHY parameters, frames and per-AC queues."""

from __future__ import annotations

import enum
from collections import deque
from dataclasses import dataclass, field

from .engine import US


class AccessCategory(enum.IntEnum):
    """Lower value means higher priority."""

    AC_VO = 0
    AC_VI = 1
    AC_BE = 2
    AC_BK = 3

    @property
    def label(self) -> str:
        return self.name


# 802.11e user priority -> AC
UP_TO_AC = {
    7: AccessCategory.AC_VO, 6: AccessCategory.AC_VO,
    5: AccessCategory.AC_VI, 4: AccessCategory.AC_VI,
    3: AccessCategory.AC_BE, 0: AccessCategory.AC_BE,
    2: AccessCategory.AC_BK, 1: AccessCategory.AC_BK,
}

MAX_TX_FRAME_BYTES = 3839
MAX_RX_FRAME_BYTES = 8191
BUFFER_BITS = 256_000


class ConfigError(ValueError):
    """Invalid scenario or parameter configuration."""


@dataclass(frozen=True)
class EdcaParams:
    cw_min: int
    cw_max: int
    aifsn: int

    def __post_init__(self) -> None:
        if not 0 <= self.cw_min <= self.cw_max:
            raise ConfigError(f"need 0 <= cw_min <= cw_max, got {self.cw_min}, {self.cw_max}")
        if self.aifsn < 2:
            raise ConfigError(f"AIFSN must be >= 2, got {self.aifsn}")


def edca_params_for(ac: AccessCategory, phy_cw_min: int, phy_cw_max: int) -> EdcaParams:
    p, big = phy_cw_min, phy_cw_max
    if p > big:
        raise ConfigError("phy_cw_min must not exceed phy_cw_max")
    if (p + 1) % 4:
        raise ConfigError(f"phy_cw_min + 1 must be divisible by 4, got phy_cw_min={p}")
    if ac is AccessCategory.AC_VO:
        return EdcaParams((p + 1) // 4 - 1, (p + 1) // 2 - 1, 2)
    if ac is AccessCategory.AC_VI:
        return EdcaParams((p + 1) // 2 - 1, p, 2)
    if ac is AccessCategory.AC_BE:
        return EdcaParams(p, big, 3)
    return EdcaParams(p, big, 7)


@dataclass(frozen=True)
class PhyParams:
    slot_time: int = 9 * US
    sifs: int = 16 * US
    phy_cw_min: int = 15
    phy_cw_max: int = 1023
    data_rate: int = 26_000_000
    control_rate: int = 6_000_000
    phy_overhead: int = 40 * US
    ack_bits: int = 112
    max_retries: int = 7

    DATA_RATES = (26_000_000, 240_000_000)

    def __post_init__(self) -> None:
        for name in ("slot_time", "sifs", "data_rate", "control_rate", "phy_overhead", "ack_bits"):
            if getattr(self, name) <= 0:
                raise ConfigError(f"{name} must be positive")
        if self.max_retries < 0:
            raise ConfigError("max_retries must be >= 0")
        if self.phy_cw_min > self.phy_cw_max or (self.phy_cw_min + 1) % 4:
            raise ConfigError("phy_cw_min must be <= phy_cw_max with phy_cw_min + 1 divisible by 4")

    def edca(self, ac: AccessCategory) -> EdcaParams:
        return edca_params_for(ac, self.phy_cw_min, self.phy_cw_max)

    def data_airtime(self, payload_bits: int) -> int:
        return self.phy_overhead + -(-payload_bits * 1_000_000_000 // self.data_rate)

    def ack_airtime(self) -> int:
        return self.phy_overhead + -(-self.ack_bits * 1_000_000_000 // self.control_rate)

    def ack_timeout(self) -> int:
        return self.sifs + self.ack_airtime() + self.slot_time


def aifs(ac: AccessCategory, phy: PhyParams) -> int:
    return phy.sifs + phy.edca(ac).aifsn * phy.slot_time


class EnqueueResult(enum.Enum):
    ACCEPTED = "Accepted"
    DROPPED_OVERFLOW = "DroppedOverflow"
    REJECTED_OVERSIZE = "RejectedOversize"


@dataclass(slots=True, eq=False)
class Frame:
    id: int
    src: int
    dst: int
    ac: AccessCategory
    payload_bits: int
    created_at: int
    enqueued_at: int = -1
    first_phy_tx_at: int | None = None
    delivered_at: int | None = None
    retry_count: int = 0
    # end-to-end addressing; differs from (src, dst) on relayed hops
    origin: int = -1
    final_dst: int = -1
    flow: int = -1
    msg: int = -1
    hop: int = 0

    def __post_init__(self) -> None:
        if self.origin < 0:
            self.origin = self.src
        if self.final_dst < 0:
            self.final_dst = self.dst

    def next_hop(self, frame_id: int, src: int, dst: int) -> "Frame":
        """Copy for relaying; the creation time carries over."""
        return Frame(frame_id, src, dst, self.ac, self.payload_bits, self.created_at,
                     origin=self.origin, final_dst=self.final_dst, flow=self.flow,
                     msg=self.msg, hop=self.hop + 1)


@dataclass
class TxQueue:
    ac: AccessCategory
    capacity_bits: int = BUFFER_BITS
    frames: deque = field(default_factory=deque)
    occupied_bits: int = 0

    def __len__(self) -> int:
        return len(self.frames)

    def offer(self, f: Frame, now: int) -> EnqueueResult:
        if f.payload_bits > MAX_TX_FRAME_BYTES * 8:
            return EnqueueResult.REJECTED_OVERSIZE
        if self.occupied_bits + f.payload_bits > self.capacity_bits:
            return EnqueueResult.DROPPED_OVERFLOW
        f.enqueued_at = now
        self.frames.append(f)
        self.occupied_bits += f.payload_bits
        return EnqueueResult.ACCEPTED

    def head(self) -> Frame | None:
        return self.frames[0] if self.frames else None

    def pop(self) -> Frame:
        f = self.frames.popleft()
        self.occupied_bits -= f.payload_bits
        return f
