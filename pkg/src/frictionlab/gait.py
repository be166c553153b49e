"""Trot-gait rewards for a hexapod over ground-contact states.

Legs are ordered FL, FR, ML, MR, RL, RR. The two tripods
{FL, MR, RL} and {FR, ML, RR} are the contact groups of the trot: the
instantaneous reward pays 1 only when the set of feet on the ground equals
exactly one group (partial or mixed contact, and all-six pronking, pay 0),
and the unsync penalty measures how unevenly the two groups have touched
the ground over a trailing window.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Iterable, Sequence

from frictionlab.errors import InvalidInputError

LEG_ORDER = ("FL", "FR", "ML", "MR", "RL", "RR")

GROUP0 = frozenset({"FL", "MR", "RL"})
GROUP1 = frozenset({"FR", "ML", "RR"})

CONTACT_CSV_HEADER = "t," + ",".join(LEG_ORDER)


@dataclass(frozen=True)
class ContactFrame:
    """Ground-contact flags of the six legs at one timestep."""

    fl: bool
    fr: bool
    ml: bool
    mr: bool
    rl: bool
    rr: bool

    @classmethod
    def from_flags(cls, flags: Iterable) -> "ContactFrame":
        flags = tuple(bool(v) for v in flags)
        if len(flags) != 6:
            raise InvalidInputError(f"expected 6 contact flags, got {len(flags)}")
        return cls(*flags)

    @classmethod
    def from_contacts(cls, legs: Iterable[str]) -> "ContactFrame":
        legs = set(legs)
        unknown = legs - set(LEG_ORDER)
        if unknown:
            raise InvalidInputError(f"unknown legs {sorted(unknown)}")
        return cls.from_flags(leg in legs for leg in LEG_ORDER)

    def contact_set(self) -> frozenset:
        return frozenset(leg for leg, on in zip(LEG_ORDER, (
            self.fl, self.fr, self.ml, self.mr, self.rl, self.rr)) if on)


def r_trot(frame: ContactFrame) -> int:
    """1 iff exactly one contact group (and nothing else) is on the ground."""
    contacts = frame.contact_set()
    return 1 if (contacts == GROUP0 or contacts == GROUP1) else 0


def r_unsync(history: Sequence[ContactFrame], horizon: int) -> int:
    """|sum of group-0 contacts - sum of group-1 contacts| over the last
    ``horizon`` frames; 0 for a perfectly alternating trot, 3*horizon for
    three-legged hopping on a single tripod."""
    if horizon < 1:
        raise InvalidInputError(f"horizon must be >= 1, got {horizon}")
    if len(history) < horizon:
        raise InvalidInputError(
            f"history has {len(history)} frames, need at least {horizon}")
    total0 = 0
    total1 = 0
    for frame in history[len(history) - horizon:]:
        contacts = frame.contact_set()
        total0 += len(GROUP0 & contacts)
        total1 += len(GROUP1 & contacts)
    return abs(total0 - total1)


def read_contact_csv(path) -> list[ContactFrame]:
    """Parse a `t,FL,FR,ML,MR,RL,RR` log with 0/1 contact flags."""
    frames = []
    with open(path, "r", encoding="ascii") as f:
        header = f.readline().strip()
        if header != CONTACT_CSV_HEADER:
            raise InvalidInputError(
                f"bad contact header {header!r}, expected {CONTACT_CSV_HEADER!r}")
        for lineno, line in enumerate(f, start=2):
            line = line.strip()
            if not line:
                continue
            parts = line.split(",")
            if len(parts) != 7:
                raise InvalidInputError(f"line {lineno}: expected 7 fields")
            flags = []
            for p in parts[1:]:
                if p not in ("0", "1"):
                    raise InvalidInputError(f"line {lineno}: contact flags must be 0 or 1")
                flags.append(p == "1")
            frames.append(ContactFrame.from_flags(flags))
    if not frames:
        raise InvalidInputError("contact CSV has no data rows")
    return frames


def write_contact_csv(path, frames: Sequence[ContactFrame], dt: float = 1.0) -> None:
    with open(path, "w", encoding="ascii", newline="\n") as f:
        f.write(CONTACT_CSV_HEADER + "\n")
        for i, frame in enumerate(frames):
            flags = (frame.fl, frame.fr, frame.ml, frame.mr, frame.rl, frame.rr)
            f.write(repr(float(i * dt)) + "," + ",".join(str(int(v)) for v in flags) + "\n")


def reward_series(frames: Sequence[ContactFrame], horizon: int = 10) -> dict:
    """Per-frame rewards as a JSON-ready report.

    ``r_unsync`` needs a full trailing window, so its first ``horizon - 1``
    entries are null.
    """
    trot = [r_trot(f) for f in frames]
    unsync = [None] * min(horizon - 1, len(frames))
    for i in range(horizon - 1, len(frames)):
        unsync.append(r_unsync(frames[:i + 1], horizon))
    return {"horizon": horizon, "r_trot": trot, "r_unsync": unsync}


def reward_series_to_json(path, report: dict) -> None:
    with open(path, "w", encoding="ascii") as f:
        json.dump(report, f, sort_keys=True)
        f.write("\n")
