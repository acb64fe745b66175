"""Piecewise-linear control paths traversed at constant parameter speed.

A `Path` is an ordered list of waypoints in the (quasimomentum, loss
contrast) plane plus a scalar speed; arc length divided by speed gives the
total traversal time.  Velocity is constant on each segment and jumps at
corners; by convention the velocity reported exactly at an interior corner
is that of the incoming segment, so traversal is deterministic.  The
equation of motion only ever evaluates position and segment velocity, never
a derivative of the velocity, so corners need no smoothing.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property

from .errors import InvalidInput, OutOfRange
from .model import ControlPoint


@dataclass(frozen=True)
class Velocity:
    """Rate of change of the two control parameters."""

    v_q: float
    v_g: float

    @property
    def speed(self) -> float:
        return math.hypot(self.v_q, self.v_g)


@dataclass(frozen=True)
class Segment:
    """One straight piece of a path, with its time window [t0, t0 + duration]."""

    start: ControlPoint
    end: ControlPoint
    velocity: Velocity
    length: float
    duration: float
    t0: float


@dataclass(frozen=True)
class Path:
    """Piecewise-linear route traversed at constant speed.

    Consecutive duplicate waypoints are rejected (zero-length segments);
    revisiting an earlier waypoint, as retracing protocols do, is fine.
    """

    waypoints: tuple[ControlPoint, ...]
    speed: float

    def __init__(self, waypoints, speed: float):
        pts = tuple(
            w if isinstance(w, ControlPoint) else ControlPoint(float(w[0]), float(w[1]))
            for w in waypoints
        )
        if len(pts) < 2:
            raise InvalidInput("a path needs at least two waypoints")
        if not (math.isfinite(speed) and speed > 0):
            raise InvalidInput(f"speed must be positive and finite, got {speed!r}")
        for a, b in zip(pts[:-1], pts[1:]):
            if a.q == b.q and a.g == b.g:
                raise InvalidInput(f"zero-length segment at waypoint {a}")
        object.__setattr__(self, "waypoints", pts)
        object.__setattr__(self, "speed", float(speed))

    @cached_property
    def segments(self) -> tuple[Segment, ...]:
        segs = []
        t0 = 0.0
        for a, b in zip(self.waypoints[:-1], self.waypoints[1:]):
            length = math.hypot(b.q - a.q, b.g - a.g)
            duration = length / self.speed
            vel = Velocity((b.q - a.q) / duration, (b.g - a.g) / duration)
            segs.append(
                Segment(start=a, end=b, velocity=vel, length=length, duration=duration, t0=t0)
            )
            t0 += duration
        return tuple(segs)

    @property
    def total_length(self) -> float:
        return sum(s.length for s in self.segments)

    @property
    def total_time(self) -> float:
        return self.segments[-1].t0 + self.segments[-1].duration

    def position_at(self, t: float) -> tuple[ControlPoint, Velocity]:
        return position_at(self, t)

    def reversed(self) -> "Path":
        return Path(tuple(reversed(self.waypoints)), self.speed)

    def to_config(self) -> dict:
        return {
            "kind": "waypoints",
            "points": [[w.q, w.g] for w in self.waypoints],
        }


def position_at(path: Path, t: float) -> tuple[ControlPoint, Velocity]:
    """Point and velocity at time ``t`` along the path.

    At interior corners the incoming segment's velocity is reported;
    immediately after a corner the outgoing one takes over.
    """
    T = path.total_time
    if not (0.0 <= t <= T):
        # Tolerate float noise from t = total_length / speed round trips.
        if 0.0 - 1e-9 * max(1.0, T) <= t <= T * (1.0 + 1e-12) + 1e-300:
            t = min(max(t, 0.0), T)
        else:
            raise OutOfRange(f"t = {t!r} outside [0, {T!r}]")
    segs = path.segments
    if t == 0.0:
        seg = segs[0]
    else:
        seg = segs[-1]
        for s in segs:
            if t <= s.t0 + s.duration:
                seg = s
                break
    dt = t - seg.t0
    if dt >= seg.duration:
        # Exactly at the segment end: return the waypoint, free of rounding.
        return seg.end, seg.velocity
    point = ControlPoint(seg.start.q + seg.velocity.v_q * dt, seg.start.g + seg.velocity.v_g * dt)
    return point, seg.velocity


def reverse(path: Path) -> Path:
    """Same geometric path traversed in the opposite direction."""
    return path.reversed()


def _dedup(points: list[tuple[float, float]]) -> list[tuple[float, float]]:
    out = [points[0]]
    for p in points[1:]:
        if p != out[-1]:
            out.append(p)
    return out


def standard_path(
    kind: str,
    direction: str = "negative",
    speed: float = 1.0,
    *,
    h: float = 1.2,
    x_m: float = -1.0,
    origin: ControlPoint | tuple[float, float] | None = None,
    angle: float | None = None,
    max_len: float | None = None,
) -> Path:
    """Construct one of the standard protocol paths.

    ``hermitian``: sweep along the lossless axis, (1,0) -> (-1,0) for the
    negative direction, reversed for positive.

    ``loop``: raise the loss contrast to ``h``, sweep the quasimomentum
    across, lower the contrast back to zero.  CCW starts at (1,0); CW is the
    reversed traversal.

    ``spike``: sweep to ``x_m`` on the lossless axis, raise the contrast to
    ``h`` and straight back down, then finish the sweep.  The same waypoint
    list reversed gives the CW traversal, so one geometric path serves both
    directions.  ``x_m = -1`` collapses the trailing sweep segment.

    ``ray``: straight line of length ``max_len`` from ``origin`` in the
    direction ``angle``.
    """
    kind = kind.lower()
    direction = direction.lower()
    if kind == "hermitian":
        if direction not in ("negative", "positive"):
            raise InvalidInput(f"hermitian direction must be negative/positive, got {direction!r}")
        pts = [(1.0, 0.0), (-1.0, 0.0)]
        if direction == "positive":
            pts.reverse()
    elif kind == "loop":
        if direction not in ("ccw", "cw"):
            raise InvalidInput(f"loop direction must be ccw/cw, got {direction!r}")
        if not h > 0:
            raise InvalidInput(f"loop height must be positive, got {h!r}")
        pts = [(1.0, 0.0), (1.0, h), (-1.0, h), (-1.0, 0.0)]
        if direction == "cw":
            pts.reverse()
    elif kind == "spike":
        if direction not in ("ccw", "cw"):
            raise InvalidInput(f"spike direction must be ccw/cw, got {direction!r}")
        if not (-1.0 <= x_m < 0.0):
            raise InvalidInput(f"spike position x_m must lie in [-1, 0), got {x_m!r}")
        if not h > 0:
            raise InvalidInput(f"spike height must be positive, got {h!r}")
        pts = _dedup([(1.0, 0.0), (x_m, 0.0), (x_m, h), (x_m, 0.0), (-1.0, 0.0)])
        if direction == "cw":
            pts.reverse()
    elif kind == "ray":
        if origin is None or angle is None or max_len is None:
            raise InvalidInput("ray needs origin, angle and max_len")
        if not max_len > 0:
            raise InvalidInput(f"ray length must be positive, got {max_len!r}")
        o = origin if isinstance(origin, ControlPoint) else ControlPoint(*origin)
        pts = [(o.q, o.g), (o.q + max_len * math.cos(angle), o.g + max_len * math.sin(angle))]
    else:
        raise InvalidInput(f"unknown path kind {kind!r}")
    return Path(pts, speed)


def path_from_config(spec: dict, speed: float) -> Path:
    """Build a path from its serialized form (a protocol spec or raw waypoints)."""
    kind = spec.get("kind")
    if kind == "waypoints":
        return Path(spec["points"], speed)
    kwargs = {}
    for key in ("h", "x_m", "angle", "max_len"):
        if key in spec:
            kwargs[key] = spec[key]
    if "origin" in spec:
        kwargs["origin"] = tuple(spec["origin"])
    return standard_path(kind, spec.get("direction", "negative"), speed, **kwargs)
