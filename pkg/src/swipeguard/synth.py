"""Seeded synthetic swipe populations: genuine users with one or more
behaviours, blind attackers drawn independently, and over-the-shoulder
attackers interpolated toward the victim by a fidelity knob."""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .traces import RawTrace, TouchPoint

DEVICE_WIDTH = 1080
DEVICE_HEIGHT = 1920
MIN_SWIPE_DX = 0.2  # horizontal prompt constraint, normalized units

# qualitative reading of observed per-user behaviour multiplicity
BEHAVIOUR_COUNT_WEIGHTS = {1: 0.35, 2: 0.4, 3: 0.15, 4: 0.1}


@dataclass(frozen=True)
class BehaviourSpec:
    start: tuple[float, float]
    end: tuple[float, float]
    curvature: float
    duration_mean_ms: float
    duration_std_ms: float
    speed_profile: str  # constant | bell
    jitter_std: float
    size_mean: float
    size_std: float

    def __post_init__(self):
        if self.start == self.end:
            raise ValueError("degenerate behaviour: start equals end")
        if self.duration_mean_ms <= 0:
            raise ValueError("duration mean must be positive")
        if self.jitter_std < 0:
            raise ValueError("jitter std must be non-negative")


@dataclass(frozen=True)
class UserSpec:
    behaviours: tuple[BehaviourSpec, ...]
    weights: tuple[float, ...]

    def __post_init__(self):
        if not self.behaviours:
            raise ValueError("user needs at least one behaviour")
        if len(self.weights) != len(self.behaviours):
            raise ValueError("weights and behaviours must align")
        if abs(sum(self.weights) - 1.0) > 1e-9:
            raise ValueError("weights must sum to 1")


def user_seed(population_seed: int, user_index: int) -> np.random.Generator:
    """Independent per-user stream derived from the population seed."""
    return np.random.default_rng(np.random.SeedSequence((population_seed, user_index)))


def random_behaviour(rng: np.random.Generator) -> BehaviourSpec:
    """A horizontally prompted swipe behaviour with randomized geometry."""
    direction = 1 if rng.random() < 0.5 else -1
    dx = rng.uniform(0.3, 0.7)
    x0 = rng.uniform(0.08, 0.92 - dx)
    if direction < 0:
        x0, x1 = x0 + dx, x0
    else:
        x1 = x0 + dx
    y0 = rng.uniform(0.25, 0.75)
    y1 = y0 + rng.uniform(-0.15, 0.15)
    return BehaviourSpec(
        start=(x0, y0),
        end=(x1, min(max(y1, 0.05), 0.95)),
        curvature=rng.normal(0.0, 0.08),
        duration_mean_ms=rng.uniform(250.0, 700.0),
        duration_std_ms=rng.uniform(10.0, 60.0),
        speed_profile="bell" if rng.random() < 0.5 else "constant",
        jitter_std=rng.uniform(0.004, 0.012),
        size_mean=rng.uniform(0.2, 0.6),
        size_std=rng.uniform(0.01, 0.04),
    )


def random_user(rng: np.random.Generator) -> UserSpec:
    counts = sorted(BEHAVIOUR_COUNT_WEIGHTS)
    probs = np.array([BEHAVIOUR_COUNT_WEIGHTS[c] for c in counts])
    n = int(rng.choice(counts, p=probs / probs.sum()))
    behaviours = tuple(random_behaviour(rng) for _ in range(n))
    raw = rng.uniform(0.5, 1.5, size=n)
    weights = tuple(float(w) for w in raw / raw.sum())
    return UserSpec(behaviours=behaviours, weights=weights)


def _path_point(spec: BehaviourSpec, s: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    sx, sy = spec.start
    ex, ey = spec.end
    dx, dy = ex - sx, ey - sy
    norm = float(np.hypot(dx, dy))
    nx, ny = -dy / norm, dx / norm
    bump = spec.curvature * s * (1.0 - s)
    return sx + s * dx + bump * nx, sy + s * dy + bump * ny


def _progress(profile: str, u: np.ndarray) -> np.ndarray:
    if profile == "bell":
        # speed ~ 1 - cos(2 pi u): slow start and finish
        return u - np.sin(2.0 * np.pi * u) / (2.0 * np.pi)
    return u


def synth_trace(
    spec: BehaviourSpec,
    rng: np.random.Generator,
    profile_id: str,
    role: str,
    attempt_index: int,
    rate: float,
) -> RawTrace:
    """One jittered swipe following the behaviour; retries the jitter draw
    when it breaks the horizontal prompt constraint."""
    duration = max(float(rng.normal(spec.duration_mean_ms, spec.duration_std_ms)), 80.0)
    n_points = max(int(round(duration * rate / 1000.0)) + 1, 8)
    t = np.linspace(0.0, duration, n_points)
    u = t / duration
    s = _progress(spec.speed_profile, u)

    for _ in range(10):
        x, y = _path_point(spec, s)
        x = np.clip(x + rng.normal(0.0, spec.jitter_std, n_points), 0.0, 1.0)
        y = np.clip(y + rng.normal(0.0, spec.jitter_std, n_points), 0.0, 1.0)
        if abs(x[-1] - x[0]) >= MIN_SWIPE_DX:
            break
    size = np.clip(rng.normal(spec.size_mean, spec.size_std, n_points), 0.0, 1.0)

    points = [
        TouchPoint(
            t_ms=round(float(ti), 3),
            x_px=round(float(xi) * DEVICE_WIDTH, 3),
            y_px=round(float(yi) * DEVICE_HEIGHT, 3),
            size=round(float(si), 5),
        )
        for ti, xi, yi, si in zip(t, x, y, size)
    ]
    return RawTrace(
        profile_id=profile_id,
        role=role,
        attempt_index=attempt_index,
        device_width=DEVICE_WIDTH,
        device_height=DEVICE_HEIGHT,
        sample_rate_hz=round(rate, 1),
        points=points,
    ).validate()


def gen_user(
    spec: UserSpec,
    n_swipes: int,
    rng: np.random.Generator,
    profile_id: str,
    role: str = "victim",
    start_index: int = 0,
) -> list[RawTrace]:
    # the touch sample rate is a device property, fixed per stream
    rate = float(rng.uniform(60.0, 200.0))
    traces = []
    for i in range(n_swipes):
        which = int(rng.choice(len(spec.behaviours), p=spec.weights))
        traces.append(
            synth_trace(spec.behaviours[which], rng, profile_id, role, start_index + i, rate)
        )
    return traces


def gen_blind_attacker(
    rng: np.random.Generator, profile_id: str, n_swipes: int
) -> list[RawTrace]:
    """Attacker with no victim knowledge: an independent random single
    behaviour honoring only the horizontal prompt."""
    spec = UserSpec(behaviours=(random_behaviour(rng),), weights=(1.0,))
    return gen_user(spec, n_swipes, rng, profile_id, role="blind_attacker")


def interpolate_spec(
    victim: UserSpec, fidelity: float, rng: np.random.Generator
) -> UserSpec:
    """Blend the victim's behaviours toward an independent random spec by
    (1 - fidelity) and inflate jitter by (2 - fidelity)."""
    if not 0.0 <= fidelity <= 1.0:
        raise ValueError("fidelity must lie in [0, 1]")
    blended = []
    for behaviour in victim.behaviours:
        other = random_behaviour(rng)

        def lerp(a, b):
            return fidelity * a + (1.0 - fidelity) * b

        # blend horizontal extent and leftmost point rather than raw
        # endpoints: both sources have extent >= 0.3, so the mix can never
        # collapse below the prompt's minimum swipe length even when the
        # two behaviours run in opposite directions
        v_left, v_dx = min(behaviour.start[0], behaviour.end[0]), abs(
            behaviour.end[0] - behaviour.start[0]
        )
        o_left, o_dx = min(other.start[0], other.end[0]), abs(
            other.end[0] - other.start[0]
        )
        rightward = (
            behaviour.end[0] > behaviour.start[0]
            if fidelity >= 0.5
            else other.end[0] > other.start[0]
        )
        left, dx = lerp(v_left, o_left), lerp(v_dx, o_dx)
        x0, x1 = (left, left + dx) if rightward else (left + dx, left)

        blended.append(
            BehaviourSpec(
                start=(x0, lerp(behaviour.start[1], other.start[1])),
                end=(x1, lerp(behaviour.end[1], other.end[1])),
                curvature=lerp(behaviour.curvature, other.curvature),
                duration_mean_ms=lerp(behaviour.duration_mean_ms, other.duration_mean_ms),
                duration_std_ms=lerp(behaviour.duration_std_ms, other.duration_std_ms),
                speed_profile=behaviour.speed_profile if fidelity >= 0.5 else other.speed_profile,
                jitter_std=lerp(behaviour.jitter_std, other.jitter_std) * (2.0 - fidelity),
                size_mean=lerp(behaviour.size_mean, other.size_mean),
                size_std=lerp(behaviour.size_std, other.size_std),
            )
        )
    return UserSpec(behaviours=tuple(blended), weights=victim.weights)


def gen_ots_attacker(
    victim_spec: UserSpec,
    fidelity: float,
    rng: np.random.Generator,
    profile_id: str,
    n_swipes: int,
) -> list[RawTrace]:
    spec = interpolate_spec(victim_spec, fidelity, rng)
    return gen_user(spec, n_swipes, rng, profile_id, role="ots_attacker")


@dataclass(frozen=True)
class PopulationConfig:
    n_users: int = 20
    n_genuine: int = 40
    n_attacker: int = 20
    ots_fidelity: float = 0.9
    seed: int = 0
    multi_behaviour: bool = True
    uniform_jitter_std: float | None = None  # force one noise scale population-wide


def _apply_overrides(spec: UserSpec, config: PopulationConfig) -> UserSpec:
    if config.uniform_jitter_std is None:
        return spec
    behaviours = tuple(
        replace(b, jitter_std=config.uniform_jitter_std) for b in spec.behaviours
    )
    return UserSpec(behaviours=behaviours, weights=spec.weights)


def gen_population(config: PopulationConfig) -> list[RawTrace]:
    """Full experiment-shaped dataset: per user, genuine swipes plus one
    blind and one OTS attacker phase aimed at them."""
    traces: list[RawTrace] = []
    for idx in range(config.n_users):
        rng = user_seed(config.seed, idx)
        pid = f"user{idx:03d}"
        if config.multi_behaviour:
            spec = random_user(rng)
        else:
            spec = UserSpec(behaviours=(random_behaviour(rng),), weights=(1.0,))
        spec = _apply_overrides(spec, config)
        traces.extend(gen_user(spec, config.n_genuine, rng, pid, role="victim"))
        traces.extend(gen_blind_attacker(rng, pid, config.n_attacker))
        traces.extend(
            gen_ots_attacker(spec, config.ots_fidelity, rng, pid, config.n_attacker)
        )
    return traces
