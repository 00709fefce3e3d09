"""Alarm-epicenter simulation of spatially correlated device activation.

Devices live in a disk of radius R = sqrt(N / (density * pi)).  At every
time step exactly one alarm fires at an epicenter drawn uniformly from the
same disk, and each device then activates independently with probability
exp(-d / decay_length), d being its distance to the epicenter.  (If the
process had idle steps they would only rescale the joint activation matrix
uniformly, so they are not modeled.)

Round t of a run with seed s consumes exactly ``N + 2`` uniforms -- radius
and angle of the epicenter, then one coin per device -- read from the
counter blocks ``[t*B, (t+1)*B)`` of ``Philox(key=[s, DOMAIN_ALARMS])``
with ``B = ceil((N+2)/4)``.  Estimates are therefore bit-identical however
the steps are chunked or parallelized; `round_stream` exposes the stream
of a single round.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from corrsched import _rng
from corrsched.model import JointActivationMatrix, ValidationError

#: uniforms drawn per alarm round, beyond the per-device coins
_ROUND_HEADER = 2

#: target number of doubles materialized per vectorized chunk
_CHUNK_BUDGET = 1 << 21


@dataclass(frozen=True)
class DeviceLayout:
    """Device positions (meters) in the deployment disk centered at 0."""

    positions: np.ndarray
    region_radius: float
    density: float

    def __post_init__(self):
        arr = np.array(self.positions, dtype=float)
        if arr.ndim != 2 or arr.shape[1] != 2:
            raise ValidationError(f"positions must be (N, 2), got {arr.shape}")
        r = np.sqrt(arr[:, 0] ** 2 + arr[:, 1] ** 2)
        if r.size and r.max() > self.region_radius * (1.0 + 1e-9):
            raise ValidationError(
                f"device {int(np.argmax(r))} lies outside the deployment disk"
            )
        arr.setflags(write=False)
        object.__setattr__(self, "positions", arr)

    @property
    def n_devices(self) -> int:
        return self.positions.shape[0]


@dataclass(frozen=True)
class ActivationModel:
    """Activation law exp(-d / decay_length); epicenters uniform in the disk."""

    decay_length: float

    def __post_init__(self):
        if not self.decay_length > 0:
            raise ValidationError("decay_length must be > 0")


@dataclass(frozen=True)
class SimulationSpec:
    steps: int
    seed: int

    def __post_init__(self):
        if self.steps < 1:
            raise ValidationError("steps must be >= 1")


def generate_layout(n: int, density: float, seed: int) -> DeviceLayout:
    """Sample n device positions uniformly i.i.d. in the deployment disk.

    The disk radius is sqrt(n / (density * pi)), i.e. the area holding n
    devices at the requested density.  Sampling is by polar inverse
    transform (r = R * sqrt(u)), so the same seed reproduces the same
    layout on any platform.
    """
    if n < 1:
        raise ValidationError("n must be >= 1")
    if not density > 0:
        raise ValidationError("density must be > 0")
    radius = math.sqrt(n / (density * math.pi))
    g = _rng.generator(seed, _rng.DOMAIN_LAYOUT)
    u = g.random(n)
    v = g.random(n)
    r = radius * np.sqrt(u)
    theta = (2.0 * math.pi) * v
    positions = np.column_stack([r * np.cos(theta), r * np.sin(theta)])
    return DeviceLayout(positions, radius, density)


def round_stream(seed: int, step: int, n_devices: int) -> np.random.Generator:
    """Generator positioned at alarm round ``step`` of the run with ``seed``."""
    blocks = _rng.blocks_per_round(n_devices + _ROUND_HEADER)
    return _rng.generator(seed, _rng.DOMAIN_ALARMS, block_offset=step * blocks)


def _epicenters(buf: np.ndarray, radius: float) -> tuple[np.ndarray, np.ndarray]:
    r = radius * np.sqrt(buf[:, 0])
    theta = (2.0 * math.pi) * buf[:, 1]
    return r * np.cos(theta), r * np.sin(theta)


def _activations(layout: DeviceLayout, model: ActivationModel, buf: np.ndarray) -> np.ndarray:
    """Boolean (rounds, N) activation table for a block of round draws."""
    ex, ey = _epicenters(buf, layout.region_radius)
    dx = ex[:, None] - layout.positions[None, :, 0]
    dy = ey[:, None] - layout.positions[None, :, 1]
    dist = np.sqrt(dx * dx + dy * dy)
    probs = np.exp(-dist / model.decay_length)
    return buf[:, _ROUND_HEADER:] < probs


def activation_round(
    layout: DeviceLayout, model: ActivationModel, rng: np.random.Generator
) -> np.ndarray:
    """Run one alarm round; returns the indices of the activated devices.

    ``rng`` must be positioned at the round's stream (see `round_stream`);
    the round consumes exactly N + 2 uniforms from it.
    """
    buf = rng.random(layout.n_devices + _ROUND_HEADER)
    active = _activations(layout, model, buf[None, :])[0]
    return np.flatnonzero(active)


def _chunk_rounds(
    layout: DeviceLayout,
    model: ActivationModel,
    seed: int,
    t0: int,
    t1: int,
    domain: int = _rng.DOMAIN_ALARMS,
):
    """Activation table for rounds [t0, t1), bit-identical to per-round eval."""
    draws = layout.n_devices + _ROUND_HEADER
    blocks = _rng.blocks_per_round(draws)
    bg = _rng.bit_generator(seed, domain, block_offset=t0 * blocks)
    buf = np.random.Generator(bg).random((t1 - t0, blocks * _rng.DRAWS_PER_BLOCK))
    return _activations(layout, model, buf[:, :draws])


def _iter_chunks(steps: int, width: int):
    chunk = max(1, _CHUNK_BUDGET // max(width, 1))
    t0 = 0
    while t0 < steps:
        t1 = min(steps, t0 + chunk)
        yield t0, t1
        t0 = t1


def estimate_joint_activation(
    layout: DeviceLayout, model: ActivationModel, spec: SimulationSpec
) -> JointActivationMatrix:
    """Empirical joint activation matrix over ``spec.steps`` alarm rounds.

    Off-diagonal [i][j] is the fraction of rounds in which both i and j
    were active; the diagonal holds marginal activation fractions.  Counts
    are integers, so the result is independent of the chunking used here.
    """
    n = layout.n_devices
    counts = np.zeros((n, n))
    for t0, t1 in _iter_chunks(spec.steps, 4 * _rng.blocks_per_round(n + _ROUND_HEADER)):
        active = _chunk_rounds(layout, model, spec.seed, t0, t1).astype(float)
        counts += active.T @ active
    return JointActivationMatrix(counts / spec.steps)


def quadrature_joint_activation(
    layout: DeviceLayout, model: ActivationModel, grid_resolution: int = 512
) -> JointActivationMatrix:
    """Deterministic oracle for `estimate_joint_activation`.

    Averages f_i(p) * f_j(p) (and f_i(p) on the diagonal) over epicenters p
    on a grid_resolution^2 midpoint grid clipped to the deployment disk,
    where f_i(p) = exp(-|p - x_i| / decay_length).  Independent of the
    Monte-Carlo path: no random numbers, no shared code with the estimator
    beyond the activation law itself.
    """
    if grid_resolution < 64:
        raise ValidationError("grid_resolution must be >= 64")
    radius = layout.region_radius
    g = grid_resolution
    step = 2.0 * radius / g
    centers = -radius + (np.arange(g) + 0.5) * step
    xx, yy = np.meshgrid(centers, centers, indexing="ij")
    inside = xx * xx + yy * yy <= radius * radius
    px = xx[inside]
    py = yy[inside]
    dx = px[:, None] - layout.positions[None, :, 0]
    dy = py[:, None] - layout.positions[None, :, 1]
    f = np.exp(-np.sqrt(dx * dx + dy * dy) / model.decay_length)
    m = f.T @ f / px.size
    np.fill_diagonal(m, f.mean(axis=0))
    return JointActivationMatrix(m)


# ---------------------------------------------------------------------------
# layout files: CSV "device,x,y" plus JSON sidecar with radius and density


def save_layout(layout: DeviceLayout, csv_path, sidecar_path=None) -> None:
    from pathlib import Path
    import json

    csv_path = Path(csv_path)
    lines = ["device,x,y"]
    lines += [
        "%d,%s,%s" % (i, "%.17g" % x, "%.17g" % y)
        for i, (x, y) in enumerate(layout.positions)
    ]
    csv_path.write_text("\n".join(lines) + "\n")
    sidecar = Path(sidecar_path) if sidecar_path else csv_path.with_suffix(".json")
    sidecar.write_text(
        json.dumps(
            {
                "region_radius": float(layout.region_radius),
                "density": float(layout.density),
            },
            indent=2,
        )
        + "\n"
    )


def load_layout(csv_path, sidecar_path=None) -> DeviceLayout:
    from pathlib import Path
    import json

    from corrsched.model import ParseError

    csv_path = Path(csv_path)
    lines = [ln.strip() for ln in csv_path.read_text().splitlines() if ln.strip()]
    if not lines or lines[0].replace(" ", "") != "device,x,y":
        raise ParseError("line 1: expected header 'device,x,y'")
    rows = {}
    for lineno, line in enumerate(lines[1:], start=2):
        cells = line.split(",")
        if len(cells) != 3:
            raise ParseError(f"line {lineno}: expected 'device,x,y'")
        try:
            rows[int(cells[0])] = (float(cells[1]), float(cells[2]))
        except ValueError as exc:
            raise ParseError(f"line {lineno}: {exc}") from exc
    if set(rows) != set(range(len(rows))):
        raise ParseError(f"devices must be exactly 0..{len(rows) - 1}")
    sidecar = Path(sidecar_path) if sidecar_path else csv_path.with_suffix(".json")
    try:
        meta = json.loads(sidecar.read_text())
    except json.JSONDecodeError as exc:
        raise ParseError(f"invalid sidecar JSON: {exc}") from exc
    for field in ("region_radius", "density"):
        if field not in meta:
            raise ParseError(f"sidecar missing field {field!r}")
    positions = np.array([rows[i] for i in range(len(rows))], dtype=float)
    return DeviceLayout(positions, float(meta["region_radius"]), float(meta["density"]))
