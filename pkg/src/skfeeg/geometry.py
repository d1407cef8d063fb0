"""Spherical head geometry and an analytic EEG lead field.

Dipole potentials use the infinite homogeneous medium formula, evaluated
at electrodes on a spherical scalp and average referenced. This keeps the
depth attenuation of real heads (deep sources produce weaker, smoother
scalp maps) without needing a mesh.

All lengths are in meters, moments in A*m, potentials in volts.
"""

from dataclasses import dataclass

import numpy as np

from .errors import NumericalFailure

__all__ = [
    "ElectrodeArray",
    "SourceSpace",
    "LeadField",
    "build_electrode_array",
    "build_source_space",
    "dipole_potential",
    "assemble_lead_field",
    "nearest_node",
]

_GOLDEN_ANGLE = np.pi * (3.0 - np.sqrt(5.0))


@dataclass(frozen=True)
class ElectrodeArray:
    positions: np.ndarray  # (m, 3)
    scalp_radius: float

    @property
    def count(self):
        return self.positions.shape[0]


@dataclass(frozen=True)
class SourceSpace:
    nodes: np.ndarray  # (N, 3)
    brain_radius: float
    node_spacing: float

    @property
    def n_nodes(self):
        return self.nodes.shape[0]

    @property
    def state_dim(self):
        return 3 * self.nodes.shape[0]


@dataclass(frozen=True)
class LeadField:
    """Average referenced gain matrix.

    ``matrix[:, 3*j + a]`` is the scalp map of a unit (1 A*m) dipole at
    node ``j`` pointing along axis ``a``.
    """

    matrix: np.ndarray  # (m, 3N), volts per A*m
    conductivity: float

    @property
    def n_electrodes(self):
        return self.matrix.shape[0]

    @property
    def state_dim(self):
        return self.matrix.shape[1]

    def scaled(self, unit):
        """Gain matrix in volts per ``unit`` A*m (e.g. ``1e-9`` for nA*m)."""
        return self.matrix * unit

    def node_block(self, j):
        return self.matrix[:, 3 * j:3 * j + 3]


def build_electrode_array(count, scalp_radius):
    """Place ``count`` electrodes on the upper scalp hemisphere.

    Uses a Fibonacci spiral over ``z`` in (0, 1), which gives nearly
    uniform coverage and is fully deterministic.
    """
    if count < 2:
        raise ValueError(f"need at least 2 electrodes, got {count}")
    if not scalp_radius > 0:
        raise ValueError(f"scalp_radius must be positive, got {scalp_radius}")
    i = np.arange(count, dtype=float)
    z = (i + 0.5) / count
    rho = np.sqrt(1.0 - z * z)
    phi = i * _GOLDEN_ANGLE
    unit = np.column_stack([rho * np.cos(phi), rho * np.sin(phi), z])
    unit /= np.linalg.norm(unit, axis=1, keepdims=True)
    return ElectrodeArray(positions=scalp_radius * unit, scalp_radius=float(scalp_radius))


def build_source_space(node_spacing, brain_radius, min_z=None):
    """Regular cubic lattice of dipole nodes strictly inside the brain sphere.

    Nodes are ordered lexicographically by (x, y, z). The origin is always
    a node. ``min_z`` optionally drops nodes below a horizontal plane, e.g.
    to keep the source space under the electrode cap.
    """
    if not 0 < node_spacing < brain_radius:
        raise ValueError(
            f"need 0 < node_spacing < brain_radius, got {node_spacing}, {brain_radius}"
        )
    half = int(np.floor(brain_radius / node_spacing))
    ticks = node_spacing * np.arange(-half, half + 1)
    gx, gy, gz = np.meshgrid(ticks, ticks, ticks, indexing="ij")
    pts = np.column_stack([gx.ravel(), gy.ravel(), gz.ravel()])
    pts = pts[np.linalg.norm(pts, axis=1) < brain_radius]
    if min_z is not None:
        if min_z > 0:
            raise ValueError(f"min_z must be <= 0 so the origin stays a node, got {min_z}")
        pts = pts[pts[:, 2] >= min_z - 1e-12 * node_spacing]
    return SourceSpace(nodes=pts, brain_radius=float(brain_radius),
                       node_spacing=float(node_spacing))


def dipole_potential(dipole_pos, moment, electrode_pos, conductivity):
    """Potential of a current dipole in an infinite homogeneous conductor.

    ``V = moment . (e - p) / (4 pi sigma |e - p|^3)``, before referencing.
    """
    d = np.asarray(electrode_pos, dtype=float) - np.asarray(dipole_pos, dtype=float)
    dist = float(np.sqrt(d @ d))
    if dist == 0.0:
        raise NumericalFailure("electrode coincides with dipole position")
    return float(np.asarray(moment, dtype=float) @ d) / (4.0 * np.pi * conductivity * dist ** 3)


def assemble_lead_field(space, electrodes, conductivity):
    if not conductivity > 0:
        raise ValueError(f"conductivity must be positive, got {conductivity}")
    diff = electrodes.positions[:, None, :] - space.nodes[None, :, :]  # (m, N, 3)
    dist = np.sqrt(np.einsum("mnk,mnk->mn", diff, diff))
    if np.any(dist == 0.0):
        raise NumericalFailure("a source node coincides with an electrode")
    gain = diff / (4.0 * np.pi * conductivity * dist[..., None] ** 3)
    mat = gain.reshape(electrodes.count, 3 * space.n_nodes)
    mat = mat - mat.mean(axis=0, keepdims=True)
    return LeadField(matrix=mat, conductivity=float(conductivity))


def nearest_node(space, position):
    """Index of the node closest to ``position`` (lowest index on ties)."""
    d = np.linalg.norm(space.nodes - np.asarray(position, dtype=float), axis=1)
    return int(np.argmin(d))
