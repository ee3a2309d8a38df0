"""Synthetic polishing paths on simple surfaces.

Stand-ins for CAM output, all expressed in the heel frame (m). Used for the
bundled examples and the test-suite.
"""

from __future__ import annotations

import math

import numpy as np

from .cls import Pattern, Sector, Toolpath


def _lead(point, direction, normal, length, step):
    """Straight tangent run ending at ``point`` (excluded), direction pointing into it."""
    n = max(int(round(length / step)), 1)
    d = np.asarray(direction, dtype=float)
    d = d / np.linalg.norm(d)
    pts = [np.asarray(point) - d * step * k for k in range(n, 0, -1)]
    return pts, [np.asarray(normal)] * n


def hemisphere_zigzag(
    radius: float = 0.04,
    pitch: float = 0.006,
    step: float = 0.002,
    cap_angle: float = math.radians(60),
    lead: float = 0.03,
    center=(0.0, 0.0, 0.0),
    name: str = "toe_hemisphere",
    sector: Sector = Sector.TOE,
) -> Toolpath:
    """Zigzag rows over a spherical cap of half-angle ``cap_angle``.

    Rows are circles of latitude about the x axis, ``pitch`` of arc length
    apart on the sphere, so adjacent rows keep a constant stepover.
    Straight tangent lead-in and lead-out runs of length ``lead`` are
    attached at the ends.
    """
    c = np.asarray(center, dtype=float)
    n_rows = int(math.floor(cap_angle * radius / pitch))
    lats = pitch / radius * np.arange(-n_rows, n_rows + 1)
    pts, nrm = [], []
    for k, lat in enumerate(lats):
        y = radius * math.sin(lat)
        r_row = radius * math.cos(lat)
        # keep the row inside the cap: z >= radius * cos(cap_angle)
        cos_phi = min(math.cos(cap_angle) / math.cos(lat), 1.0)
        phi_max = math.acos(cos_phi)
        if phi_max <= 0:
            continue
        n = max(int(math.ceil(2 * phi_max * r_row / step)), 2)
        phis = np.linspace(-phi_max, phi_max, n + 1)
        if k % 2:
            phis = phis[::-1]
        for phi in phis:
            p = np.array([r_row * math.sin(phi), y, r_row * math.cos(phi)])
            pts.append(c + p)
            nrm.append(p / radius)
    pts_arr = np.array(pts)
    nrm_arr = np.array(nrm)
    if lead > 0:
        first_dir = pts_arr[1] - pts_arr[0]
        pre, pre_n = _lead(pts_arr[0], first_dir, nrm_arr[0], lead, step)
        last_dir = pts_arr[-2] - pts_arr[-1]
        post, post_n = _lead(pts_arr[-1], last_dir, nrm_arr[-1], lead, step)
        pts_arr = np.vstack([pre, pts_arr, post[::-1]])
        nrm_arr = np.vstack([pre_n, nrm_arr, post_n])
    return Toolpath.from_arrays(name, pts_arr, nrm_arr, sector=sector, pattern=Pattern.ZIGZAG, pitch=pitch * 1e3)


def planar_zigzag(
    width: float = 0.06,
    height: float = 0.036,
    pitch: float = 0.006,
    step: float = 0.002,
    origin=(0.0, 0.0, 0.0),
    name: str = "planar_zigzag",
    sector: Sector = Sector.VAMP,
) -> Toolpath:
    o = np.asarray(origin, dtype=float)
    n_rows = int(round(height / pitch)) + 1
    n = max(int(round(width / step)), 1)
    xs = np.linspace(0.0, width, n + 1)
    pts = []
    for k in range(n_rows):
        row = xs if k % 2 == 0 else xs[::-1]
        pts.extend(o + np.array([x, k * pitch, 0.0]) for x in row)
    axes = np.tile([0.0, 0.0, 1.0], (len(pts), 1))
    return Toolpath.from_arrays(name, np.array(pts), axes, sector=sector, pattern=Pattern.ZIGZAG, pitch=pitch * 1e3)


def planar_spiral(
    r_start: float = 0.015,
    r_end: float = 0.045,
    pitch: float = 0.005,
    step: float = 0.002,
    center=(0.0, 0.0, 0.0),
    name: str = "planar_spiral",
    sector: Sector = Sector.TOE,
) -> Toolpath:
    """Archimedean spiral with radial step ``pitch`` per turn."""
    b = pitch / (2 * math.pi)
    theta = r_start / b
    pts = []
    while b * theta <= r_end:
        r = b * theta
        pts.append([r * math.cos(theta), r * math.sin(theta), 0.0])
        theta += step / math.hypot(r, b)
    pts_arr = np.asarray(center, dtype=float) + np.array(pts)
    axes = np.tile([0.0, 0.0, 1.0], (len(pts_arr), 1))
    return Toolpath.from_arrays(name, pts_arr, axes, sector=sector, pattern=Pattern.SPIRAL, pitch=pitch * 1e3)


def cylinder_zigzag(
    radius: float = 0.05,
    length: float = 0.12,
    arc: float = math.radians(70),
    pitch: float = 0.006,
    step: float = 0.002,
    axis_angle: float = 0.0,
    phi0: float = 0.0,
    center=(0.0, 0.0, 0.0),
    name: str = "cylinder_zigzag",
    sector: Sector = Sector.LATERAL_RIGHT,
    start_at_top: bool = True,
) -> Toolpath:
    """Zigzag rows along a horizontal cylinder (axis along x rotated by ``axis_angle``
    about z), rows stacked around the circumference ``pitch`` apart.

    Rows start at angle ``phi0`` from the top and advance by ``arc``; a
    positive ``arc`` moves toward -y (the right-hand side of a right shoe).
    """
    n_rows = int(math.floor(abs(arc) * radius / pitch)) + 1
    dphi = math.copysign(pitch / radius, arc)
    n = max(int(round(length / step)), 1)
    xs = np.linspace(-length / 2, length / 2, n + 1)
    ca, sa = math.cos(axis_angle), math.sin(axis_angle)
    Rz = np.array([[ca, -sa, 0.0], [sa, ca, 0.0], [0.0, 0.0, 1.0]])
    pts, nrm = [], []
    order = range(n_rows) if start_at_top else range(n_rows - 1, -1, -1)
    for j, k in enumerate(order):
        phi = phi0 + k * dphi
        nvec = np.array([0.0, -math.sin(phi), math.cos(phi)])
        row = xs if j % 2 == 0 else xs[::-1]
        for x in row:
            pts.append(Rz @ (np.array([x, 0.0, 0.0]) + radius * nvec))
            nrm.append(Rz @ nvec)
    pts_arr = np.asarray(center, dtype=float) + np.array(pts)
    return Toolpath.from_arrays(name, pts_arr, np.array(nrm), sector=sector, pattern=Pattern.ZIGZAG, pitch=pitch * 1e3)


def sphere_spiral(
    radius: float = 0.04,
    pitch: float = 0.006,
    step: float = 0.002,
    cap_angle: float = math.radians(60),
    inner_angle: float = math.radians(10),
    center=(0.0, 0.0, 0.0),
    clockwise: bool = False,
    outward: bool = True,
    name: str = "sphere_spiral",
    sector: Sector = Sector.TOE,
) -> Toolpath:
    """Spiral on a spherical cap; polar angle grows by ``pitch / radius`` per turn."""
    c = np.asarray(center, dtype=float)
    b = pitch / radius / (2 * math.pi)
    theta_pts = []
    phi = inner_angle / b
    while b * phi <= cap_angle:
        theta = b * phi
        theta_pts.append((theta, phi))
        ring = radius * math.sin(theta)
        phi += step / math.hypot(ring, radius * b)
    sign = -1.0 if clockwise else 1.0
    nrm = np.array([[math.sin(t) * math.cos(sign * f), math.sin(t) * math.sin(sign * f), math.cos(t)] for t, f in theta_pts])
    if not outward:
        nrm = nrm[::-1]
    return Toolpath.from_arrays(name, c + radius * nrm, nrm, sector=sector, pattern=Pattern.SPIRAL, pitch=pitch * 1e3)


def vertical_cylinder_zigzag(
    radius: float = 0.045,
    height: float = 0.05,
    arc: tuple[float, float] = (math.radians(90), math.radians(270)),
    pitch: float = 0.006,
    step: float = 0.002,
    center=(0.0, 0.0, 0.0),
    start_at_top: bool = True,
    name: str = "heel_zigzag",
    sector: Sector = Sector.HEEL,
) -> Toolpath:
    """Horizontal arcs around a vertical cylinder, stacked ``pitch`` apart in z."""
    c = np.asarray(center, dtype=float)
    n_rows = int(math.floor(height / pitch)) + 1
    a0, a1 = arc
    n = max(int(math.ceil(abs(a1 - a0) * radius / step)), 2)
    angles = np.linspace(a0, a1, n + 1)
    zs = pitch * np.arange(n_rows)
    if start_at_top:
        zs = zs[::-1]
    pts, nrm = [], []
    for k, z in enumerate(zs):
        row = angles if k % 2 == 0 else angles[::-1]
        for a in row:
            nvec = np.array([math.cos(a), math.sin(a), 0.0])
            pts.append(c + radius * nvec + [0.0, 0.0, z])
            nrm.append(nvec)
    return Toolpath.from_arrays(name, np.array(pts), np.array(nrm), sector=sector, pattern=Pattern.ZIGZAG, pitch=pitch * 1e3)


def shoe_library() -> dict[str, Toolpath]:
    """Right-shoe trajectory set in the heel frame, roughly a 280 mm last.

    Same-sector paths differ in pattern, pitch (5 to 8 mm) and start/end
    points.
    """
    deg = math.radians
    toe_c = (0.2, 0.0, 0.0)
    paths = [
        hemisphere_zigzag(0.045, 0.006, center=toe_c, lead=0.0, cap_angle=deg(75), name="toe_zigzag_6"),
        sphere_spiral(0.045, 0.005, center=toe_c, cap_angle=deg(75), name="toe_spiral_5"),
        sphere_spiral(0.045, 0.007, center=toe_c, cap_angle=deg(75), clockwise=True, outward=False, name="toe_spiral_7_in"),
        hemisphere_zigzag(0.045, 0.008, center=toe_c, lead=0.0, cap_angle=deg(72), name="toe_zigzag_8"),
        cylinder_zigzag(0.06, 0.12, deg(120), 0.006, center=(0.11, 0.0, 0.0), phi0=deg(-60), name="vamp_zigzag_6", sector=Sector.VAMP),
        cylinder_zigzag(0.06, 0.12, deg(-120), 0.007, center=(0.11, 0.0, 0.0), phi0=deg(60), name="vamp_zigzag_7", sector=Sector.VAMP),
        cylinder_zigzag(0.08, 0.24, deg(60), 0.006, center=(0.1, 0.0, -0.02), phi0=deg(30), name="lateral_r_zigzag_6", sector=Sector.LATERAL_RIGHT),
        cylinder_zigzag(0.08, 0.24, deg(60), 0.008, center=(0.1, 0.0, -0.02), phi0=deg(30), start_at_top=False, name="lateral_r_zigzag_8", sector=Sector.LATERAL_RIGHT),
        cylinder_zigzag(0.08, 0.24, deg(-60), 0.006, center=(0.1, 0.0, -0.02), phi0=deg(-30), name="lateral_l_zigzag_6", sector=Sector.LATERAL_LEFT),
        cylinder_zigzag(0.08, 0.24, deg(-60), 0.008, center=(0.1, 0.0, -0.02), phi0=deg(-30), start_at_top=False, name="lateral_l_zigzag_8", sector=Sector.LATERAL_LEFT),
        vertical_cylinder_zigzag(0.045, 0.06, pitch=0.006, center=(0.0, 0.0, 0.01), name="heel_zigzag_6"),
        vertical_cylinder_zigzag(0.045, 0.06, arc=(math.radians(270), math.radians(90)), pitch=0.007, center=(0.0, 0.0, 0.01), start_at_top=False, name="heel_zigzag_7"),
    ]
    return {tp.name: tp for tp in paths}
