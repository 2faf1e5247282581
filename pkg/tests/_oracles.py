"""Independent brute-force reference implementations.

Everything here is written as plain per-element Python against the documented
contracts, deliberately sharing no code with the library kernels, so tests
can compare the two paths bit for bit.
"""

import math

import numpy as np


def project_point(x, y, z, width, height, fov_up, fov_down, min_range=1e-6):
    """(u, v, range) for one point, or None when skipped/dropped."""
    r = math.sqrt(x * x + y * y + z * z)
    if r < min_range:
        return None
    yaw = math.atan2(y, x)
    pitch = math.asin(max(-1.0, min(1.0, z / r)))
    if pitch < fov_down or pitch > fov_up:
        return None
    u = math.floor(0.5 * (1.0 - yaw / math.pi) * width)
    v = math.floor((1.0 - (pitch - fov_down) / (fov_up - fov_down)) * height)
    u = min(max(u, 0), width - 1)
    v = min(max(v, 0), height - 1)
    return u, v, r


def brute_force_project(points, width, height, fov_up, fov_down, min_range=1e-6):
    """Pixel -> (winning point index, range), min range with lowest-index ties."""
    winners = {}
    for i, (x, y, z) in enumerate(points):
        hit = project_point(x, y, z, width, height, fov_up, fov_down, min_range)
        if hit is None:
            continue
        u, v, r = hit
        key = (v, u)
        if key not in winners or r < winners[key][1]:
            winners[key] = (i, r)
    return winners


def brute_force_scatter(entries, transformed_range, src_valid, data):
    """Sequential min-range feature scatter.

    entries: (H, W) flat target index or -1; transformed_range: (H, W);
    src_valid: (H, W) participation mask; data: (H, W, C).
    Returns (out_data, out_valid).
    """
    height, width = entries.shape
    channels = data.shape[2]
    out = np.zeros((height, width, channels), dtype=data.dtype)
    best = {}
    for v in range(height):
        for u in range(width):
            if not src_valid[v, u] or entries[v, u] < 0:
                continue
            target = int(entries[v, u])
            r = transformed_range[v, u]
            if target not in best or r < best[target][0]:
                best[target] = (r, v, u)
    out_valid = np.zeros((height, width), dtype=bool)
    for target, (_, v, u) in best.items():
        tv, tu = divmod(target, width)
        out[tv, tu] = data[v, u]
        out_valid[tv, tu] = True
    return out, out_valid


def brute_force_knn(
    anchor_u,
    anchor_v,
    point_range,
    input_label,
    image_range,
    image_valid,
    pixel_label,
    k,
    window,
    range_cutoff,
    inverse_weight=False,
    eps=1e-6,
):
    """Per-point window vote; candidates ordered by (gap, flat pixel index)."""
    height, width = image_range.shape
    half = window // 2
    out = list(input_label)
    for p in range(len(anchor_u)):
        au, av = int(anchor_u[p]), int(anchor_v[p])
        if au < 0 or av < 0:
            continue
        cands = []
        for vv in range(av - half, av + half + 1):
            if vv < 0 or vv >= height:
                continue
            for uu in range(au - half, au + half + 1):
                if uu < 0 or uu >= width:
                    continue
                if not image_valid[vv, uu]:
                    continue
                gap = abs(image_range[vv, uu] - point_range[p])
                if gap > range_cutoff:
                    continue
                cands.append((gap, vv * width + uu, int(pixel_label[vv, uu])))
        if not cands:
            continue
        cands.sort(key=lambda c: (c[0], c[1]))
        moving = 0.0
        static = 0.0
        for gap, _, lab in cands[:k]:
            w = 1.0 / (gap + eps) if inverse_weight else 1.0
            if lab == 1:
                moving += w
            else:
                static += w
        if moving > static:
            out[p] = 1
        elif static > moving:
            out[p] = 0
    return np.array(out, dtype=np.uint8)


def ray_plane_distance(origin, direction, extent):
    """Distance along a ray to the bounded z=0 plane, or None."""
    if direction[2] == 0:
        return None
    t = -origin[2] / direction[2]
    if t <= 1e-9:
        return None
    hx = origin[0] + t * direction[0]
    hy = origin[1] + t * direction[1]
    if abs(hx) > extent or abs(hy) > extent:
        return None
    return t


def ray_box_distance(origin, direction, lo, hi):
    """Entry distance along a ray into an axis-aligned box, or None."""
    t_near, t_far = -math.inf, math.inf
    for axis in range(3):
        o, d = origin[axis], direction[axis]
        if d == 0:
            if o < lo[axis] or o > hi[axis]:
                return None
            continue
        t1 = (lo[axis] - o) / d
        t2 = (hi[axis] - o) / d
        if t1 > t2:
            t1, t2 = t2, t1
        t_near = max(t_near, t1)
        t_far = min(t_far, t2)
    if t_near > t_far or t_near <= 1e-9:
        return None
    return t_near
