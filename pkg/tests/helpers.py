"""Oracles and synthetic scene builders shared by the test modules.

Everything here is written independently of the package internals: plain
loops, literal formulas, and no calls into ``stereoloc.matching``.
"""
import math

import numpy as np
from scipy.ndimage import map_coordinates


def shifted_pair(rng, height, width, shift, low=0, high=256):
    """Uniform-noise texture; the right view sees each feature ``shift`` px further left."""
    base = rng.integers(low, high, size=(height, width + shift)).astype(np.float64)
    return base[:, :width].copy(), base[:, shift : shift + width].copy()


def brute_force_volume(left, right, block, dmin, dmax, sentinel):
    """cost(y, x, d) by explicit loops over clamped window coordinates."""
    h, w = left.shape
    r = block // 2
    out = np.full((h, w, dmax - dmin + 1), sentinel)
    for y in range(h):
        rows = [min(max(y + j, 0), h - 1) for j in range(-r, r + 1)]
        for x in range(w):
            lcols = [min(max(x + i, 0), w - 1) for i in range(-r, r + 1)]
            for k, d in enumerate(range(dmin, dmax + 1)):
                if x - d < 0:
                    continue
                rcols = [min(max(x - d + i, 0), w - 1) for i in range(-r, r + 1)]
                total = 0.0
                for yy in rows:
                    for xl, xr in zip(lcols, rcols):
                        diff = left[yy, xl] - right[yy, xr]
                        total += diff * diff
                out[y, x, k] = total / (block * block)
    return out


def brute_force_wta(volume_costs, min_disp):
    """Argmin with ties to the smaller disparity; columns x < min_disp invalid."""
    h, w, n = volume_costs.shape
    out = np.full((h, w), np.nan)
    for y in range(h):
        for x in range(min_disp, w):
            best_k = 0
            for k in range(1, n):
                if volume_costs[y, x, k] < volume_costs[y, x, best_k]:
                    best_k = k
            out[y, x] = min_disp + best_k
    return out


def row_recurrence(costs_row, p1, p2, reverse=False):
    """Textbook semi-global recurrence along one scanline.

    L(p, d) = C(p, d) + min(L(p-1, d), L(p-1, d+-1) + p1, min_k L(p-1, k) + p2)
              - min_k L(p-1, k)
    """
    n, levels = len(costs_row), len(costs_row[0])
    order = range(n - 1, -1, -1) if reverse else range(n)
    out = [None] * n
    prev = None
    for x in order:
        c = costs_row[x]
        if prev is None:
            cur = list(c)
        else:
            m = min(prev)
            cur = []
            for d in range(levels):
                cands = [prev[d], m + p2]
                if d > 0:
                    cands.append(prev[d - 1] + p1)
                if d < levels - 1:
                    cands.append(prev[d + 1] + p1)
                cur.append(c[d] + min(cands) - m)
        out[x] = cur
        prev = cur
    return out


def floyd_warshall_hops(adjacency):
    n = adjacency.shape[0]
    dist = np.where(adjacency, 1.0, np.inf)
    np.fill_diagonal(dist, 0.0)
    for k in range(n):
        dist = np.minimum(dist, dist[:, k : k + 1] + dist[k : k + 1, :])
    return dist


def grid_search_position(anchors, dists, center, half_width, step):
    """Minimize the squared range misfit over a dense grid."""
    xs = np.arange(center[0] - half_width, center[0] + half_width + step / 2, step)
    ys = np.arange(center[1] - half_width, center[1] + half_width + step / 2, step)
    gx, gy = np.meshgrid(xs, ys)
    cost = np.zeros_like(gx)
    for (ax, ay), d in zip(anchors, dists):
        cost += (np.hypot(gx - ax, gy - ay) - d) ** 2
    i = np.unravel_index(np.argmin(cost), cost.shape)
    return np.array([gx[i], gy[i]])


def smooth_texture(rng, height, width, scale=2.0):
    """Continuous random texture, evaluated by cubic interpolation of a noise grid."""
    grid = rng.uniform(0, 255, size=(int(height / scale) + 8, int(width / scale) + 8))

    def sample(xs, ys):
        coords = np.array([np.asarray(ys) / scale + 2, np.asarray(xs) / scale + 2])
        return map_coordinates(grid, coords, order=3, mode="reflect")

    return sample


def render_layered_scene(rng, width, height, background_disp, regions):
    """Rectified pair of fronto-parallel textured rectangles over a background.

    ``regions`` are ``(x0, y0, x1, y1, disparity)`` in left-image pixels. Each
    layer has its own texture; nearer layers (larger disparity) occlude
    farther ones in both views.
    """
    ys, xs = np.mgrid[0:height, 0:width].astype(np.float64)
    bg = smooth_texture(rng, height, width + 64)
    left = bg(xs, ys)
    right = bg(xs + background_disp, ys)
    for x0, y0, x1, y1, d in sorted(regions, key=lambda r: r[4]):
        tex = smooth_texture(rng, height, width + 64)
        in_rows = (ys >= y0) & (ys < y1)
        mask_l = in_rows & (xs >= x0) & (xs < x1)
        left[mask_l] = tex(xs[mask_l], ys[mask_l])
        src = xs + d
        mask_r = in_rows & (src >= x0) & (src < x1)
        right[mask_r] = tex(src[mask_r], ys[mask_r])
    return np.clip(np.rint(left), 0, 255), np.clip(np.rint(right), 0, 255)


def depth_error_bound(z, fx, baseline, delta_d, slack=1.25):
    return slack * z * z * delta_d / (fx * baseline)


def position_error_bound(anchors, point, range_errors):
    """First-order bound on position error from per-anchor range errors."""
    diff = np.asarray(point) - np.asarray(anchors)
    jac = diff / np.linalg.norm(diff, axis=1)[:, None]
    pinv = np.linalg.pinv(jac)
    return float(sum(np.linalg.norm(pinv[:, i]) * e for i, e in enumerate(range_errors)))


def quarter_meridian(radius):
    return radius * math.pi / 2


LOCALIZATION_ORIGIN = (37.9537, -91.7735)


def localization_scene(rng, width=320, height=240, fx=1000.0, baseline=0.3):
    """Stereo pair, detections and landmark registry for a node at a known spot.

    Three fronto-parallel landmark facades at 20, 35 and 50 m over a ~150 m
    background. Landmark positions are placed at those ranges from the node
    along well-spread bearings, and the node is offset so the landmark
    centroid sits at ``LOCALIZATION_ORIGIN``.
    """
    ranges = np.array([20.0, 35.0, 50.0])
    disp = fx * baseline / ranges
    boxes = [(30, 50, 110, 190), (125, 50, 205, 190), (220, 50, 300, 190)]
    left, right = render_layered_scene(
        rng, width, height, 2.0, [(*b, d) for b, d in zip(boxes, disp)]
    )
    class_ids = [11, 12, 13]
    detections = []
    for cid, (x0, y0, x1, y1) in zip(class_ids, boxes):
        detections.append({
            "x": (x0 + x1) / 2, "y": (y0 + y1) / 2, "width": 50, "height": 90,
            "confidence": 0.9, "class": f"landmark {cid}", "classId": cid,
            "imagePath": "left.pgm", "predictionType": "ObjectDetectionModel",
        })
    bearings = np.radians([90.0, 210.0, 330.0]) + 0.2
    offsets = ranges[:, None] * np.column_stack([np.cos(bearings), np.sin(bearings)])
    node = -offsets.mean(axis=0)
    anchors = node + offsets
    lat0, lon0 = LOCALIZATION_ORIGIN
    registry = []
    for cid, (x, y) in zip(class_ids, anchors):
        registry.append({
            "classId": cid, "name": f"landmark {cid}",
            "lat": lat0 + math.degrees(y / 6371008.8),
            "lon": lon0 + math.degrees(x / (6371008.8 * math.cos(math.radians(lat0)))),
        })
    rig = {
        "fx": fx, "fy": fx, "cx": width / 2, "cy": height / 2, "baseline_m": baseline,
        "image_width": width, "image_height": height,
    }
    return {
        "left": left, "right": right, "rig": rig, "detections": detections,
        "registry": registry, "node": node, "anchors": anchors, "ranges": ranges,
        "class_ids": class_ids,
    }
