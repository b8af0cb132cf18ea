#!/usr/bin/env python3
# Copyright 2026 The tickbench Authors
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#     http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.
"""Authors the bundled map fixtures under data/maps/.

loop_intersection.json is a figure-eight loop: two circular lobes joined by
two straights that cross at the origin. straight.json is a single 20 m lane.
"""

import json
import math
import pathlib

LANE_HALF_WIDTH = 0.15
LOBE_RADIUS = 1.0
LOBE_OFFSET = 2.0
ARC_STEP_DEG = 3.0


def r(v):
    return round(v, 6)


def offset(points, headings, d):
    # Positive d is to the left of the travel direction.
    return [[r(x - d * math.sin(h)), r(y + d * math.cos(h))] for (x, y), h in zip(points, headings)]


def lanelet(lid, points, headings, successors):
    return {
        "id": lid,
        "left": offset(points, headings, LANE_HALF_WIDTH),
        "right": offset(points, headings, -LANE_HALF_WIDTH),
        "center": [[r(x), r(y)] for x, y in points],
        "successors": successors,
    }


def straight(a, b, n=None):
    length = math.dist(a, b)
    n = n or max(2, int(math.ceil(length / 0.25)) + 1)
    h = math.atan2(b[1] - a[1], b[0] - a[0])
    pts = [(a[0] + (b[0] - a[0]) * k / (n - 1), a[1] + (b[1] - a[1]) * k / (n - 1)) for k in range(n)]
    return pts, [h] * n


def arc(center, radius, start_deg, end_deg):
    sweep = end_deg - start_deg
    n = int(math.ceil(abs(sweep) / ARC_STEP_DEG)) + 1
    pts, hs = [], []
    for k in range(n):
        a = math.radians(start_deg + sweep * k / (n - 1))
        pts.append((center[0] + radius * math.cos(a), center[1] + radius * math.sin(a)))
        hs.append(a + (math.pi / 2 if sweep > 0 else -math.pi / 2))
    return pts, hs


def build_loop():
    theta = math.asin(LOBE_RADIUS / LOBE_OFFSET)
    tangent = math.sqrt(LOBE_OFFSET**2 - LOBE_RADIUS**2)
    c, s = math.cos(theta), math.sin(theta)
    ru, rl = (tangent * c, tangent * s), (tangent * c, -tangent * s)
    lu, ll = (-tangent * c, tangent * s), (-tangent * c, -tangent * s)
    # Polar angle of the upper tangent point on the right lobe.
    phi = math.degrees(math.atan2(ru[1], ru[0] - LOBE_OFFSET))
    # Right lobe is driven clockwise from phi to -phi, left lobe
    # counter-clockwise from lphi to 360 - lphi.
    lphi = math.degrees(math.atan2(lu[1], lu[0] + LOBE_OFFSET))
    segs = [
        (1, straight((0.0, 0.0), ru), [2]),
        (2, arc((LOBE_OFFSET, 0.0), LOBE_RADIUS, phi, -phi), [3]),
        (3, straight(rl, (0.0, 0.0)), [4]),
        (4, straight((0.0, 0.0), lu), [5]),
        (5, arc((-LOBE_OFFSET, 0.0), LOBE_RADIUS, lphi, 360.0 - lphi), [6]),
        (6, straight(ll, (0.0, 0.0)), [1]),
    ]
    lanelets = [lanelet(lid, pts, hs, succ) for lid, (pts, hs), succ in segs]
    return {
        "lanelets": lanelets,
        "reference_paths": [{"name": "loop", "lanelets": [1, 2, 3, 4, 5, 6]}],
    }


def build_straight():
    pts, hs = straight((0.0, 0.0), (20.0, 0.0))
    return {
        "lanelets": [lanelet(1, pts, hs, [])],
        "reference_paths": [{"name": "straight", "lanelets": [1]}],
    }


def main():
    out = pathlib.Path(__file__).resolve().parent.parent / "data" / "maps"
    out.mkdir(parents=True, exist_ok=True)
    for name, doc in (("loop_intersection.json", build_loop()), ("straight.json", build_straight())):
        (out / name).write_text(json.dumps(doc, indent=1) + "\n")


if __name__ == "__main__":
    main()
