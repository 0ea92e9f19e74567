"""Acceptance criteria 1-9.

Each criterion prints one PASS/FAIL line.  Run under pytest (the lines are
repeated in the terminal summary) or directly: ``python tests/test_acceptance.py``.
"""

from __future__ import annotations

import itertools
import json
import math
import os
import sys
import time
from pathlib import Path

import numpy as np
import pytest
from scipy.optimize import brentq

sys.path.insert(0, str(Path(__file__).parent))

from conftest import ACCEPTANCE_LINES, CONFIGS, run_cli  # noqa: E402
from oracles import (  # noqa: E402
    around_hole_oracle,
    great_circle_oracle,
    hero_oracle,
    segment_hits_disk,
)
from sigma_geometry import SpaceSpec, gram, hero_area, make_space, metric  # noqa: E402
from sigma_geometry.errors import ImaginaryArea  # noqa: E402
from sigma_geometry.euclid import (  # noqa: E402
    build_chart,
    check_conditions,
    covariant_coordinates,
    detect_dimension,
    reconstruct_sigma,
)
from sigma_geometry.riemann.cone import collinearity_cone  # noqa: E402
from sigma_geometry.riemann.geodesic import sigma_riemannian  # noqa: E402
from sigma_geometry.riemann.metric import punctured_plane_metric, sphere_metric  # noqa: E402
from sigma_geometry.riemann.tangent import check_worldfunction_identities, sigma_derivatives  # noqa: E402
from sigma_geometry.tubes import (  # noqa: E402
    cylinder_contains,
    ellipsoid_contains,
    sample_tube,
    segment_contains,
    tube_contains,
)

pytestmark = pytest.mark.acceptance


def report(number: int, ok: bool, detail: str, seconds: float) -> bool:
    line = f"criterion {number}: {'PASS' if ok else 'FAIL'} ({seconds:.2f} s) {detail}"
    print(line)
    ACCEPTANCE_LINES.append(line)
    return ok


# ---------------------------------------------------------------- criterion 1

def criterion_1() -> tuple[bool, str]:
    E2 = make_space(SpaceSpec("euclidean", 2))
    rng = np.random.default_rng(1)
    worst = 0.0
    for tri in rng.uniform(-10, 10, size=(1000, 3, 2)):
        F2 = gram(E2, tri).determinant
        a, b, c = (metric(E2, tri[i], tri[j]) for i, j in ((0, 1), (0, 2), (1, 2)))
        for area in (hero_area(a, b, c), hero_oracle(a, b, c)):
            worst = max(worst, abs(F2 - (2 * area) ** 2) / max(F2, 1.0))
    return worst <= 1e-9, f"max rel |F_2 - (2 Hero)^2| = {worst:.2e} over 1000 triangles"


# ---------------------------------------------------------------- criterion 2

def criterion_2() -> tuple[bool, str]:
    rng = np.random.default_rng(2)
    worst = 0.0
    checked = 0
    for n in (1, 2, 3, 4):
        space = make_space(SpaceSpec("euclidean", n))
        for _ in range(5):
            pts = rng.normal(size=(n + 1, n))
            ref = gram(space, pts).determinant
            for perm in itertools.permutations(range(n + 1)):
                got = gram(space, pts[list(perm)]).determinant
                worst = max(worst, abs(got - ref) / abs(ref))
                checked += 1
    return worst <= 1e-9, f"max rel F_n spread = {worst:.2e} over {checked} permutations, n <= 4"


# ---------------------------------------------------------------- criterion 3

def criterion_3() -> tuple[bool, str]:
    ok = True
    worst = {"I": 0.0, "II": 0.0, "III": 0.0, "recon": 0.0}
    for dim in (1, 2, 3, 4):
        space = make_space(SpaceSpec("euclidean", dim))
        for seed in range(10):
            found = detect_dimension(space, seed=seed)
            ok &= found.dimension == dim
            chart = build_chart(space, found.basis)
            rep = check_conditions(space, chart, seed=seed, n_pairs=500)
            ok &= rep.cond1_pass and rep.cond2_pass and bool(rep.cond3_pass)
            worst["I"] = max(worst["I"], rep.cond1_max_residual)
            worst["II"] = max(worst["II"], rep.cond2_max_residual)
            worst["III"] = max(worst["III"], rep.cond3_max_residual)
        rng = np.random.default_rng(dim)
        P, Q = rng.uniform(-1, 1, size=(2, 500, dim))
        rec = reconstruct_sigma(chart, covariant_coordinates(space, chart, P), covariant_coordinates(space, chart, Q))
        direct = 0.5 * np.sum((P - Q) ** 2, axis=1)
        worst["recon"] = max(worst["recon"], float(np.max(np.abs(rec - direct) / np.maximum(1.0, direct))))
    ok &= max(worst["I"], worst["II"], worst["III"]) <= 1e-8 and worst["recon"] <= 1e-9
    detail = "dims 1-4 x 10 seeds; max residuals I={I:.1e} II={II:.1e} III={III:.1e}; reconstruction {recon:.1e}"
    return bool(ok), detail.format(**worst)


# ---------------------------------------------------------------- criterion 4

def criterion_4() -> tuple[bool, str]:
    M3 = make_space(SpaceSpec("pseudo_euclidean", 3))
    box, res, tol = (-2.0, 2.0), 41, 1e-6
    cell = (box[1] - box[0]) / (res - 1)

    t = sample_tube(M3, [(0, 0, 0), (1, 0, 0)], box, res, tol)
    rank = int(np.linalg.matrix_rank(t.points - t.points[0], tol=1e-9)) if len(t) > 1 else 0

    s = sample_tube(M3, [(0, 0, 0), (0, 0, 1)], box, res, tol)
    dev_s = float(np.max(np.abs(np.abs(s.points[:, 0]) - np.abs(s.points[:, 1]))))

    n = sample_tube(M3, [(0, 0, 0), (1, 1, 0)], box, res, tol, allow_null=True)
    dev_n = float(np.max(np.abs(n.points[:, 0] - n.points[:, 1])))

    ok = rank == 1 and len(s) > 0 and dev_s <= cell and len(n) > 0 and dev_n <= cell
    detail = (
        f"timelike {len(t)} pts rank {rank}; spacelike {len(s)} pts max ||r1|-|r2|| = {dev_s:.1e}; "
        f"null {len(n)} pts max |r1-r2| = {dev_n:.1e} (cell {cell:g})"
    )
    return ok, detail


# ---------------------------------------------------------------- criterion 5

def criterion_5(configs: dict) -> tuple[bool, str]:
    mf = punctured_plane_metric(1.0)
    want = 0.5 * (2 * math.sqrt(3) + math.pi / 3) ** 2
    solved = sigma_riemannian(mf, (-2.0, 0.0), (2.0, 0.0))
    rel = abs(solved - want) / want

    space = make_space(SpaceSpec("punctured_plane", 2, {"a": 1.0}))
    rng = np.random.default_rng(5)
    free_err, n_free, n_shadow, shadow_gap = 0.0, 0, 0, 0.0
    while n_free < 200 or n_shadow < 50:
        r = rng.uniform(1.0, 3.0, 2)
        ang = rng.uniform(-math.pi, math.pi, 2)
        x = r[0] * np.array([math.cos(ang[0]), math.sin(ang[0])])
        y = r[1] * np.array([math.cos(ang[1]), math.sin(ang[1])])
        s = float(space.sigma(x, y))
        e = 0.5 * float((x - y) @ (x - y))
        if segment_hits_disk(x, y, 1.0):
            n_shadow += 1
            assert abs(s - 0.5 * around_hole_oracle(x, y, 1.0) ** 2) <= 1e-9 * max(1.0, s)
            shadow_gap = max(shadow_gap, s - e)
        else:
            n_free += 1
            free_err = max(free_err, abs(s - e) / max(1.0, e))

    # solver evidence on a shadowed pair: sigma_R > sigma_E
    x, y = (-2.0, 0.3), (2.0, -0.2)
    solved_shadow = sigma_riemannian(mf, x, y)
    e_shadow = 0.5 * ((x[0] - y[0]) ** 2 + (x[1] - y[1]) ** 2)

    res = run_cli("euclid", "--space", configs["punctured"])
    doc = json.loads(res.stdout) if res.returncode == 0 else {}
    cond2_fail = doc.get("cond2") == "fail"

    ok = rel <= 1e-5 and free_err <= 1e-9 and solved_shadow > e_shadow and shadow_gap > 0 and cond2_fail
    detail = (
        f"solver rel err {rel:.1e}; {n_free} free pairs max err {free_err:.1e}; "
        f"shadowed sigma_R - sigma_E = {solved_shadow - e_shadow:.3f} > 0; euclid cond2 = {doc.get('cond2')}"
    )
    return ok, detail


# ---------------------------------------------------------------- criterion 6

def criterion_6() -> tuple[bool, str]:
    mf = sphere_metric()
    S2 = make_space(SpaceSpec("sphere", 2))
    rng = np.random.default_rng(6)
    worst = 0.0
    for _ in range(100):
        a = (rng.uniform(0.3, math.pi - 0.3), rng.uniform(-1.5, 1.5))
        b = (rng.uniform(0.3, math.pi - 0.3), rng.uniform(-1.5, 1.5))
        want = 0.5 * great_circle_oracle(a, b) ** 2
        worst = max(worst, abs(sigma_riemannian(mf, a, b) - want))
    id1 = id2 = id3 = 0.0
    for _ in range(20):
        a = np.array([rng.uniform(0.5, math.pi - 0.5), rng.uniform(-1.0, 1.0)])
        b = np.array([rng.uniform(0.5, math.pi - 0.5), rng.uniform(-1.0, 1.0)])
        d = check_worldfunction_identities(S2, a, b, metric=mf)
        id1 = max(id1, abs(d.identity1))
        id2 = max(id2, d.delta_sigma_rel)
        id3 = max(id3, d.metric_x2)
    ok = worst <= 1e-6 and id1 <= 1e-4 and id2 <= 1e-4
    detail = (
        f"100 pairs max |sigma - great circle| = {worst:.1e}; 20 pairs identity(1) {id1:.1e}, "
        f"Delta.sigma (rel) {id2:.1e}, g(x') back-transport {id3:.1e}"
    )
    return ok, detail


# ---------------------------------------------------------------- criterion 7

def _line_angle(a, b) -> float:
    c = abs(float(a @ b)) / (np.linalg.norm(a) * np.linalg.norm(b))
    return math.acos(min(1.0, c))


def criterion_7() -> tuple[bool, str]:
    E3 = make_space(SpaceSpec("euclidean", 3))
    rng = np.random.default_rng(7)
    eu_ok, eu_angle = True, 0.0
    for _ in range(50):
        x, x2, u = rng.normal(size=(3, 3))
        res = collinearity_cone(E3, E3.metric_field, x, x2, u)
        eu_ok &= res.degenerate and len(res.solutions) > 0
        for s in res.solutions:
            eu_angle = max(eu_angle, _line_angle(s.direction, u))
    eu_ok &= eu_angle <= 1e-2

    M3 = make_space(SpaceSpec("pseudo_euclidean", 3))
    spacelike = collinearity_cone(M3, M3.metric_field, (0, 0, 0), (0.2, 0.1, -0.3), (0, 0, 1))
    null = collinearity_cone(M3, M3.metric_field, (0, 0, 0), (0.2, 0.1, -0.3), (1, 1, 0))

    def non_parallel(res):
        return sum(_line_angle(s.direction, res.u_dir) > 1e-2 for s in res.solutions)

    S2 = make_space(SpaceSpec("sphere", 2))
    x, x2 = np.array([1.2, 0.1]), np.array([1.4, 0.35])
    arc = great_circle_oracle(x, x2)
    td = sigma_derivatives(S2, x, x2)
    u = np.linalg.solve(S2.metric_field.g(x2), td.grad_x2)
    sphere = collinearity_cone(S2, S2.metric_field, x, x2, u)

    ok = eu_ok and non_parallel(spacelike) >= 1 and non_parallel(null) >= 1 and arc <= 0.5 and sphere.degenerate
    detail = (
        f"50 Euclidean queries degenerate (max angle {eu_angle:.1e}); Minkowski spacelike {non_parallel(spacelike)} "
        f"and null {non_parallel(null)} non-parallel solutions; sphere arc {arc:.2f} degenerate={sphere.degenerate}"
    )
    return bool(ok), detail


# ---------------------------------------------------------------- criterion 8

def _ellipsoid_segment(rng) -> tuple[int, int]:
    E2 = make_space(SpaceSpec("euclidean", 2))
    f1, f2 = np.array([-1.0, 0.25]), np.array([1.5, -0.5])
    R = np.vstack([f1 + np.outer(np.linspace(0, 1, 257), f2 - f1), rng.uniform(-2, 2, (300, 2))])
    bad = sum(
        bool(ellipsoid_contains(E2, f1, f2, f1, r)) != bool(segment_contains(E2, f1, f2, r)) for r in R
    )
    return len(R), bad


def _euclidean_cylinders(rng) -> tuple[int, int]:
    E3 = make_space(SpaceSpec("euclidean", 3))
    tested = bad = 0
    for _ in range(10):
        p0, p1 = rng.normal(size=(2, 3))
        p1s = p0 + rng.uniform(0.2, 0.8) * (p1 - p0)
        axis = (p1 - p0) / np.linalg.norm(p1 - p0)
        perp = np.linalg.svd(axis[None])[2][1:]
        radius = rng.uniform(0.3, 1.5)
        through = p0 + radius * perp[0]
        for _ in range(60):
            if rng.random() < 0.5:  # member by construction
                ang = rng.uniform(0, 2 * math.pi)
                r = p0 + rng.uniform(-3, 3) * axis + radius * (math.cos(ang) * perp[0] + math.sin(ang) * perp[1])
            else:
                r = rng.normal(size=3) * 2
            a = bool(cylinder_contains(E3, p0, p1, through, r))
            b = bool(cylinder_contains(E3, p0, p1s, through, r))
            tested += 1
            bad += a != b
    return tested, bad


def _minkowski_cylinder_search(rng) -> tuple[int, int]:
    """Look for a grid point on exactly one of C(P0,P1;P) and C(P0,P1';P)."""
    M3 = make_space(SpaceSpec("pseudo_euclidean", 3))
    grid = np.stack(np.meshgrid(*[np.linspace(-2, 2, 11)] * 3, indexing="ij"), -1).reshape(-1, 3)
    tested = found = 0
    for k in range(6):
        p0 = rng.normal(size=3) * 0.5
        d = rng.normal(size=3)
        d[0] = (1.5 if k % 2 == 0 else 0.3) * np.linalg.norm(d[1:])  # alternate timelike / spacelike axes
        p1 = p0 + d
        through = p0 + rng.normal(size=3)
        for t in (0.25, 0.5):
            p1s = p0 + t * d
            for r in grid:
                try:
                    a = bool(cylinder_contains(M3, p0, p1, through, r, tol=1e-6))
                    b = bool(cylinder_contains(M3, p0, p1s, through, r, tol=1e-6))
                except ImaginaryArea:
                    continue
                tested += 1
                found += a != b
    return tested, found


def _euclidean_inclusion(rng) -> tuple[int, int]:
    E3 = make_space(SpaceSpec("euclidean", 3))
    tested = bad = 0
    for _ in range(10):
        p0, p1, p2 = rng.normal(size=(3, 3))
        for t in np.linspace(0, 1, 55):
            r = p0 + t * (p1 - p0)
            if not segment_contains(E3, p0, p1, r):
                continue
            tested += 1
            bad += not tube_contains(E3, [p0, p1, p2], r)
    return tested, bad


def criterion_8() -> tuple[bool, str]:
    rng = np.random.default_rng(8)
    n_ell, bad_ell = _ellipsoid_segment(rng)
    n_cyl, bad_cyl = _euclidean_cylinders(rng)
    n_mink, found = _minkowski_cylinder_search(rng)
    n_inc, bad_inc = _euclidean_inclusion(rng)
    ok = (
        n_ell >= 500 and bad_ell == 0
        and n_cyl >= 500 and bad_cyl == 0
        and n_mink >= 500 and found >= 1
        and n_inc >= 500 and bad_inc == 0
    )
    detail = (
        f"ellipsoid=segment {n_ell - bad_ell}/{n_ell}; Euclidean cylinders agree {n_cyl - bad_cyl}/{n_cyl}; "
        f"Minkowski counterexamples {found} in {n_mink} points (need >= 1); inclusion {n_inc - bad_inc}/{n_inc}"
    )
    return ok, detail


# ---------------------------------------------------------------- criterion 9

def criterion_9(configs: dict, tmp: Path) -> tuple[bool, str]:
    commands = [
        ["eval", "--space", configs["mink2"], "--p", "0,0", "--q", "0,1"],
        ["tube", "--space", configs["mink3"], "--basis", "0,0,0;0,0,1", "--window", "-2,2", "--resolution", "21", "--tol", "1e-6"],
        ["dim", "--space", configs["euclid3"], "--seed", "3"],
        ["euclid", "--space", configs["sphere"], "--seed", "3"],
        ["geodesic", "--space", configs["punctured"], "--p", "-2,0", "--q", "2,0"],
        ["cone", "--space", configs["mink3"], "--p", "0,0,0", "--q", "0,0,0", "--u", "0,0,1", "--resolution", "2000"],
        ["identities", "--space", configs["sphere"], "--p", "1.5,0", "--q", "1.2,0.7"],
    ]
    same = 0
    for i, cmd in enumerate(commands):
        outs = []
        for j, threads in enumerate(("1", "4")):
            target = tmp / f"out_{i}_{j}"
            env = dict(os.environ, SIGMA_GEOMETRY_THREADS=threads)
            res = run_cli(*cmd, "--out", target, env=env)
            outs.append((res.returncode, target.read_bytes() if target.exists() else b""))
        stdout = run_cli(*cmd).stdout.encode()
        same += outs[0] == outs[1] and outs[0][0] == 0 and stdout == outs[0][1] and len(stdout) > 0
    return same == len(commands), f"{same}/{len(commands)} subcommands byte-identical across repeats and thread counts"


# ---------------------------------------------------------------- pytest glue

LIMITS = {1: 1, 2: 1, 3: 10, 4: 30, 5: 30, 6: 60, 7: 60, 8: 10}


def _run(number: int, fn, *args) -> bool:
    start = time.perf_counter()
    ok, detail = fn(*args)
    elapsed = time.perf_counter() - start
    limit = LIMITS.get(number)
    if limit is not None and elapsed > limit:
        ok = False
        detail += f"; over the {limit} s budget"
    return report(number, ok, detail, elapsed)


def _configs(tmp: Path) -> dict:
    paths = {}
    for name, doc in CONFIGS.items():
        p = tmp / f"{name}.json"
        p.write_text(json.dumps(doc))
        paths[name] = p
    return paths


@pytest.mark.parametrize("number", [1, 2, 3, 4, 6, 7, 8])
def test_library_criterion(number):
    fn = globals()[f"criterion_{number}"]
    assert _run(number, fn)


def test_criterion_5(configs):
    assert _run(5, criterion_5, configs)


def test_criterion_9(configs, tmp_path):
    assert _run(9, criterion_9, configs, tmp_path)


def test_sphere_cylinder_counterexample():
    """In curved space the two cylinders differ: a point on one is off the other."""
    S2 = make_space(SpaceSpec("sphere", 2))
    p0, p1, p1s = (math.pi / 2, 0.0), (math.pi / 2, 0.8), (math.pi / 2, 0.4)
    through = (math.pi / 2 - 0.5, 0.4)

    def f(s):
        return cylinder_contains(S2, p0, p1, through, (math.pi / 2 - s, 1.5)).residual

    s = brentq(f, 0.1, 0.9, xtol=1e-15)
    r = (math.pi / 2 - s, 1.5)
    assert cylinder_contains(S2, p0, p1, through, r)
    other = cylinder_contains(S2, p0, p1s, through, r)
    assert not other and abs(other.residual) > 1e-3


if __name__ == "__main__":
    import tempfile

    with tempfile.TemporaryDirectory() as d:
        tmp = Path(d)
        cfg = _configs(tmp)
        results = [
            _run(1, criterion_1),
            _run(2, criterion_2),
            _run(3, criterion_3),
            _run(4, criterion_4),
            _run(5, criterion_5, cfg),
            _run(6, criterion_6),
            _run(7, criterion_7),
            _run(8, criterion_8),
            _run(9, criterion_9, cfg, tmp),
        ]
    sys.exit(0 if all(results) else 1)
