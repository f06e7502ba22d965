"""Pseudo-arclength continuation of the shooting residual in (lam, height).

The solution set of the Neumann problem reduces, through the shooting map,
to the zero set of R(lam, s0) = theta(1; lam, s0) in the plane.  trace()
follows that curve with a secant predictor and a damped-Newton corrector
under an arclength normalization, recording folds and flagging points
whose graphs pass close to vertical.  Steps are measured in per-point
relative scales of (lam, s0) so branches that span decades advance in a
logarithmic number of steps.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .shoot import Blocked, Caps, integrate_path, shoot_residual, solution_from_path

__all__ = ["BranchPoint", "Branch", "trace", "seed_from_lambda0", "solve_lambda_at_height", "diagram", "DiagramRecord"]

NEAR_SINGULAR_COS = 1e-3


@dataclass
class BranchPoint:
    lam: float
    s0: float
    sup_norm: float
    deriv_norm: float
    kind: str  # "regular" | "near-singular"
    residual: float  # |theta(1)| of the independent verification run
    curv_residual: float = 0.0


@dataclass
class Branch:
    points: list
    origin: str
    terminated_by: str
    terminal_lam: float | None = None

    @property
    def folds(self):
        """Indices where the lam increment changes sign."""
        lams = [p.lam for p in self.points]
        out = []
        for i in range(1, len(lams) - 1):
            d0 = lams[i] - lams[i - 1]
            d1 = lams[i + 1] - lams[i]
            if d0 * d1 < 0:
                out.append(i)
        return out

    def lambdas(self):
        return np.array([p.lam for p in self.points])

    def sup_norms(self):
        return np.array([p.sup_norm for p in self.points])


def _residual(pb_family, lam, s0, caps):
    if lam < 0 or s0 < 0:
        return math.nan
    r = shoot_residual(pb_family.at(lam), s0, caps=caps)
    if isinstance(r, Blocked):
        return math.nan
    return r


def _scales(lam, s0):
    return max(abs(lam), 1e-2), max(abs(s0), 1e-4)


def _corrector(pb_family, lam, s0, tangent, ref, caps, tol, max_iter=10):
    """Damped Newton on (residual, arclength normalization)."""
    sl, ss = _scales(*ref)
    for _ in range(max_iter):
        r = _residual(pb_family, lam, s0, caps)
        n = tangent[0] * (lam - ref[0]) / sl + tangent[1] * (s0 - ref[1]) / ss
        if math.isnan(r):
            return None
        if abs(r) <= tol and abs(n) <= 1e-9:
            return lam, s0
        dl = 1e-6 * max(abs(lam), 1e-3)
        ds = 1e-6 * max(abs(s0), 1e-6)
        r_l = _residual(pb_family, lam + dl, s0, caps)
        r_s = _residual(pb_family, lam, s0 + ds, caps)
        if math.isnan(r_l) or math.isnan(r_s):
            return None
        j00 = (r_l - r) / dl
        j01 = (r_s - r) / ds
        j10 = tangent[0] / sl
        j11 = tangent[1] / ss
        det = j00 * j11 - j01 * j10
        if abs(det) < 1e-300:
            return None
        step_l = -(r * j11 - n * j01) / det
        step_s = -(n * j00 - r * j10) / det
        damp = 1.0
        base = abs(r) + abs(n)
        for _ in range(6):
            cand = (lam + damp * step_l, s0 + damp * step_s)
            rc = _residual(pb_family, cand[0], cand[1], caps)
            nc = tangent[0] * (cand[0] - ref[0]) / sl + tangent[1] * (cand[1] - ref[1]) / ss
            if not math.isnan(rc) and abs(rc) + abs(nc) < base:
                lam, s0 = cand
                break
            damp *= 0.5
        else:
            return None
    r = _residual(pb_family, lam, s0, caps)
    if not math.isnan(r) and abs(r) <= tol:
        return lam, s0
    return None


def _tangent_fd(pb_family, lam, s0, caps):
    sl, ss = _scales(lam, s0)
    r0 = _residual(pb_family, lam, s0, caps)
    dl = 1e-6 * max(abs(lam), 1e-3)
    ds = 1e-6 * max(abs(s0), 1e-6)
    rl = (_residual(pb_family, lam + dl, s0, caps) - r0) / dl * sl
    rs = (_residual(pb_family, lam, s0 + ds, caps) - r0) / ds * ss
    norm = math.hypot(rl, rs)
    if norm == 0 or math.isnan(norm):
        return (0.0, 1.0)
    return (rs / norm, -rl / norm)


def _point_diagnostics(pb_family, lam, s0, caps):
    path = integrate_path(pb_family.at(lam), s0, caps=caps, collect=True)
    if path.terminal != "reached":
        return None
    sol = solution_from_path(pb_family.at(lam), path)
    kind = "near-singular" if path.min_cos < NEAR_SINGULAR_COS else "regular"
    return BranchPoint(lam, s0, sol.sup_norm, sol.deriv_norm, kind, abs(path.theta_end), sol.residual)


def trace(
    pb_family,
    start,
    step=0.05,
    max_points=200,
    lam_max=1e3,
    s_floor=1e-6,
    s_ceiling=1e7,
    h_min=1e-7,
    corrector_tol=1e-8,
    direction=(0.0, 1.0),
    origin="Manual",
    caps=None,
):
    """Follow the branch of Neumann solutions through (lam, s0) space.

    start must satisfy |theta(1)| <= 1e-6.  The trace stops at max_points,
    at lam_max, when the branch returns to the trivial line (s0 below
    s_floor; the terminal lam is recorded), or when the corrector keeps
    failing at the minimum step, which is the usual sign of a singular
    transition ahead.
    """
    caps = caps or Caps(dtheta_mesh=2e-3, dx_mesh=5e-3)
    lam, s0 = float(start[0]), float(start[1])
    r0 = _residual(pb_family, lam, s0, caps)
    if math.isnan(r0) or abs(r0) > 1e-6:
        raise ValueError("start point is not converged (|theta(1)| > 1e-6)")

    first = _point_diagnostics(pb_family, lam, s0, caps)
    if first is None:
        raise ValueError("start point does not integrate to x = 1")
    points = [first]
    tangent = _tangent_fd(pb_family, lam, s0, caps)
    if tangent[0] * direction[0] + tangent[1] * direction[1] < 0:
        tangent = (-tangent[0], -tangent[1])

    h = step
    terminated = "max-points"
    terminal_lam = None
    while len(points) < max_points:
        sl, ss = _scales(lam, s0)
        pred = (lam + h * tangent[0] * sl, s0 + h * tangent[1] * ss)
        got = _corrector(pb_family, pred[0], pred[1], tangent, pred, caps, corrector_tol)
        if got is None:
            if h <= h_min:
                terminated = "corrector-failure"
                break
            h = max(h * 0.5, h_min)
            continue
        new_lam, new_s0 = got
        if new_s0 <= s_floor:
            terminated = "trivial-line"
            terminal_lam = new_lam
            break
        if new_lam > lam_max:
            terminated = "lambda-max"
            break
        if new_lam < 0.0:
            terminated = "lambda-min"
            break
        if new_s0 > s_ceiling:
            terminated = "height-max"
            break
        diag = _point_diagnostics(pb_family, new_lam, new_s0, caps)
        if diag is None or diag.residual > 10 * corrector_tol:
            if h <= h_min:
                terminated = "corrector-failure"
                break
            h = max(h * 0.5, h_min)
            continue
        new_tan = ((new_lam - lam) / sl / h, (new_s0 - s0) / ss / h)
        norm = math.hypot(*new_tan)
        if norm > 0:
            tangent = (new_tan[0] / norm, new_tan[1] / norm)
        lam, s0 = new_lam, new_s0
        points.append(diag)
        h = min(h * 1.6, step * 4)

    return Branch(points=points, origin=origin, terminated_by=terminated, terminal_lam=terminal_lam)


def singular_sweep(pb_family, lams, origin="SingularSweep"):
    """Branch assembled from the two-sided jump construction over a lam sweep.

    Ordinary tracing cannot cross into the singular regime (the shooting
    residual ceases to exist there); the sweep provides the dashed tail of
    the diagram directly.  Points are flagged near-singular: their graphs
    carry vertical tangents at the node.
    """
    from .singular import Absent, solve_singular

    points = []
    for lam in sorted(float(l) for l in lams):
        got = solve_singular(pb_family.at(lam))
        if isinstance(got, Absent):
            continue
        deriv = float(max(np.max(np.abs(got.dus_left)), np.max(np.abs(got.dus_right))))
        points.append(BranchPoint(lam, got.us_left[0], got.sup_norm, deriv, "near-singular", 0.0))
    return Branch(points=points, origin=origin, terminated_by="sweep-end")


def seed_from_lambda0(pb_family, s0_seed=1e-3, tol=1e-10):
    """First branch point just off the bifurcation from the trivial line.

    Computes the principal eigenvalue of the weight, then Newton-adjusts
    lam at height s0_seed until the shooting residual vanishes.
    """
    from .eigen import principal_neumann

    if pb_family.f.d2_zero is None:
        raise ValueError("seeding from the eigenvalue needs a p = 1 nonlinearity")
    lam0 = principal_neumann(pb_family.weight).eigenvalue
    lam = solve_lambda_at_height(pb_family, s0_seed, lam0, tol=tol)
    return lam, s0_seed


def solve_lambda_at_height(pb_family, s0, lam_guess, tol=1e-10, max_iter=60):
    """Newton in lam for theta(1; lam, s0) = 0 at fixed height."""
    caps = Caps()
    lam = float(lam_guess)
    for _ in range(max_iter):
        r = _residual(pb_family, lam, s0, caps)
        if math.isnan(r):
            raise RuntimeError("shooting blocked while solving for lam")
        if abs(r) <= tol:
            return lam
        dl = 1e-7 * max(abs(lam), 1e-3)
        r1 = _residual(pb_family, lam + dl, s0, caps)
        if math.isnan(r1) or r1 == r:
            raise RuntimeError("degenerate Newton step while solving for lam")
        lam = lam - r * dl / (r1 - r)
    raise RuntimeError("Newton did not converge to the requested residual")


# ---------------------------------------------------------------------------
# diagram assembly

@dataclass
class DiagramRecord:
    rows: list  # (lam, sup_norm, kind)
    csv: str
    svg: str

    @property
    def n_points(self):
        return len(self.rows)


def _hausdorff(a, b):
    """Symmetric Hausdorff distance between point sets in scaled coords."""
    def one_way(p, q):
        return max(min(math.hypot(x - u, y - v) for (u, v) in q) for (x, y) in p)

    return max(one_way(a, b), one_way(b, a))


def dedupe_branches(branches, tol=1e-4):
    """Drop branches whose (lam, s0) traces coincide within tol."""
    all_pts = [
        [(p.lam, p.s0) for p in b.points] for b in branches
    ]
    scale_l = max(max((abs(x) for pts in all_pts for (x, _) in pts), default=1.0), 1.0)
    scale_s = max(max((abs(y) for pts in all_pts for (_, y) in pts), default=1.0), 1.0)
    kept = []
    kept_pts = []
    for b, pts in zip(branches, all_pts):
        scaled = [(x / scale_l, y / scale_s) for (x, y) in pts]
        if any(_hausdorff(scaled, other) <= tol for other in kept_pts):
            continue
        kept.append(b)
        kept_pts.append(scaled)
    return kept


def diagram(branches, dedupe_tol=1e-4, logy=False):
    """Merge branches into one diagram: CSV rows plus a standalone SVG."""
    from .emit import csv_text, svg_plot

    branches = dedupe_branches(branches, tol=dedupe_tol)
    rows = []
    series = []
    for b in branches:
        rows.extend((p.lam, p.sup_norm, p.kind) for p in b.points)
        # split each branch into kind-constant runs so singular stretches dash
        run_kind = None
        run_x, run_y = [], []
        for p in b.points:
            if run_kind is None or p.kind == run_kind:
                run_kind = p.kind
            else:
                series.append({"x": run_x, "y": run_y, "dashed": run_kind == "near-singular"})
                run_x, run_y = [run_x[-1]], [run_y[-1]]
                run_kind = p.kind
            run_x.append(p.lam)
            run_y.append(p.sup_norm)
        if run_x:
            series.append({"x": run_x, "y": run_y, "dashed": run_kind == "near-singular"})
    csv = csv_text(("lambda", "sup_norm", "kind"), rows)
    svg = svg_plot(series, xlabel="lambda", ylabel="sup|u|", logy=logy)
    return DiagramRecord(rows=rows, csv=csv, svg=svg)
