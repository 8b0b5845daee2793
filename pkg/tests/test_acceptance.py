"""Acceptance suite: one test per criterion, each printing a PASS/FAIL line.

Every tolerance below is pinned to the value the criterion states.
"""

import itertools
import math
import subprocess
import sys
import time

import numpy as np

from isoprofile.cli import main
from isoprofile.inequality_checks import (
    check_bp,
    check_concavity_transform,
    check_derivative_asymptotics,
    minplus_table,
    second_incremental_quotient,
)
from isoprofile.model_space import max_domain, omega, s_lambda
from isoprofile.needle import (
    NeedleDensity,
    cd_density_check,
    needle_isoperimetric,
    needle_profile,
    riccati_compare,
    uniform_points,
)
from isoprofile.profiles import (
    ConeModel,
    GridSpec,
    SampledProfile,
    SpaceForm,
    sample_profile,
    small_volume_density_limit,
)
from isoprofile.tubular import (
    INTERIOR,
    TubeBoundInput,
    jacobian_derivatives_at_zero,
    jacobian_derivatives_fd,
    oracle_sweep,
    tube_volume_bound,
)

SEED = 20240601


def test_criterion_01_psi_quadratic_in_dimension_two(criterion):
    start = time.perf_counter()
    worst = worst_q = 0.0
    for K in (-1.0, 0.0, 1.0):
        p = sample_profile(SpaceForm.from_KN(K, 2), GridSpec("uniform", 1.0, 2.0, 101))
        psi = p.values**2
        h = p.step
        scale = float(np.max(psi))
        q = np.array([second_incremental_quotient(psi, i, h) for i in range(1, psi.size - 1)])
        # both the quotient and the raw second difference are held to 1e-9 * scale
        worst_q = max(worst_q, float(np.max(np.abs(q + 2 * K))) / scale)
        worst = max(worst, float(np.max(np.abs(q + 2 * K) * h * h)) / scale)
    elapsed = time.perf_counter() - start
    criterion(1, worst_q <= 1e-9 and worst <= 1e-9 and elapsed < 1.0,
              f"max |D2 psi + 2K| / scale = {worst_q:.2e}, times h^2 = {worst:.2e} (<= 1e-9), "
              f"{elapsed:.2f}s (< 1s)")


def test_criterion_02_bp_residual_is_second_order(criterion):
    start = time.perf_counter()
    ok, worst_frac, worst_ratio = True, 0.0, math.inf
    for K in (-1.0, 0.0, 1.0):
        for N in (2.0, 3.0, 5.0):
            form = SpaceForm.from_KN(K, N)
            errs = []
            for h in (1e-2, 1e-3):
                n = int(round(1.0 / h)) + 1
                p = sample_profile(form, GridSpec("uniform", 1.0, 2.0, n))
                rep = check_bp(p, K, N)
                scale = float(np.max(p.values))
                err = float(np.max(np.abs(rep.residuals)))
                worst_frac = max(worst_frac, err / (10 * h * h * scale))
                ok &= err <= 10 * h * h * scale and rep.ok
                errs.append(err)
            ratio = errs[0] / errs[1]
            worst_ratio = min(worst_ratio, ratio)
            ok &= ratio >= 50
    elapsed = time.perf_counter() - start
    ok &= elapsed < 10.0
    criterion(2, ok, f"max |res| / (10 h^2 scale) = {worst_frac:.3f} (<= 1), "
                     f"min refinement ratio = {worst_ratio:.1f} (>= 50), {elapsed:.2f}s (< 10s)")


def test_criterion_03_model_ball_tube_equality(criterion):
    start = time.perf_counter()
    rows = list(oracle_sweep(
        [-1.0, 0.0, 1.0], [2.0, 3.0, 5.0],
        np.linspace(0.05, 1.5, 20), np.linspace(0.05, 1.5, 20),
    ))
    elapsed = time.perf_counter() - start
    worst = max(r.gap / r.rhs for r in rows)
    criterion(3, worst <= 1e-10 and elapsed < 5.0 and len(rows) == 3600,
              f"{len(rows)} rows, max gap / rhs = {worst:.2e} (<= 1e-10), {elapsed:.2f}s (< 5s)")


def test_criterion_04_annulus_and_disk(criterion):
    disk = TubeBoundInput(per0=2 * math.pi, c=1.0, K=0.0, N=2.0)
    ext = tube_volume_bound(disk, 1.0)
    inn = tube_volume_bound(disk, 1.0, INTERIOR)
    e1 = abs(ext - 3 * math.pi) / (3 * math.pi)
    e2 = abs(inn - math.pi) / math.pi
    criterion(4, e1 <= 1e-8 and e2 <= 1e-8,
              f"exterior rel err {e1:.1e}, interior rel err {e2:.1e} (<= 1e-8)")


def test_criterion_05_jacobian_derivatives_at_zero(criterion):
    rng = np.random.default_rng(SEED)
    worst = 0.0
    for _ in range(100):
        c, K = rng.uniform(-2, 2, size=2)
        N = rng.uniform(1.5, 6)
        exact = jacobian_derivatives_at_zero(c, K, N)
        fd = jacobian_derivatives_fd(c, K, N)
        worst = max(worst, abs(fd[0] - exact[0]), abs(fd[1] - exact[1]))
    criterion(5, worst <= 1e-6, f"100 random (c, K, N): max |FD - closed form| = {worst:.1e} (<= 1e-6)")


def _non_cd_densities():
    N = 3.0
    out = []
    for a in (0.5, 1.0, 2.0):  # h = e^{a t^2}: log-convex
        out.append((NeedleDensity.from_function(lambda t, a=a: np.exp(a * t * t), 0.0, 1.0, 401, N), 0.0))
    for a in (1.0, 2.0, 3.0):  # g = cosh(a t) has g'' = a^2 g > 0
        out.append((NeedleDensity.from_function(lambda t, a=a: np.cosh(a * t) ** (N - 1), 0.0, 1.0, 401, N), 0.0))
    for b in (1.0, 4.0):  # g = 1 + b t^2
        out.append((NeedleDensity.from_function(lambda t, b=b: (1 + b * t * t) ** (N - 1), 0.0, 1.0, 401, N), 0.0))
    # the sphere density checked against a curvature it does not have
    out.append((NeedleDensity.closed_form("sin_k", 1.0, N, 0.2, 2.9, origin=0.0), 3.0))
    # Euclidean cone density against positive curvature
    out.append((NeedleDensity.from_function(lambda t: t ** (N - 1), 0.5, 2.0, 401, N), 0.5))
    return out


def test_criterion_06_riccati_and_cd_suite(criterion):
    rng = np.random.default_rng(SEED + 6)
    passed = 0
    for _ in range(100):
        k = rng.uniform(-2, 2)
        lam = rng.uniform(-1.5, 1.5)
        N = rng.uniform(1.5, 5)
        b = rng.uniform(0.3, 0.95) * min(max_domain(k, lam), 3.0)
        h = NeedleDensity.closed_form("s_lambda", k, N, 0.0, b, lam=lam, K=k * (N - 1))
        t = uniform_points(0.0, b, 801)
        u = np.array([s_lambda(k, lam, float(x)) for x in t])
        if riccati_compare(u, b, -lam, k).ok and cd_density_check(h, n=801).ok:
            passed += 1
    bad = _non_cd_densities()
    flagged = sum(not cd_density_check(h, K=K).ok for h, K in bad)
    criterion(6, passed == 100 and flagged == len(bad) == 10,
              f"s-family passing both checks: {passed}/100, non-CD densities flagged: {flagged}/{len(bad)}")


def test_criterion_07_needle_matches_closed_form(criterion):
    start = time.perf_counter()
    sine = NeedleDensity.closed_form("sin_k", 1.0, 2.0, 0.0, math.pi, K=1.0)
    n = 2000
    p = needle_profile(sine, GridSpec.parse("uniform:0.1:1.9:19"), n=n, m=2)
    err = float(np.max(np.abs(p.values - np.sqrt(p.volumes * (2 - p.volumes)))))
    never_better = True
    for v in p.volumes:
        res = needle_isoperimetric(sine, float(v), n=n, m=2)
        never_better &= res.value >= res.single_interval_value and not res.budget_exceeded
    elapsed = time.perf_counter() - start
    tol = max(2 / n, 1e-3)
    criterion(7, err <= tol and never_better and elapsed < 30.0,
              f"max error {err:.1e} (<= {tol:.0e}), m=2 never beats m=1: {never_better}, {elapsed:.2f}s (< 30s)")


def test_criterion_08_minplus_decomposition(criterion):
    grid = GridSpec("uniform", 0.1, 3.0, 30)
    degenerate = True
    for forms in ([(0, 2), (0, 2)], [(1, 2), (-1, 2)], [(0, 3), (1, 3), (-1, 3)]):
        profiles = [sample_profile(SpaceForm.from_KN(K, N), grid) for K, N in forms]
        table = minplus_table(profiles, max_parts=2)
        degenerate &= all(s.n_parts == 1 for s in table.splits)

    v = np.arange(1, 31) * 0.1
    lin = SampledProfile(v, 2.5 * v)
    table = minplus_table([lin, lin], max_parts=2)
    scale = float(np.max(lin.values))
    worst = float(np.max(np.abs(table.values - lin.values))) / scale
    units = np.rint(v / 0.1).astype(int)
    value = dict(zip(units, lin.values))
    for u in units:
        for a in range(1, u):
            worst = max(worst, abs(value[a] + value[u - a] - value[u]) / scale)
    fewest = all(s.n_parts == 1 for s in table.splits)
    criterion(8, degenerate and worst <= 1e-12 and fewest,
              f"strictly subadditive inputs degenerate: {degenerate}, "
              f"linear profile split spread {worst:.1e} (<= 1e-12), fewest-parts tie-break: {fewest}")


def test_criterion_09_small_volume_density_limit(criterion):
    grid = GridSpec.parse("geometric:1e-8:1:81")
    cases = [
        ("Euclid N=2", SpaceForm.from_KN(0, 2), 2, 2 * math.sqrt(math.pi)),
        ("sphere N=2", SpaceForm.from_KN(1, 2), 2, 2 * math.sqrt(math.pi)),
    ]
    for N in (2, 3):
        for avr in (0.25, 0.5):
            cases.append((f"cone N={N} avr={avr}", ConeModel(N, avr), N, N * (omega(N) * avr) ** (1 / N)))
    worst, parts = 0.0, []
    for name, model, N, target in cases:
        est = small_volume_density_limit(sample_profile(model, grid), N).limit
        rel = abs(est - target) / target
        worst = max(worst, rel)
        parts.append(f"{name} {rel:.0e}")
    criterion(9, worst <= 0.01, f"max rel err {worst:.1e} (<= 1%): " + ", ".join(parts))


def test_criterion_10_derivative_asymptotics(criterion):
    grid = GridSpec.parse("geometric:1e-8:1:81")
    models = []
    for N in (2.0, 3.0):
        for K in (-1.0, 0.0, 1.0):
            models.append((f"K={K:g} N={N:g}", SpaceForm.from_KN(K, N), N))
        for avr in (0.25, 0.5, 1.0):
            models.append((f"cone avr={avr} N={N:g}", ConeModel(N, avr), N))
    worst = 0.0
    for _, model, N in models:
        est = check_derivative_asymptotics(sample_profile(model, grid), N).ratio_of_limits
        target = (N - 1) / N
        worst = max(worst, abs(est - target) / target)
    criterion(10, worst <= 0.02, f"{len(models)} models, max rel deviation of ratio {worst:.1e} (<= 2%)")


def test_criterion_11_concavity_transforms(criterion):
    worst = 0.0
    for K in (1.0, -1.0):
        p = sample_profile(SpaceForm.from_KN(K, 2), GridSpec("uniform", 0.5, 3.0, 51))
        eta = p.values**2 - (-K) * p.volumes**2
        scale = float(np.max(np.abs(eta)))
        worst = max(worst, float(np.max(np.abs(np.diff(eta, 2)))) / scale)
        worst = max(worst, float(np.max(np.abs(eta - 4 * math.pi * p.volumes))) / scale)
        assert check_concavity_transform(p, 2.0, -K).ok
    v = np.linspace(0.1, 2.0, 40)
    flagged = not check_concavity_transform(SampledProfile(v, v**2), 2.0, 0.0).ok
    criterion(11, worst <= 1e-9 and flagged,
              f"eta = 4 pi v to {worst:.1e} * scale (<= 1e-9), I = v^2 flagged: {flagged}")


def test_criterion_12_cli_contract(criterion, tmp_path, capsys):
    codes = []
    for K, N in itertools.product((-1.0, 0.0, 1.0), (2.0, 3.0, 5.0)):
        path = tmp_path / f"form_{K}_{N}.csv"
        main(["model-profile", "--K", str(K), "--N", str(N), "--grid", "uniform:1:2:101", "-o", str(path)])
        codes.append(main(["check", "bp", str(path), "--K", str(K), "--N", str(N)]))
    round_trip = all(c == 0 for c in codes)

    bad = tmp_path / "bad.csv"
    bad.write_text("v,I\n1,2\n2,oops\n3,4\n")
    malformed = main(["check", "bp", str(bad), "--K", "0", "--N", "2"])

    const = tmp_path / "const.csv"
    const.write_text("v,I\n" + "".join(f"{1 + i / 100!r},1\n" for i in range(101)))
    violation = main(["check", "bp", str(const), "--K", "1", "--N", "2"])
    capsys.readouterr()

    def cli(*argv):
        return subprocess.run([sys.executable, "-m", "isoprofile.cli", *argv], capture_output=True, check=False)

    argv = ("model-profile", "--K", "1", "--N", "3", "--grid", "geometric:1e-6:10:64")
    first, second = cli(*argv), cli(*argv)
    identical = first.returncode == 0 and first.stdout == second.stdout and len(first.stdout) > 0

    ok = round_trip and malformed == 2 and violation == 1 and identical
    criterion(12, ok, f"round trip exit codes {sorted(set(codes))}, malformed -> {malformed}, "
                      f"constant profile -> {violation}, byte-identical reruns: {identical}")
