"""Acceptance gate: one test per shipped criterion, plus the surface
property block for the plots that have no published numeric tables.

Every test prints one  criterion NN PASS/FAIL  line so a plain pytest -s
run reads as a checklist.  Tolerances and ensemble sizes are pinned here
and must not be loosened without a ledger entry.
"""

import math
import time

import numpy as np
import pytest

from qdoeblin import channel as ch
from qdoeblin import cli
from qdoeblin import doeblin as db
from qdoeblin import oracles


def _line(num, ok, text):
    tag = f"criterion {num:02d}" if isinstance(num, int) else num
    print(f"{tag} {'PASS' if ok else 'FAIL'}: {text}")


def _mix(lam, first, second):
    j = lam * first.choi.matrix + (1.0 - lam) * second.choi.matrix
    return ch.channel_from_choi(ch.ChoiMatrix(j, first.d_in, first.d_out))


def _read_csv(path):
    lines = path.read_text().split("\n")
    header = lines[0].split(",")
    return [dict(zip(header, line.split(","))) for line in lines[1:] if line]


def test_criterion_01_depolarizing_closed_form():
    t0 = time.perf_counter()
    errs = []
    for p in np.linspace(0.0, 1.0, 11):
        errs.append(abs(db.alpha(ch.depolarizing(float(p))).value - p))
    elapsed = time.perf_counter() - t0
    worst = max(errs)
    ok = worst <= 1e-5 and elapsed <= 5.0
    _line(1, ok, f"alpha(dep_p)=p on 11 points, max err {worst:.2e}, {elapsed:.2f}s")
    assert worst <= 1e-5
    assert elapsed <= 5.0


def test_criterion_02_transpose_tightness():
    errs, seps = [], []
    for p in (1.0, 1.1, 1.2, 1.3):
        a = db.alpha(ch.depolarizing(p)).value
        at = db.alpha_transpose(ch.depolarizing(p)).value
        errs.append(abs(max(a, at) - (2.0 - p)))
        if p > 1.0:
            seps.append((2.0 - p) - a)
    worst = max(errs)
    min_sep = min(seps)
    ok = worst <= 1e-4 and min_sep > 1e-3
    _line(2, ok, f"max(alpha,alphaT)=2-p, max err {worst:.2e},"
                 f" min separation {min_sep:.3f}")
    assert worst <= 1e-4
    assert min_sep > 1e-3


def test_criterion_03_reverse_hermitian_damping_grid():
    t0 = time.perf_counter()
    worst = 0.0
    for p in np.linspace(0.0, 1.0, 6):
        for eta in np.linspace(0.0, 1.0, 6):
            got = db.reverse_alpha_hermitian(ch.gad(float(p), float(eta))).value
            worst = max(worst, abs(1.0 - got - eta))
    elapsed = time.perf_counter() - t0
    ok = worst <= 1e-4 and elapsed <= 60.0
    _line(3, ok, f"1-revH(gad)=eta on 6x6 grid, max err {worst:.2e}, {elapsed:.1f}s")
    assert worst <= 1e-4
    assert elapsed <= 60.0


def test_criterion_04_dephasing_identity_grid():
    t0 = time.perf_counter()
    worst = 0.0
    for p in np.linspace(0.0, 1.0, 21):
        for eta in np.linspace(0.0, 1.0, 21):
            worst = max(worst, oracles.gad_dephasing_identity(float(p), float(eta)))
    elapsed = time.perf_counter() - t0
    ok = worst <= 1e-10 and elapsed <= 2.0
    _line(4, ok, f"dephasing o gad == generalized dep, 21x21 grid,"
                 f" max dev {worst:.2e}, {elapsed:.2f}s")
    assert worst <= 1e-10
    assert elapsed <= 2.0


def test_criterion_05_classical_equivalence():
    rng = np.random.default_rng(1005)
    worst = 0.0
    for k in range(100):
        size = 2 if k < 50 else 3
        raw = rng.uniform(size=(size, size))
        p_mat = raw / raw.sum(axis=0, keepdims=True)
        quantum = db.alpha(ch.classical_embed(p_mat)).value
        classical = float(p_mat.min(axis=1).sum())
        worst = max(worst, abs(quantum - classical))
    ok = worst <= 1e-5
    _line(5, ok, f"alpha(embed(P)) vs min-sum on 100 stochastic matrices"
                 f" (50 of each shape), max err {worst:.2e}")
    assert worst <= 1e-5


def test_criterion_06_property_suites():
    rng = np.random.default_rng(1006)

    def rand_qubit():
        return ch.random_channel(2, 2, seed=int(rng.integers(1 << 31)))

    failures = 0
    worst_slack = math.inf
    for _ in range(100):
        n, m = rand_qubit(), rand_qubit()
        a_n, a_m = db.alpha(n).value, db.alpha(m).value
        for lam in (0.25, 0.5, 0.75):
            slack = db.alpha(_mix(lam, n, m)).value - (
                lam * a_n + (1.0 - lam) * a_m
            )
            worst_slack = min(worst_slack, slack)
            failures += slack < -1e-6
    for _ in range(50):
        n, m = rand_qubit(), rand_qubit()
        slack = db.alpha(ch.tensor(n, m)).value - db.alpha(n).value * db.alpha(m).value
        worst_slack = min(worst_slack, slack)
        failures += slack < -1e-6
    for _ in range(100):
        n, m = rand_qubit(), rand_qubit()
        a_n, a_m = db.alpha(n).value, db.alpha(m).value
        slack = (1.0 - a_n) * (1.0 - a_m) - (1.0 - db.alpha(ch.compose(n, m)).value)
        worst_slack = min(worst_slack, slack)
        failures += slack < -1e-6
    ok = failures == 0
    _line(6, ok, f"concavity(100x3)/supermult(50)/concatenation(100),"
                 f" {failures} failures, worst slack {worst_slack:.2e}")
    assert failures == 0


def test_criterion_07_sandwich_suite():
    rng = np.random.default_rng(1007)
    worst = {"rev": -math.inf, "fwd": -math.inf, "herm": -math.inf}
    for _ in range(200):
        n = ch.random_channel(2, 2, seed=int(rng.integers(1 << 31)))
        a = db.alpha(n).value
        a_h = db.alpha_hermitian(n).value
        rev = db.reverse_alpha(n).value
        exp_oracle = oracles.eta_tr_expansion_qubit(n)
        tr_oracle = oracles.eta_tr_qubit(n)
        worst["rev"] = max(worst["rev"], (1.0 - rev) - exp_oracle)
        worst["fwd"] = max(worst["fwd"], tr_oracle - (1.0 - a))
        worst["herm"] = max(worst["herm"], a - a_h)
    ok = worst["rev"] <= 1e-3 and worst["fwd"] <= 1e-3 and worst["herm"] <= 1e-6
    _line(7, ok, "200 random qubit channels, worst margins:"
                 f" 1-rev vs expansion oracle {worst['rev']:+.2e},"
                 f" eta_tr oracle vs 1-alpha {worst['fwd']:+.2e},"
                 f" alpha vs alphaH {worst['herm']:+.2e}")
    assert worst["rev"] <= 1e-3
    assert worst["fwd"] <= 1e-3
    assert worst["herm"] <= 1e-6


def test_criterion_08_bitflip_bounds():
    worst_eta = 1.0
    worst_gap = -math.inf
    for p in np.linspace(0.1, 0.9, 9):
        flip = ch.bitflip(float(p))
        worst_eta = min(worst_eta, oracles.eta_tr_qubit(flip))
        gap = (1.0 - db.reverse_alpha(flip).value) - abs(1.0 - 2.0 * p)
        worst_gap = max(worst_gap, gap)
    ok = worst_eta >= 1.0 - 1e-4 and worst_gap <= 1e-3
    _line(8, ok, f"bitflip: min eta_tr {worst_eta:.6f},"
                 f" (1-rev)-|1-2p| at most {worst_gap:.2e}")
    assert worst_eta >= 1.0 - 1e-4
    assert worst_gap <= 1e-3


def test_criterion_09_expansion_witnesses():
    ok_triples = True
    for p, gamma in ((0.2, 1.5), (0.5, 2.0), (0.8, 3.0)):
        _, e_in, e_out = oracles.expansion_witness_hockey_stick(p, gamma)
        ok_triples = ok_triples and e_out <= 1e-12 and e_in >= 1e-3

    dep = ch.depolarizing(0.5)
    rho = np.diag([1.0, 0.0]).astype(complex)

    def chi2(eps, through):
        sigma = np.diag([1.0 - eps, eps]).astype(complex)
        if through:
            return oracles.f_divergence_commuting(dep(rho), dep(sigma), "chi2")
        return oracles.f_divergence_commuting(rho, sigma, "chi2")

    eps0, h = 1e-5, 1e-6
    slope_in = (chi2(eps0 + h, False) - chi2(eps0 - h, False)) / (2.0 * h)
    slope_out = (chi2(eps0 + h, True) - chi2(eps0 - h, True)) / (2.0 * h)
    ok = ok_triples and abs(slope_in - 1.0) <= 1e-3 and abs(slope_out) <= 1e-3
    _line(9, ok, f"hockey-stick witnesses on 3 (p,gamma) points;"
                 f" chi2 slopes ({slope_in:.5f}, {slope_out:.5f})")
    assert ok_triples
    assert abs(slope_in - 1.0) <= 1e-3
    assert abs(slope_out) <= 1e-3


def test_criterion_10_classical_chain():
    rng = np.random.default_rng(1010)
    failures = 0
    for _ in range(100):
        c = oracles.random_biso(rng)
        a = oracles.classical_doeblin(c)
        g = oracles.classical_gamma(c)
        ra = oracles.classical_reverse_alpha(c)
        failures += not (a <= g + 1e-9 and g <= ra + 1e-5)
    worst_bsc = 0.0
    for p in (0.05, 0.11, 0.25, 0.4):
        got = oracles.classical_reverse_alpha(oracles.bsc(p))
        worst_bsc = max(worst_bsc, abs(got - oracles.binary_entropy(p)))
    ok = failures == 0 and worst_bsc <= 1e-4
    _line(10, ok, f"alpha <= 1-C <= rev on 100 BISO channels, {failures}"
                  f" failures; BSC rev vs h(p) max err {worst_bsc:.2e}")
    assert failures == 0
    assert worst_bsc <= 1e-4


def test_criterion_11_erasure_capacity_bounds():
    # "exactly" is pinned at 1e-6; the solver lands within ~1e-9
    worst = 0.0
    for eps in (0.0, 0.25, 0.5, 0.75, 1.0):
        got = db.capacity_bounds(ch.erasure(eps)).q_bound
        worst = max(worst, abs(got - max(0.0, 1.0 - 2.0 * eps)))
    ok = worst <= 1e-6
    _line(11, ok, f"q_bound(erasure) = max(0,1-2eps) on 5 points,"
                  f" max err {worst:.2e}")
    assert worst <= 1e-6


def test_criterion_12_figure_reproduction(tmp_path):
    assert cli.main(["figures", "--which", "fig2", "--which", "fig8",
                     "--outdir", str(tmp_path)]) == 0
    worst1 = worst2 = worst3 = 0.0
    min_sep = math.inf
    for row in _read_csv(tmp_path / "fig2.csv"):
        p = float(row["p"])
        a = float(row["alpha"])
        if p <= 1.0 + 1e-12:
            worst1 = max(worst1, abs(a - p))
        if p >= 1.0 - 1e-12:
            at = float(row["alphaT"])
            worst2 = max(worst2, abs(max(a, at) - (2.0 - p)))
        if p > 1.0 + 1e-9:
            min_sep = min(min_sep, (2.0 - p) - a)
    for row in _read_csv(tmp_path / "fig8.csv"):
        worst3 = max(worst3, abs(float(row["one_minus_revH"]) - float(row["eta"])))
    svg_ok = all(
        0 < (tmp_path / name).stat().st_size < 200_000
        for name in ("fig2.svg", "fig8.svg")
    )
    ok = (worst1 <= 1e-5 and worst2 <= 1e-4 and min_sep > 1e-3
          and worst3 <= 1e-4 and svg_ok)
    _line(12, ok, f"fig2 alpha err {worst1:.2e}, kink err {worst2:.2e},"
                  f" separation {min_sep:.3f}; fig8 revH err {worst3:.2e};"
                  f" svg files {'ok' if svg_ok else 'bad'}")
    assert worst1 <= 1e-5
    assert worst2 <= 1e-4
    assert min_sep > 1e-3
    assert worst3 <= 1e-4
    assert svg_ok


# The surface plots have no numeric tables; their acceptance is the
# property block below, evaluated on the full 51x51 figure grid.

AXIS = np.linspace(0.0, 1.0, 51)


@pytest.fixture(scope="module")
def alpha_surface():
    grid = np.empty((51, 51))
    for i, p in enumerate(AXIS):
        for j, eta in enumerate(AXIS):
            grid[i, j] = db.alpha(ch.gad(float(p), float(eta))).value
    return grid


def test_surface_alpha_monotone_in_eta(alpha_surface):
    # more transmissivity never raises the coefficient
    steps = np.diff(alpha_surface, axis=1)
    worst = float(steps.max())
    ok = worst <= 1e-6
    _line("surface a", ok, f"alpha non-increasing in eta, worst step {worst:.2e}")
    assert worst <= 1e-6


def test_surface_boundary_limits(alpha_surface):
    replacer_err = float(np.max(np.abs(alpha_surface[:, 0] - 1.0)))
    identity_err = float(np.max(np.abs(alpha_surface[:, -1])))
    ok = replacer_err <= 1e-6 and identity_err <= 1e-6
    _line("surface b", ok, f"eta=0 replacer limit err {replacer_err:.2e},"
                 f" eta=1 identity limit err {identity_err:.2e}")
    assert replacer_err <= 1e-6
    assert identity_err <= 1e-6


def test_surface_sandwich_everywhere():
    worst = -math.inf
    for p in AXIS:
        for eta in AXIS:
            r = db.dp_range(ch.gad(float(p), float(eta)))
            worst = max(worst, r.lower - r.upper)
    ok = worst <= 1e-7
    _line("surface c", ok, f"range lower <= upper at all 2601 points,"
                 f" worst violation {worst:.2e}")
    assert worst <= 1e-7
