"""Exit criteria for the package; each test reports one PASS/FAIL line."""

import json
import time
from itertools import permutations

import numpy as np
import pytest

from orbitmeans.align import brute_force_alignment
from orbitmeans.cli import main
from orbitmeans.consensus import (
    L2SQ,
    FrechetSpec,
    brute_force_mean,
    frechet_value,
    mean_partition_l2,
    mean_partition_search,
)
from orbitmeans.core import Partition, orbit_equal, random_partition
from orbitmeans.criteria import confusion, criterion, match_counts
from orbitmeans.metrics import delta_p, midpoint
from orbitmeans.simlab import (
    DistributionSpec,
    balanced_base,
    run_clt_experiment,
    run_consistency_experiment,
)

from conftest import record, shuffled
from test_criteria import pair_counts, set_counts


def check(number, title, ok, detail=""):
    record(f"[{'PASS' if ok else 'FAIL'}] {number:>2}. {title}  {detail}".rstrip())
    assert ok, f"criterion {number} failed: {detail}"


def rand_partition(rng, ell, m, hard):
    return Partition(random_partition(rng, ell, m, hard))


def test_01_metric_oracle_equivalence():
    rng = np.random.default_rng(1)
    worst = 0.0
    start = time.perf_counter()
    for i in range(1000):
        ell, m, hard = int(rng.integers(2, 7)), int(rng.integers(3, 16)), i % 2 == 0
        X, Y = rand_partition(rng, ell, m, hard), rand_partition(rng, ell, m, hard)
        for p in (1, 2):
            a = delta_p(X, Y, p)
            b = brute_force_alignment(X, Y, p).objective ** (1 / p)
            worst = max(worst, abs(a - b))
    elapsed = time.perf_counter() - start
    check(1, "metric oracle equivalence", worst <= 1e-9 and elapsed < 10,
          f"max|diff|={worst:.1e}, {elapsed:.1f}s")


def test_02_metric_axioms():
    rng = np.random.default_rng(2)
    sym = tri = 0.0
    for i in range(1000):
        ell, m, hard = int(rng.integers(2, 7)), int(rng.integers(3, 16)), i % 2 == 0
        X, Y, Z = (rand_partition(rng, ell, m, hard) for _ in range(3))
        for p in (1, 2):
            xy, yz, xz = delta_p(X, Y, p), delta_p(Y, Z, p), delta_p(X, Z, p)
            sym = max(sym, abs(xy - delta_p(Y, X, p)))
            tri = max(tri, xz - xy - yz)
            assert xy >= 0
    agree = 0
    for i in range(200):
        ell, m = int(rng.integers(2, 6)), int(rng.integers(3, 10))
        X = rand_partition(rng, ell, m, hard=i % 2 == 0)
        if i < 100:
            Y = Partition(shuffled(rng, X))
        else:
            # move mass within one column until the sorted row sums (an orbit
            # invariant) change, which certifies a different orbit
            B = X.canonical.copy()
            while np.allclose(np.sort(B.sum(axis=1)), np.sort(X.canonical.sum(axis=1))):
                B = X.canonical.copy()
                j, a, b = int(rng.integers(m)), *rng.choice(ell, 2, replace=False)
                t = B[a, j] * rng.uniform(0.25, 1.0)
                B[a, j] -= t
                B[b, j] += t
            Y = Partition(B)
        agree += (delta_p(X, Y, 2) == 0) == orbit_equal(X, Y) and (i < 100) == orbit_equal(X, Y)
    check(2, "metric axioms", sym <= 1e-9 and tri <= 1e-9 and agree == 200,
          f"max asym={sym:.1e}, max triangle excess={tri:.1e}, zero<=>orbit {agree}/200")


def test_03_geodesic_midpoint():
    rng = np.random.default_rng(3)
    worst = 0.0
    for i in range(500):
        ell, m = int(rng.integers(2, 7)), int(rng.integers(3, 16))
        X, Y = rand_partition(rng, ell, m, i % 2 == 0), rand_partition(rng, ell, m, i % 2 == 0)
        M = midpoint(X, Y)
        half = 0.5 * delta_p(X, Y, 2)
        worst = max(worst, abs(delta_p(X, M, 2) - half), abs(delta_p(Y, M, 2) - half))
    check(3, "geodesic midpoint", worst <= 1e-9, f"max dev={worst:.1e}")


def test_04_confusion_reduction():
    rng = np.random.default_rng(4)
    exact = 0
    for _ in range(500):
        ell, m = int(rng.integers(2, 7)), int(rng.integers(2, 16))
        X, Y = rand_partition(rng, ell, m, True), rand_partition(rng, ell, m, True)
        exact += confusion(X, Y).as_tuple() == pair_counts(X.labels(), Y.labels())
    mass, neg = 0.0, 0.0
    for _ in range(500):
        ell, m = int(rng.integers(2, 7)), int(rng.integers(2, 16))
        c = confusion(rand_partition(rng, ell, m, False), rand_partition(rng, ell, m, False))
        mass = max(mass, abs(sum(c.as_tuple()) - m * (m - 1) / 2))
        neg = min(neg, *c.as_tuple())
    check(4, "confusion reduction", exact == 500 and mass <= 1e-9 and neg >= 0,
          f"hard exact {exact}/500, soft mass dev={mass:.1e}, min count={neg}")


def test_05_match_count_reduction():
    rng = np.random.default_rng(5)
    exact = 0
    for _ in range(500):
        ell, m = int(rng.integers(2, 7)), int(rng.integers(1, 16))
        X, Y = rand_partition(rng, ell, m, True), rand_partition(rng, ell, m, True)
        mc = match_counts(X, Y)
        x, y, z = set_counts(X.labels(), Y.labels(), ell)
        exact += mc.x.tolist() == x and mc.y.tolist() == y and mc.z.tolist() == z
    mass = 0.0
    for _ in range(500):
        ell, m = int(rng.integers(2, 7)), int(rng.integers(1, 16))
        mc = match_counts(rand_partition(rng, ell, m, False), rand_partition(rng, ell, m, False))
        mass = max(mass, abs(mc.x.sum() - m), abs(mc.y.sum() - m))
    check(5, "match-count reduction", exact == 500 and mass <= 1e-9,
          f"hard exact {exact}/500, soft mass dev={mass:.1e}")


def test_06_criteria_sanity():
    rng = np.random.default_rng(6)
    self_ok = 0
    for _ in range(200):
        ell = int(rng.integers(2, 6))
        m = int(rng.integers(ell + 1, 16))  # some pair shares a cluster, so m11 > 0
        X = rand_partition(rng, ell, m, True)
        self_ok += (criterion(X, X, "rand") == 1 and criterion(X, X, "jaccard") == 1
                    and criterion(X, X, "mirkin") == 0)
    mh_ok, mirkin_dev = 0, 0.0
    for i in range(200):
        ell, m = int(rng.integers(1, 7)), int(rng.integers(2, 16))
        X, Y = rand_partition(rng, ell, m, i % 2 == 0), rand_partition(rng, ell, m, i % 2 == 0)
        z = match_counts(X, Y).z
        best = max(z[np.arange(ell), perm].sum() for perm in permutations(range(ell))) / m
        mh_ok += abs(criterion(X, Y, "meila_heckerman") - best) <= 1e-12
        Xh, Yh = rand_partition(rng, ell, m, True), rand_partition(rng, ell, m, True)
        c = confusion(Xh, Yh)
        mirkin_dev = max(mirkin_dev, abs(criterion(Xh, Yh, "mirkin") - 2 * (c.m10 + c.m01)))
    check(6, "criteria sanity", self_ok == 200 and mh_ok == 200 and mirkin_dev <= 1e-9,
          f"self {self_ok}/200, MH vs Sym_l {mh_ok}/200, mirkin-pair dev={mirkin_dev:.1e}")


def test_07_continuity_probe():
    rng = np.random.default_rng(7)
    worst_ratio, raised = 0.0, 0
    for _ in range(200):
        ell, m = int(rng.integers(2, 6)), int(rng.integers(2, 16))
        X, Y = rand_partition(rng, ell, m, False), rand_partition(rng, ell, m, False)
        base = criterion(X, Y, "rand")
        for eta in (1e-3, 1e-5):
            A = np.clip(X.canonical + eta * rng.uniform(-1, 1, X.shape), 0.0, None)
            A /= A.sum(axis=0)
            try:
                worst_ratio = max(worst_ratio, abs(criterion(A, Y, "rand") - base) / eta)
            except Exception:
                raised += 1
    check(7, "continuity probe (rand)", worst_ratio <= 10 and raised == 0,
          f"max |d rand|/eta={worst_ratio:.3f}, exceptions={raised}")


def test_08_mm_consensus():
    rng = np.random.default_rng(8)
    monotone = 0
    for t in range(100):
        n, m, ell = int(rng.integers(1, 21)), int(rng.integers(2, 31)), int(rng.integers(2, 6))
        hard = bool(rng.integers(2))
        sample = [rand_partition(rng, ell, m, hard) for _ in range(n)]
        res = mean_partition_l2(sample, seed=t)
        monotone += all(b <= a + 1e-9 for a, b in zip(res.trace, res.trace[1:]))
    mid_dev = 0.0
    for _ in range(50):
        ell, m = int(rng.integers(2, 6)), int(rng.integers(2, 31))
        X, Y = rand_partition(rng, ell, m, False), rand_partition(rng, ell, m, False)
        res = mean_partition_l2([X, Y])
        mid_dev = max(mid_dev, abs(res.variation - frechet_value([X, Y], midpoint(X, Y))))
    dup = 0
    for _ in range(50):
        X = rand_partition(rng, 3, 10, bool(rng.integers(2)))
        res = mean_partition_l2([Partition(shuffled(rng, X)) for _ in range(5)])
        dup += res.variation <= 1e-12 and orbit_equal(res.mean, X)
    check(8, "MM consensus", monotone == 100 and mid_dev <= 1e-9 and dup == 50,
          f"monotone {monotone}/100, n=2 midpoint dev={mid_dev:.1e}, duplicates {dup}/50")


def test_09_consensus_oracle():
    mirkin = FrechetSpec("mirkin")
    matches, dominated = 0, 0
    for t in range(100):
        rng = np.random.default_rng(900 + t)
        ell, m, n = int(rng.integers(2, 4)), int(rng.integers(3, 9)), int(rng.integers(2, 7))
        sample = [rand_partition(rng, ell, m, True) for _ in range(n)]
        s = mean_partition_search(sample, mirkin, seed=t)
        b = brute_force_mean(sample, mirkin)
        assert s.variation >= b.variation - 1e-9
        matches += abs(s.variation - b.variation) <= 1e-9
        mm = mean_partition_l2(sample, seed=t)
        dominated += mm.variation <= brute_force_mean(sample, L2SQ).variation + 1e-9
    check(9, "consensus oracle", matches >= 90 and dominated == 100,
          f"search == brute force {matches}/100, MM <= hard optimum {dominated}/100")


NOISE = dict(model="label_noise", base=balanced_base(20, 3), epsilon=0.2)


def _consistency_ok(rep):
    s = rep.summary
    ratio = s["std_ratio_first_last"]
    ok = (s["abs_error_strictly_decreasing"] and s["distance_non_increasing"]
          and ratio is not None and 5 <= ratio <= 20)
    return ok, s


@pytest.mark.slow
def test_10_consistency_experiment():
    start = time.perf_counter()
    rep = run_consistency_experiment(DistributionSpec(**NOISE, seed=42),
                                     n_grid=(10, 100, 1000), R=50, N_ref=10000)
    elapsed = time.perf_counter() - start
    ok, s = _consistency_ok(rep)
    errs = ", ".join(f"{v:.4f}" for v in s["median_abs_error"])
    dists = ", ".join(f"{v:.4f}" for v in s["median_distance"])
    check(10, "consistency experiment", ok and elapsed < 180,
          f"median|V_n-V|=[{errs}], median delta2=[{dists}], "
          f"std ratio={s['std_ratio_first_last']:.2f}, {elapsed:.0f}s")


def _clt_ok(s):
    return (not s["zero_variance"] and abs(s["skewness"]) < 0.5
            and -1 < s["excess_kurtosis"] < 1 and s["ks_pvalue"] > 0.01)


@pytest.mark.slow
def test_11_clt_experiment():
    verdicts, lines, times = [], [], []
    for seed in (42, 43, 44, 45, 46):
        start = time.perf_counter()
        rep = run_clt_experiment(DistributionSpec(**NOISE, seed=seed), n=200, R=500, N_ref=10000)
        times.append(time.perf_counter() - start)
        s = rep.summary
        verdicts.append(_clt_ok(s))
        lines.append(f"seed {seed}: skew={s['skewness']:+.3f} kurt={s['excess_kurtosis']:+.3f} "
                     f"KS p={s['ks_pvalue']:.3f}")
    for line in lines:
        record(f"       {line}")
    check(11, "CLT experiment", verdicts[0] and sum(verdicts) >= 4 and times[0] < 180,
          f"seed 42 {'normal' if verdicts[0] else 'not normal'}, stable {sum(verdicts)}/5, "
          f"{times[0]:.0f}s per run")


def _run_twice(tmp_path, name, argv):
    outs = []
    for k in range(2):
        out = tmp_path / f"{name}{k}.json"
        assert main(argv + ["--out", str(out)]) == 0
        outs.append(out.read_bytes())
    return outs[0] == outs[1]


def test_12_determinism(tmp_path):
    x, y = tmp_path / "x.json", tmp_path / "y.json"
    x.write_text(json.dumps({"labels": [0, 0, 1, 1, 2], "l": 3}))
    y.write_text(json.dumps({"labels": [0, 1, 1, 2, 2], "l": 3}))
    dist = ["--eps", "0.2", "--m", "10", "--l", "3", "--seed", "42"]
    cases = {
        "sample": ["sample", *dist, "--n", "20"],
        "consensus_l2": ["consensus", "--rho", "l2sq", "--seed", "7", str(x), str(y)],
        "consensus_mirkin": ["consensus", "--rho", "mirkin", "--seed", "7", str(x), str(y)],
        "consistency": ["exp", "consistency", *dist, "--n", "5,20", "--reps", "10",
                        "--nref", "50", "--restarts", "3"],
        "clt": ["exp", "clt", *dist, "--n", "10", "--reps", "100", "--nref", "50",
                "--restarts", "2"],
    }
    same = {name: _run_twice(tmp_path, name, argv) for name, argv in cases.items()}
    check(12, "determinism", all(same.values()),
          f"byte-identical {sum(same.values())}/{len(same)} invocations")
