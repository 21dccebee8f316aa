"""Acceptance criteria 1 to 13, one test each; each records a PASS/FAIL line."""
import time
import warnings

import numpy as np

from ftvn.center import in_center, unit_element
from ftvn.cli import run
from ftvn.core import check_axioms, commute_report, orbit_support
from ftvn.doubly_stochastic import (
    birkhoff_decompose,
    construct_ds_witness,
    ds_from_automorphisms,
    extract_transition_matrix,
    is_ds_matrix,
)
from ftvn.instances import decreasing_rearrangement, system
from ftvn.majorization import hlp_majorize, hull_oracle_rn, lidskii_sum_check
from ftvn.reduction import center_correspondence, check_reduced, make_reduced_pair


def random_ds(rng, n, k):
    m = np.zeros((n, n))
    for w in rng.dirichlet(np.ones(k)):
        m[np.arange(n), rng.permutation(n)] += w
    return m


def haar(rng, n):
    q, r = np.linalg.qr(rng.standard_normal((n, n)))
    return q * np.sign(np.diag(r))


def shipped():
    return [
        system("rn-down", 8),
        system("rn-abs", 8),
        system("norm", 8),
        system("sym", 4),
        system("sing-val", 3),
        system("spin", 8),
        system("discrete", 8, isometry=haar(np.random.default_rng(0), 8)),
        system("twisted", inner={"kind": "rn-down", "dim": 8}),
        system("product", parts=[{"kind": "rn-down", "dim": 4}, {"kind": "sym", "dim": 3}]),
        system("finite-seq", 8),
    ]


def test_01_axiom_suite(acceptance):
    start = time.perf_counter()
    failed = [s.name for s in shipped() if not check_axioms(s, n_samples=1000, seed=0, tol=1e-8).passed]
    elapsed = time.perf_counter() - start
    ok = not failed and elapsed < 30.0
    acceptance(1, "axiom suite", ok, f"10 instances x 1000 samples, {elapsed:.1f} s, failed={failed}")
    assert ok


def test_02_counterexample_golden(acceptance):
    rep = check_axioms(system("subspace-counterexample"), n_samples=100)
    cx = rep.counterexample or {}
    ok = (
        not rep.passed
        and abs(cx.get("inner_cx", np.nan) + 10) <= 1e-9
        and abs(cx.get("inner_spectra", np.nan) + 1) <= 1e-9
        and abs(cx.get("gap", np.nan) - 9) <= 1e-9
    )
    acceptance(2, "counterexample golden", ok, f"<c,x>={cx.get('inner_cx')}, gap={cx.get('gap')}")
    assert ok


def test_03_commutation_equivalence(acceptance):
    bad_witness, disagreements, determinate = [], 0, 0
    for s in shipped():
        rng = np.random.default_rng(3)
        for _ in range(1000):
            x = s.sample(rng)
            y = s.witness(x, s.lam(s.sample(rng)))
            rep = commute_report(s, x, y, tol=1e-8)
            if not (rep.inner.holds and rep.additive.holds and rep.isometric.holds):
                bad_witness.append(s.name)
                break
        for i in range(1000):
            x, z = s.sample(rng), s.sample(rng)
            if i % 3 == 0:
                y = z
            else:
                # witness pairs nudged off or kept inside the commuting set
                noise = 1e-4 if i % 3 == 1 else 1e-13
                y = s.element(s.witness(x, s.lam(z)) + noise * s.sample(rng))
            rep = commute_report(s, x, y, tol=1e-8)
            if rep.determinate:
                determinate += 1
                if len({rep.inner.holds, rep.additive.holds, rep.isometric.holds}) != 1:
                    disagreements += 1
    ok = not bad_witness and disagreements == 0 and determinate > 5000
    detail = f"witness failures={bad_witness}, random determinate={determinate}, disagreements={disagreements}"
    acceptance(3, "commutation equivalence", ok, detail)
    assert ok


def test_04_fan_golden(acceptance):
    s = system("sym", 3)
    x = np.diag([5.0, 2.0, -1.0])
    value, _ = orbit_support(s, x, np.diag([0.0, 1.0, 1.0]))
    rng = np.random.default_rng(4)
    worst = -np.inf
    for _ in range(500):
        q = haar(rng, 3)
        worst = max(worst, float(np.sum(x * (q @ np.diag([1.0, 1.0, 0.0]) @ q.T))))
    ok = abs(value - 7) <= 1e-9 and worst <= 7 + 1e-9
    acceptance(4, "fan golden", ok, f"support={value!r}, max over 500 conjugations={worst:.12f}")
    assert ok


def test_05_majorization_oracle(acceptance):
    rng = np.random.default_rng(5)
    disagreements, compared = 0, 0
    for n in range(2, 6):
        for i in range(500):
            y = rng.standard_normal(n)
            if i < 250:
                x = random_ds(rng, n, int(rng.integers(1, n + 2))) @ y
            else:
                x = rng.standard_normal(n) * rng.uniform(0.3, 1.0)
                if i % 2:
                    x += y.mean() - x.mean()
            h = hlp_majorize(x, y)
            if abs(h.margin) <= 1e-7:
                continue
            compared += 1
            disagreements += h.holds != hull_oracle_rn(x, y).holds
    ok = disagreements == 0 and compared > 1500
    acceptance(5, "majorization oracle agreement", ok, f"{compared} pairs compared, {disagreements} disagreements")
    assert ok


def test_06_witness_round_trip(acceptance):
    rng = np.random.default_rng(6)
    worst_fit, worst_sum, worst_min = 0.0, 0.0, np.inf
    for _ in range(200):
        n = int(rng.integers(2, 9))
        y = rng.standard_normal(n) * 3
        x = random_ds(rng, n, int(rng.integers(1, n + 1))) @ y
        m = construct_ds_witness(x, y)
        worst_fit = max(worst_fit, float(np.linalg.norm(m @ y - x)))
        worst_sum = max(worst_sum, float(np.max(np.abs(m.sum(0) - 1))), float(np.max(np.abs(m.sum(1) - 1))))
        worst_min = min(worst_min, float(m.min()))
    ok = worst_fit <= 1e-9 and worst_sum <= 1e-12 and worst_min >= -1e-12
    detail = f"max |My-x|={worst_fit:.2e}, max sum error={worst_sum:.2e}, min entry={worst_min:.2e}"
    acceptance(6, "HLP witness round-trip", ok, detail)
    assert ok


def test_07_birkhoff(acceptance):
    rng = np.random.default_rng(7)
    worst_err, over_bound = 0.0, 0
    for _ in range(200):
        n = int(rng.integers(2, 9))
        m = random_ds(rng, n, int(rng.integers(1, n + 1)))
        d = birkhoff_decompose(m)
        worst_err = max(worst_err, float(np.max(np.abs(d.reconstruct() - m))))
        over_bound += len(d.terms) > (n - 1) ** 2 + 1
    ok = worst_err <= 1e-9 and over_bound == 0
    acceptance(7, "Birkhoff decomposition", ok, f"max reconstruction error={worst_err:.2e}, over bound={over_bound}")
    assert ok


def test_08_lidskii(acceptance):
    # sing-val compares through its reduced system, where |.|-type majorization is weak
    failures = {}
    for s in (system("sym", 4), system("sing-val", 3), system("spin", 5), system("rn-down", 6)):
        rng = np.random.default_rng(8)
        bad = 0
        for i in range(1000):
            xs = [s.sample(rng) for _ in range(2 + i % 2)]
            verdict = lidskii_sum_check(s, xs, tol=1e-8)
            if s.spec.kind != "sing-val":
                total = s.lam(sum(xs))
                verdict = hlp_majorize(total, sum(s.lam(x) for x in xs), tol=1e-8)
            bad += not verdict.holds
        failures[s.name] = bad
    ok = not any(failures.values())
    acceptance(8, "Lidskii-type sums", ok, f"failures per system {failures}")
    assert ok


def test_09_center_identification(acceptance):
    # the known centers, written out independently of the system descriptors
    cases = [
        (system("sym", 3), np.eye(3).reshape(-1, 1)),
        (system("rn-down", 4), np.ones((4, 1))),
        (system("rn-abs", 4), np.zeros((4, 0))),
        (system("sing-val", 3), np.zeros((9, 0))),
        (system("norm", 3), np.zeros((3, 0))),
        (system("discrete", 3), np.eye(3)),
    ]
    wrong, counted = {}, 0
    for s, basis in cases:
        q = np.linalg.qr(basis)[0] if basis.shape[1] else basis
        rng = np.random.default_rng(9)
        bad = 0
        for i in range(1000):
            g = s.sample(rng)
            central = q @ (q.T @ g) if q.shape[1] else np.zeros_like(g)
            x = [g, central, central + 1e-5 * g][i % 3]
            dist = np.linalg.norm(x - q @ (q.T @ x)) / (1 + np.linalg.norm(x))
            if 0 < dist <= 1e-7:
                continue
            counted += 1
            bad += in_center(s, x) != (dist == 0 or dist < 1e-14)
        wrong[s.name] = int(bad)
    ok = not any(wrong.values())
    acceptance(9, "center identification", ok, f"{counted} classified, misclassified {wrong}")
    assert ok


def test_10_transition_matrices(acceptance):
    rng = np.random.default_rng(10)
    worst_fit, not_ds = 0.0, 0
    for _ in range(100):
        n = int(rng.integers(2, 6))
        s = system("sym", n)
        k = int(rng.integers(1, 4))
        maps = [np.kron(q, q) for q in (haar(rng, n) for _ in range(k))]
        d = ds_from_automorphisms(s, rng.dirichlet(np.ones(k)), maps)
        x = s.sample(rng)
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            m = extract_transition_matrix(s, d, x)
        not_ds += not is_ds_matrix(m, 1e-9)
        worst_fit = max(worst_fit, float(np.linalg.norm(m @ s.lam(x) - s.lam(d(x)))))
    ok = not_ds == 0 and worst_fit <= 1e-8
    acceptance(10, "transition-matrix extraction", ok, f"non-DS={not_ds}, max |M lam(x) - lam(Dx)|={worst_fit:.2e}")
    assert ok


def test_11_reduced_pairs(acceptance):
    kinds = [("rn-down", 6), ("rn-abs", 6), ("sym", 3), ("sing-val", 3), ("spin", 4), ("finite-seq", 6), ("discrete", 4)]
    failed = []
    for kind, dim in kinds:
        s = system(kind, dim)
        pair = make_reduced_pair(s)
        rep = check_reduced(pair, n_samples=1000, seed=11, tol=1e-10)
        cc = center_correspondence(pair)
        unit_ok = True
        e = unit_element(s)
        if e is not None:
            wc = pair.w_center()
            le = s.lam(e)
            unit_ok = wc.shape[1] == 1 and np.linalg.norm(le - wc @ (wc.T @ le)) <= 1e-10 and np.linalg.norm(le) > 0
        if not (rep.passed and cc.passed and unit_ok):
            failed.append(s.name)
    ok = not failed
    acceptance(11, "reduced pairs", ok, f"7 pairs x 1000 samples at 1e-10, failed={failed}")
    assert ok


def inf_formula(x):
    """x*_n = inf{alpha >= 0 : #{k : |x_k| > alpha} <= n - 1} under counting measure."""
    mags = np.abs(np.asarray(x, float))
    candidates = np.unique(np.concatenate([[0.0], mags]))
    return np.array([min(a for a in candidates if np.count_nonzero(mags > a) <= n - 1) for n in range(1, mags.size + 1)])


def test_12_rearrangement(acceptance):
    golden = decreasing_rearrangement([1, 0, 0.5, 0, 1 / 3, 0, 0, 0]).star
    golden_ok = golden.tolist() == [1, 0.5, 1 / 3, 0, 0, 0, 0, 0]
    rng = np.random.default_rng(12)
    mismatches = 0
    for _ in range(1000):
        n = int(rng.integers(1, 33))
        x = rng.choice([0.0, 0.0, 1.0, -1.0, 0.5, 2.0, -3.5], size=n) * rng.choice([1.0, rng.uniform(0.1, 5)])
        if rng.random() < 0.3:
            x = rng.standard_normal(n)
        mismatches += not np.array_equal(decreasing_rearrangement(x).star, inf_formula(x))
    ok = golden_ok and mismatches == 0
    acceptance(12, "rearrangement golden", ok, f"golden={golden.tolist()}, inf-formula mismatches={mismatches}/1000")
    assert ok


def test_13_cli_determinism(acceptance, capsys):
    invocations = [
        ["axioms", "--system", "sym", "--dim", "4", "--samples", "1000", "--seed", "42"],
        ["axioms", "--system", "subspace-counterexample"],
        ["majorize", "--system", "rn-down", "--dim", "3", "--x", "[1,1,1]", "--y", "[3,0,0]", "--witness"],
    ]
    expected_codes = [0, 1, 0]
    unstable = []
    for argv, code in zip(invocations, expected_codes):
        outputs = set()
        for extra in ([], [], ["--jobs", "1"], ["--jobs", "4"]):
            got = run(argv + extra)
            text = capsys.readouterr().out
            if got != code:
                unstable.append((argv[0], "exit", got))
            outputs.add("\n".join(l for l in text.splitlines() if '"elapsed_ms"' not in l))
        if len(outputs) != 1:
            unstable.append((argv[:3], "report"))
    ok = not unstable
    acceptance(13, "CLI determinism", ok, f"3 invocations x (2 runs + jobs 1/4), unstable={unstable}")
    assert ok
