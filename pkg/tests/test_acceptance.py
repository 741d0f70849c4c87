"""End-to-end acceptance criteria; each test records a PASS/FAIL line."""

from __future__ import annotations

import math
import re
import subprocess
import sys
import time
from pathlib import Path

import numpy as np

from ivkkt.calculus import gh_dir_deriv
from ivkkt.cli import main
from ivkkt.interval import Interval, hausdorff, lt_lu, scale
from ivkkt.kkt import ProbeSet, verify
from ivkkt.oracle import classify, grid_for
from ivkkt.problem import load_problem, registry_names

TESTS = Path(__file__).parent


def run_cli(capsys, *argv):
    code = main(list(argv))
    return code, capsys.readouterr().out


def key_values(out: str) -> dict[str, str]:
    kv = {}
    for line in out.splitlines():
        m = re.match(r"^([\w.^\-]+)=(.*)$", line)
        if m:
            kv[m.group(1)] = m.group(2)
    return kv


def mivop3_closed_forms(q) -> dict[str, float]:
    """Derivatives at (1, 1) toward q along t -> (q1^t, q2^t)."""
    a, b = math.log(q[0]), math.log(q[1])
    return {
        "phi1^L": a,
        "phi1^U": a,
        "phi2^L": 2 * a + 2 * b,
        "phi2^U": 2 * a + 2 * b,
        "psi1": a + 0.5 * b,
        "psi2": -a,
        "psi3": a + b,
        "psi4": 2 * a + b,
        "psi5": -b,
    }


def test_criterion_1_mivop3_weighted_certificate(capsys, acceptance):
    t0 = time.perf_counter()
    code, out = run_cli(capsys, "check", "--problem", "mivop3", "--theorem", "T32a")
    kv = key_values(out)
    rng = np.random.default_rng(42)
    targets = rng.uniform(0.5, 2.0, size=(20, 2))
    argv = ["derivs", "--problem", "mivop3"]
    for q in targets:
        argv += ["--target", f"({float(q[0])!r}, {float(q[1])!r})"]
    dcode, dout = run_cli(capsys, *argv)
    elapsed = time.perf_counter() - t0
    dkv = key_values(dout)
    worst = 0.0
    for k, q in enumerate(targets, 1):
        for name, exact in mivop3_closed_forms(q).items():
            worst = max(worst, abs(float(dkv[f"target{k}.{name}"]) - exact))
    ok = (
        code == 0
        and kv["status"] == "certified"
        and "mu=1,7,0,0,4.5" in out
        and dcode == 0
        and worst <= 1e-5
        and elapsed < 2.0
    )
    acceptance("1", ok, f"exit {code}, 9 derivatives x 20 targets max err {worst:.2e}, {elapsed:.2f}s")
    assert ok


def test_criterion_2_mivop4_split_certificate_and_props(capsys, acceptance):
    t0 = time.perf_counter()
    code, out = run_cli(capsys, "check", "--problem", "mivop4", "--theorem", "T34a")
    pcode, pout = run_cli(capsys, "props", "--problem", "mivop4")
    elapsed = time.perf_counter() - t0
    line = next(x for x in pout.splitlines() if "phi1 LU-convexity" in x)
    nums = dict(re.findall(r"(lhs|rhs|alpha)=([-\d.e+]+)", line))
    lhs, rhs, alpha = float(nums["lhs"]), float(nums["rhs"]), float(nums["alpha"])
    e2 = f"{math.exp(2):.6g}"
    ok = (
        code == 0
        and "muL=0,0,2,1,3 muU=0,0,2,1,3" in out
        and pcode == 0
        and "violated" in line
        and f"q=({e2}, {e2})" in line
        and "p=(1, 1)" in line
        and alpha == 0.5
        and abs(lhs - 2 / 3) <= 1e-3
        and abs(rhs - 4 / 9) <= 1e-3
        and lhs > rhs
        and elapsed < 5.0
    )
    acceptance("2", ok, f"exit {code}, phi1 witness lhs={lhs:.4f} > rhs={rhs:.4f} at alpha={alpha}, {elapsed:.2f}s")
    assert ok


def test_criterion_3_mivop5_gh_certificate(capsys, acceptance, mivop5):
    t0 = time.perf_counter()
    code, out = run_cli(capsys, "check", "--problem", "mivop5", "--theorem", "T41")
    elapsed = time.perf_counter() - t0
    kv = key_values(out)
    verdict = verify(mivop5, mivop5.candidate, mivop5.certificate("T41"), ProbeSet.sample(mivop5, mivop5.candidate))
    worst = max(hausdorff(iv, Interval(0.0, 0.0)) for iv in verdict.gh_intervals)
    ok = (
        code == 0
        and "lam=2,1 mu=1,0,1" in out
        and float(kv["gh_condition_max_abs"]) <= 1e-6
        and len(verdict.gh_intervals) == 500
        and worst <= 1e-6
        and elapsed < 5.0
    )
    acceptance("3", ok, f"exit {code}, gH condition within {worst:.1e} of [0,0] on 500 probes, {elapsed:.2f}s")
    assert ok


def test_criterion_4_gh_derivative_of_h_counterexample(acceptance):
    prob = load_problem("hderiv_counterexample")
    phi = prob.objectives[0]
    for p in np.linspace(-1.5, 1.5, 13):
        expected = scale(1 - p**3, Interval(-1.0, 4.0))
        assert hausdorff(phi(np.array([p])), expected) <= 1e-12
    d = gh_dir_deriv(phi, np.array([0.0]), np.array([1.0]))
    err = hausdorff(d, Interval(0.0, 0.0))
    ok = err <= 1e-7
    acceptance("4", ok, f"gH derivative at 0 is {d}, distance {err:.1e} from [0,0]")
    assert ok


def test_criterion_5_negative_control(capsys, acceptance, relaxed):
    t0 = time.perf_counter()
    code, out = run_cli(capsys, "oracle", "--problem", "relaxed_mivop3", "--candidate", "(1,1)", "--grid", "101")
    scode, sout = run_cli(capsys, "search", "--problem", "relaxed_mivop3", "--candidate", "(1,1)", "--theorem", "T32a")
    elapsed = time.perf_counter() - t0
    kv = key_values(out)
    verdict = classify(relaxed, relaxed.candidate, grid_for(relaxed, 101, pbar=relaxed.candidate), ["type-I"])
    res = verdict.results["type-I"]
    both = res.witness is not None and all(lt_lu(a, b) for a, b in zip(res.witness_values, verdict.candidate_values))
    ok = code == 0 and kv["type-I"] == "refuted" and both and scode == 4 and elapsed < 10.0
    acceptance("5", ok, f"type-I refuted by a witness better in both objectives, search exit {scode}, {elapsed:.2f}s")
    assert ok


def test_criterion_6_property_suites(acceptance):
    t0 = time.perf_counter()
    proc = subprocess.run(
        [sys.executable, "-m", "pytest", "-q", "-p", "no:cacheprovider", str(TESTS / "test_properties.py")],
        capture_output=True,
        text=True,
        cwd=TESTS.parent,
    )
    elapsed = time.perf_counter() - t0
    tail = proc.stdout.strip().splitlines()[-1] if proc.stdout.strip() else proc.stderr[-200:]
    ok = proc.returncode == 0 and elapsed < 60.0
    acceptance("6", ok, f"property suites: {tail}, {elapsed:.1f}s")
    assert ok, proc.stdout[-3000:]


def test_criterion_7_certificates_agree_with_oracle(acceptance):
    t0 = time.perf_counter()
    checked = []
    for name in registry_names():
        prob = load_problem(name)
        for cert in prob.certificates:
            pbar = prob.candidate
            verdict = verify(prob, pbar, cert, ProbeSet.sample(prob, pbar))
            if not verdict.certified:
                continue
            pv = classify(prob, pbar, grid_for(prob, 101, pbar=pbar), [cert.claimed_class])
            checked.append((name, cert.theorem, cert.claimed_class, pv.holds(cert.claimed_class)))
    elapsed = time.perf_counter() - t0
    ok = len(checked) == 3 and all(h for *_, h in checked) and elapsed < 30.0
    desc = ", ".join(f"{n}/{t}/{k}={'ok' if h else 'refuted'}" for n, t, k, h in checked)
    acceptance("7", ok, f"{desc}, {elapsed:.2f}s")
    assert ok
