"""Acceptance suite: one printed PASS/FAIL line per criterion 1-8."""

import contextlib
import io
import json
import random
import time
from fractions import Fraction
from pathlib import Path

import mpmath

from locperiod import induced as I
from locperiod.cli import main
from locperiod.moment import GOLDEN_SAMPLE, Dataset, assemble_moment, load_spectral_data
from locperiod.numerics import ApproxScalar, ExactScalar
from locperiod.padic import a_, hecke_cosets, is_integral_unit
from locperiod.periods import (
    LocalVector,
    TruncationPlan,
    kappa_constant,
    normalized_Iv,
    steinberg_constant,
    triple_Iprime,
    verify_kappa,
    verify_prop_atkin,
    verify_prop_hecke,
    verify_steinberg,
    verify_true_identity,
)
from locperiod.repn import Steinberg, Unramified
from locperiod.whittaker import WhittakerVector, evaluate, torus_value

R = 60
TOL = 1e-8


def line(capsys, n, title, ok, detail):
    with capsys.disabled():
        print(f"\ncriterion {n} [{title}]: {'PASS' if ok else 'FAIL'} ({detail})")
    assert ok, detail


def unit(theta):
    with mpmath.workprec(128):
        return ApproxScalar(mpmath.expj(theta), 0, 128)


def tempered(rng, q):
    return Unramified.from_satake(unit(rng.uniform(0.2, 2.9)), q)


def unitary_lambda(rng):
    # exact rational Hecke eigenvalues strictly inside the tempered range
    return Fraction(rng.randint(-19, 19), 10)


def stable(vs, radius=R):
    """Value at R, its certified tail, and |I(R) - I(R+10)|."""
    a = normalized_Iv(vs, TruncationPlan(radius=radius))
    b = normalized_Iv(vs, TruncationPlan(radius=radius + 10))
    return a, abs(a.value.value - b.value.value)


def test_criterion_1_unramified_normalization(capsys):
    rng = random.Random(1)
    start = time.perf_counter()
    failures, worst_tail, worst_res = [], {}, {}
    for q in (2, 3, 5):
        for _ in range(5):
            rs = [tempered(rng, q) for _ in range(3)]
            res, drift = stable([LocalVector.new(r) for r in rs])
            residual = abs(res.value.value - 1)
            worst_tail[q] = max(worst_tail.get(q, 0), res.tail_bound)
            worst_res[q] = max(worst_res.get(q, 0), residual)
            if residual > TOL + res.err:
                failures.append(f"q={q} value")
            if res.tail_bound > 1e-10:
                failures.append(f"q={q} tail bound above 1e-10")
            if drift > res.tail_bound:
                failures.append(f"q={q} R+10 drift above T(R)")
    elapsed = time.perf_counter() - start
    if elapsed > 600:
        failures.append(f"wall time {elapsed:.0f}s")
    detail = "; ".join(f"q={q}: max|I-1|={mpmath.nstr(worst_res[q], 2)}, max T(60)={mpmath.nstr(worst_tail[q], 2)}"
                       for q in (2, 3, 5))
    detail += f"; {elapsed:.1f}s"
    if failures:
        detail += "; failing: " + ", ".join(sorted(set(failures)))
    line(capsys, 1, "unramified normalization", not failures, detail)


def test_criterion_2_steinberg_constant(capsys):
    rng = random.Random(2)
    failures, values = [], []
    for q in (2, 3, 5):
        for i in range(3):
            r1, r2 = tempered(rng, q), tempered(rng, q)
            twist = 1 if i % 2 == 0 else -1
            report = verify_steinberg(q, r1, r2, twist, TruncationPlan(radius=R), TOL)
            vs = [LocalVector.new(r1).translate_m(), LocalVector.new(r2), LocalVector.new(Steinberg(q, twist))]
            res, drift = stable(vs)
            values.append(report.values["lhs"])
            if not report.passed:
                failures.append(f"q={q} residual {mpmath.nstr(report.residual, 3)}")
            if drift > res.tail_bound:
                failures.append(f"q={q} drift")
    if steinberg_constant(2) != Fraction(1, 3):
        failures.append("q=2 target is not 1/3")
    line(capsys, 2, "Steinberg constant", not failures,
         "9 runs, targets 1/3, 1/4, 1/6" + ("; " + ", ".join(failures) if failures else ""))


def test_criterion_3_pairing_constant(capsys):
    failures = []
    for q in (2, 3):
        for lam in (0, 1, 2, Fraction(5, 2)):
            report = verify_kappa(q, lam, allow_nonunitary=True)
            if not (report.passed and report.notes == ["exact match"]):
                failures.append(f"q={q} lambda={lam}")
    line(capsys, 3, "pairing constant", not failures,
         "exact for q in {2,3}, lambda in {0,1,2,5/2}" if not failures else ", ".join(failures))


def test_criterion_4_basis_identity(capsys):
    rng = random.Random(4)
    failures, worst = [], 0
    for q in (2, 3):
        for _ in range(5):
            lam, l1, l2 = (unitary_lambda(rng) for _ in range(3))
            report = verify_true_identity(q, lam, l1, l2, TruncationPlan(radius=R), TOL)
            again = verify_true_identity(q, lam, l1, l2, TruncationPlan(radius=R + 10), TOL)
            worst = max(worst, report.residual)
            if not report.passed:
                failures.append(f"q={q} ({lam},{l1},{l2})")
            if abs(report.values["lhs"].value - again.values["lhs"].value) > report.error_bound:
                failures.append(f"q={q} drift")
    for _ in range(50):
        q = rng.choice([2, 3, 5])
        lam, l1, l2 = (unitary_lambda(rng) for _ in range(3))
        if kappa_constant(q, lam, l1, l2) != kappa_constant(q, lam, l2, l1):
            failures.append("kappa_constant asymmetric")
    line(capsys, 4, "basis identity", not failures,
         f"10 configurations, max residual {mpmath.nstr(worst, 3)}; symmetry exact" if not failures else ", ".join(failures))


def test_criterion_5_trilinear_moves(capsys):
    rng = random.Random(5)
    plan, failures = TruncationPlan(radius=R), []
    for q in (3, 3, 5, 2, 3):
        lam, l1, l2 = (unitary_lambda(rng) for _ in range(3))
        report = verify_prop_hecke(q, lam, l1, l2, plan, TOL)
        if not report.passed:
            failures.append(f"hecke q={q}")
    atkin = [
        (2, Steinberg(2, 1), 1),
        (3, Steinberg(3, -1), 1),
        # exact Satake parameters keep the model, and so eta, exact
        (3, Unramified.from_satake(-1, 3), -1),
        (5, Unramified.from_satake(Fraction(5, 4), 5), -1),
        (5, Steinberg(5, 1), 1),
    ]
    for q, rep, sign in atkin:
        l1, l2 = unitary_lambda(rng), unitary_lambda(rng)
        report = verify_prop_atkin(q, rep, l1, l2, plan, TOL, sign=sign)
        again = verify_prop_atkin(q, rep, l1, l2, TruncationPlan(radius=R + 10), TOL, sign=sign)
        if not report.passed:
            failures.append(f"atkin q={q} {rep.kind}")
        if report.values["eta_squared"] != 1:
            failures.append("eta^2 != 1")
        if abs(report.values["lhs"].value - again.values["lhs"].value) > report.error_bound:
            failures.append(f"atkin q={q} drift")
    line(capsys, 5, "trilinear moves", not failures,
         "5 Hecke + 5 Atkin-Lehner (Steinberg twists +1 and -1), eta^2 = 1 exactly" if not failures else ", ".join(failures))


def test_criterion_6_operator_suite(capsys):
    failures = []
    for p in (2, 3, 5):
        reps = hecke_cosets(p)
        distinct = all(not is_integral_unit(g.inverse() @ h, p) for i, g in enumerate(reps) for h in reps[i + 1:])
        if len(reps) != p + 1 or not distinct:
            failures.append(f"cosets p={p}")
        for alpha in (1, -1, Fraction(5, 4)):
            r = Unramified.from_satake(alpha, p)
            phi = I.spherical_vector(r)
            if I.hecke_apply(phi).ratio_to(phi) != alpha + 1 / Fraction(alpha):
                failures.append(f"eigen p={p} alpha={alpha}")
    for q in (2, 3):
        basis = I.k0_basis(Unramified.from_satake(1, q))
        if [[I.inner_product(x, y) for y in basis] for x in basis] != [[1, 0], [0, 1]]:
            failures.append(f"gram q={q}")
    line(capsys, 6, "operator suite", not failures,
         "p+1 cosets, exact eigenvalues, Gram = I" if not failures else ", ".join(failures))


def test_criterion_7_oracle_equivalences(capsys):
    failures = []
    for q in (2, 3, 5):
        for alpha in (1, -1, Fraction(5, 4)):
            W = WhittakerVector(Unramified.from_satake(alpha, q))
            for r in range(-2, 7):
                if evaluate(W, a_(Fraction(q) ** r)) != torus_value(W, r):
                    failures.append(f"jacquet q={q} alpha={alpha} r={r}")
    for q in (2, 3):
        vs = [LocalVector.new(Unramified.from_satake(a, q)) for a in (1, -1, Fraction(5, 4))]
        collapsed = triple_Iprime(vs, TruncationPlan(radius=R))
        sampled = triple_Iprime(vs, TruncationPlan(radius=R, sampling="B1", collapse=False))
        if collapsed.shells != sampled.shells or collapsed.value != sampled.value:
            failures.append(f"collapse q={q}")
    rng = random.Random(7)
    for q in (2, 3, 5):
        rs = [tempered(rng, q) for _ in range(3)]
        res, drift = stable([LocalVector.new(r) for r in rs])
        if drift > res.tail_bound:
            failures.append(f"drift q={q}")
    line(capsys, 7, "oracle equivalences", not failures,
         "Jacquet = torus exactly, collapsed = K x K bitwise, R+10 drift <= T(R)" if not failures else ", ".join(failures))


def test_criterion_8_moment_assembler(capsys, tmp_path):
    failures = []
    golden = Path(__file__).with_name("golden") / "moment_report.json"
    out = tmp_path / "out.json"
    buf = io.StringIO()
    with contextlib.redirect_stdout(buf):
        code = main(["moment", "assemble", "--p", "2", "--q", "3", "--data", str(GOLDEN_SAMPLE),
                     "--lambda1", "1/2", "--lambda2", "1"])
    out.write_text(buf.getvalue())
    if code != 0 or out.read_bytes() != golden.read_bytes():
        failures.append("golden regression differs")
    data = load_spectral_data(GOLDEN_SAMPLE)
    kw = {"lam1": Fraction(1, 2), "lam2": 1}
    whole = assemble_moment(data, 2, 3, 1, **kw)
    parts = [assemble_moment(Dataset("", data.rows[i:i + 1]), 2, 3, 1, **kw) for i in range(3)]
    if sum((p.subtotal for p in parts[1:]), parts[0].subtotal) != whole.subtotal:
        failures.append("linearity")
    if whole.prefactor != ExactScalar.sqrt_q(2) / 3:
        failures.append("prefactor")
    if json.loads(buf.getvalue())["report"]["prefactor_exact"] != "1/3*sqrt(2)":
        failures.append("prefactor rendering")
    line(capsys, 8, "moment assembler", not failures,
         "golden byte-identical, linear in rows, prefactor sqrt(2)/3 exact" if not failures else ", ".join(failures))
