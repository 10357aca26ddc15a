#!/usr/bin/env python3
"""Smoke test for the orthomod_py extension module.

Builds a small tower, certifies the headline congruences, exercises the
Laplace operator / bracket / prediction calculus, and round-trips the
FSER text format.  Build the extension first:

    cargo build -p orthomod-py

then run:

    python3 python/smoke_test.py
"""

import importlib.util
import sys
from fractions import Fraction
from pathlib import Path

REPO = Path(__file__).resolve().parent.parent


def load_module():
    candidates = [
        REPO / "target" / profile / name
        for profile in ("release", "debug")
        for name in ("liborthomod_py.so", "orthomod_py.so", "liborthomod_py.dylib")
    ]
    existing = [p for p in candidates if p.exists()]
    if not existing:
        sys.exit(
            "extension not found; run `cargo build -p orthomod-py` first\n"
            "searched:\n  " + "\n  ".join(str(p) for p in candidates)
        )
    newest = max(existing, key=lambda p: p.stat().st_mtime)
    spec = importlib.util.spec_from_file_location("orthomod_py", newest)
    module = importlib.util.module_from_spec(spec)
    spec.loader.exec_module(module)
    print(f"loaded {newest}")
    return module


def main():
    om = load_module()
    checks = 0

    def ok(condition, label):
        nonlocal checks
        assert condition, label
        checks += 1
        print(f"  ok: {label}")

    print("tower")
    tower = om.Tower(6)
    names = tower.names()
    ok(names == ["E4", "E6", "Chi10", "Chi12", "Psi5", "Phi30", "Phi35"], "tower names")
    phi35 = tower.form("Phi35")
    ok(phi35.weight == 35, "Phi35 weight")
    ok(phi35.series.parity == "integral", "Phi35 parity (product of two half-integral forms)")
    ok(len(phi35.series) > 0 and phi35.series.is_integral(), "Phi35 integral support")
    psi5 = tower.form("Psi5").series
    ok(psi5.coeff(1, 1, 1) == Fraction(1), "Psi5 normalization a(1,1,1) = 1")
    ok(psi5.coeff(1, -1, 1) == Fraction(-1), "Psi5 antisymmetry a(1,-1,1) = -1")

    print("certification")
    cert = om.check_singular("Phi35", phi35.series, 23, 6)
    ok(cert["status"] == "pass", "Phi35 singular mod 23")
    ok(cert["d_f"] == 4 and cert["witnesses_nonvacuous"] > 0, "certificate detail")
    bad = om.check_singular("Phi35", phi35.series, 5, 6)
    ok(bad["status"] == "fail" and bad["violations"], "Phi35 not singular mod 5")
    ok(om.compute_df(psi5) == 16, "Psi5 D_F = 16")
    try:
        om.check_singular("Psi5", psi5, 2, 6)
        raise AssertionError("p | D_F must be refused")
    except ValueError:
        ok(True, "p | D_F refused")
    scans = om.scan_primes("Psi5", psi5, 6, 30)
    found = [c["prime"] for c in scans if c["status"] == "pass"]
    ok(found == [3], "Psi5 scan finds exactly p = 3 below 30")

    print("operators")
    mono = om.Series.monomial(2, 0, 2, Fraction(1), 3)
    ok(om.laplace(mono).coeff(2, 0, 2) == Fraction(-16), "Laplace multiplies by R^2 - 4NM")
    a, b, c = om.bracket_coefficients(3, 5, 30)
    ok(
        (a, b, c) == (Fraction(-9, 2), Fraction(-59, 2), Fraction(-69, 2)),
        "bracket prefactors for (n, k, l) = (3, 5, 30)",
    )
    phi30 = tower.form("Phi30").series
    ok(om.bracket(psi5, 5, phi30, 30, 3).is_zero(), "[Psi5, Phi30] = 0")
    binary = om.bracket(psi5, 5, phi35.series, 35, 3)
    nary = om.nary_bracket([(psi5, 5), (phi35.series, 35)], 3)
    a, b, c = om.bracket_coefficients(3, 5, 35)
    discrepancy = (
        om.laplace(psi5) * phi35.series - psi5 * om.laplace(phi35.series)
    ).scale(c * (a - b))
    ok(binary - nary == discrepancy, "binary minus 2-ary is C(A-B)[LapF G - F LapG]")
    total = (psi5 + psi5 - psi5).scale(Fraction(3)).scale(Fraction(1, 3))
    ok(total == psi5, "arithmetic round-trip")

    print("prediction")
    fam = om.predict_family(3, [5, 30])
    primes = {(tuple(r["target"]), r["prime"], r["exponent"]) for r in fam["results"]}
    ok(
        primes == {((5,), 3, 1), ((30,), 59, 1), ((5, 30), 23, 1)},
        "first family predicts 3, 59, 23",
    )
    strict = om.predict_family(3, [5, 30], mode="strict")
    ok(
        all(r["prime"] != 3 for r in strict["results"]),
        "strict mode drops the shared-factor prime 3",
    )
    ident = om.predict_identity(13, 142, 1, 1950)
    ok(
        {(r["prime"], r["exponent"]) for r in ident["results"]} == {(13, 1), (5, 2)},
        "identity predicts 13 and 5^2",
    )
    pair = om.predict_pair(3, 5, 30)
    ok(len(pair["results"]) == 3, "predict_pair matches the family")

    print("catalog")
    report = om.run_catalog("valuation")
    ok(
        report["pass"] and report["matched"] == 65 and not report["missed"],
        "built-in catalog: 65/65 claims in valuation mode",
    )
    strict_report = om.run_catalog("strict")
    ok(strict_report["pass"] and strict_report["matched"] == 58, "58 strict claims")
    roundtrip = om.run_catalog("valuation", om.builtin_catalog_json())
    ok(roundtrip["pass"] and roundtrip["matched"] == 65, "catalog JSON round-trip")
    ok(om.signature_n("2U+E8") == 10, "signature n of 2U+E8")
    ok(om.signature_n("2U+2E8+A1") == 19, "signature n of 2U+2E8+A1")
    ok(om.eisenstein_constant("2U+E6", 4) == Fraction(-468), "Eisenstein constant on 2U+E6")

    print("serialization")
    text = phi35.series.to_fser()
    ok(om.Series.from_fser(text) == phi35.series, "FSER round-trip")
    rebuilt = om.Series(
        psi5.parity, psi5.prec, [(idx, coeff) for idx, coeff in psi5.terms()]
    )
    ok(rebuilt == psi5, "Series reconstructs from terms")

    print(f"all {checks} smoke checks passed")


if __name__ == "__main__":
    main()
