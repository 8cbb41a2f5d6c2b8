"""Acceptance criteria, one test each.

Every test prints a ``PASS``/``FAIL`` line (also collected in the pytest
terminal summary).  Run ``python3 tests/test_acceptance.py`` for the lines
alone.  Criteria are checked as stated; an unattainable one fails with its
blocking analysis in the message.
"""

from __future__ import annotations

import random
import sys
import tempfile
import time
from pathlib import Path

import pytest

from idd.algebra import AlgebraSpec, build_table, parse_spec
from idd.classify import (
    EXHAUSTIVE_MAX_DIM, Discrepancy, classify, pro_nilpotent_window_check, triviality_bruteforce,
    triviality_predicate,
)
from idd.cli import main
from idd.derivations import (
    INFINITE_FAMILIES, check_leibniz, family_specs, find_family, infinite_family_check,
    random_kernel_map, random_non_kernel_map, solve_derivations,
)
from idd.identities import StarTable, check_conservative, check_generalized_associative, check_left_commutative
from idd.verify import EXPLICIT_TABLES, explicit_table

SEED = 20250101
GRID = [(k, n, a, b) for k in range(4) for n in range(k, 11) for a in range(-3, 4) for b in range(-3, 4)]


def _timed(fn):
    t0 = time.perf_counter()
    out = fn()
    return out, time.perf_counter() - t0


# --- criteria ------------------------------------------------------------------

def criterion_1():
    def scan():
        bad = set()
        for k, n, a, b in GRID:
            spec = AlgebraSpec(k, n, a, b).normalized()
            if triviality_predicate(spec) != triviality_bruteforce(build_table(spec)):
                bad.add(str(spec))
        return sorted(bad)
    bad, secs = _timed(scan)
    ok = not bad and secs < 10
    return ok, (f"{len(GRID)} grid points, {len(bad)} normalized disagreements {bad}, {secs:.1f}s; "
                "in each the derivative kills the low indices and no product lands in the basis")


def criterion_2():
    def scan():
        bad = []
        for k, m1, m2, *_ in EXPLICIT_TABLES:
            for n in range(max(k, 1), 11):
                if build_table(AlgebraSpec(k, n, m1, m2)).entries != explicit_table(k, m1, m2, n):
                    bad.append((k, n, m1, m2))
        return bad
    bad, secs = _timed(scan)
    return not bad and secs < 1, f"{len(EXPLICIT_TABLES)} listed tables for n <= 10, mismatches {bad}, {secs:.2f}s"


def criterion_3():
    def scan():
        seen, verdicts, conflicts = set(), {}, []
        for k, n, a, b in GRID:
            spec = AlgebraSpec(k, n, a, b).normalized()
            if spec in seen or triviality_bruteforce(build_table(spec)):
                continue
            seen.add(spec)
            assert spec.dim <= EXHAUSTIVE_MAX_DIM
            try:
                c = classify(spec, SEED)
                verdicts[c.verdict] = verdicts.get(c.verdict, 0) + 1
                if c.case in ("perfect_top", "perfect_bottom"):
                    assert c.proper_ideals == spec.n - spec.k
                if c.case == "simple":
                    assert c.witnesses["probes"]["random"] == 50 and c.witnesses["probes"]["failures"] == 0
            except Discrepancy as exc:
                conflicts.append((str(spec), exc.details["reason"]))
        return len(seen), verdicts, conflicts
    (count, verdicts, conflicts), secs = _timed(scan)
    ok = not conflicts and secs < 60
    return ok, (f"{count} nontrivial specs, verdicts {verdicts}, {len(conflicts)} case-split conflicts "
                f"(first: {conflicts[:3]}), {secs:.1f}s; every conflict has m1 > k so a derivative "
                "annihilates e_k, giving annihilator or non-monomial ideals")


def _witness_verified(rep) -> bool:
    t = build_table(rep.spec)
    maps = {nm.name: nm.map for nm in rep.paper_basis}
    for d in rep.discrepancies:
        if d["kind"] == "named_map_fails_leibniz":
            res = check_leibniz(t, maps[d["map"]])
            if res.ok or list(res.witness) != d["witness"]:
                return False
        elif d["kind"] == "derivation_outside_named_span" and d["leibniz_ok"] is not True:
            return False
    return bool(rep.discrepancies)


LISTED_DIMS = {
    ("K0", "1,0"): lambda n: 2, ("K1", "1,0"): lambda n: 1, ("K0", "0,-1"): lambda n: n + 1,
    ("K1", "0,-1"): lambda n: n + 2, ("K0", "2,0"): lambda n: 2, ("K1", "2,0"): lambda n: 1,
    ("K0", "1,1"): lambda n: 2, ("K1", "1,1"): lambda n: 2, ("K0", "1,-1"): lambda n: 1,
    ("K1", "1,-1"): lambda n: 3, ("K0", "-1,-1"): lambda n: 9, ("K1", "-1,-1"): lambda n: 16,
    ("K0", "0,-2"): lambda n: 7, ("K1", "0,-2"): lambda n: 12,
}


def _derivation_reports(n_max):
    return [solve_derivations(s) for s in family_specs(n_max)]


def criterion_4():
    reps, secs = _timed(lambda: _derivation_reports(25))
    matched, flagged, silent = 0, 0, []
    for rep in reps:
        fam = find_family(rep.spec)
        k_part, _, ms = fam.key.split(":")
        claimed = rep.claimed_dim
        if fam.n_max is None:
            claimed = LISTED_DIMS[(k_part, ms)](rep.spec.n)
            assert claimed == rep.claimed_dim or rep.spec.n < 3, fam.key
        if rep.kernel_dim == claimed and rep.span_match:
            matched += 1
        elif _witness_verified(rep):
            flagged += 1
        else:
            silent.append(str(rep.spec))
    listed = {str(r.spec): r.kernel_dim for r in reps if str(r.spec) in ("K1:7:-1,-1", "K1:7:0,-2")}
    ok = not silent and secs < 300 and listed == {"K1:7:-1,-1": 15, "K1:7:0,-2": 13}
    return ok, (f"{len(reps)} instances to n = 25: {matched} match, {flagged} machine-verified discrepancies, "
                f"{len(silent)} silent {silent[:5]}; K1_7 dims {listed}; {secs:.1f}s")


def criterion_5():
    reps = _derivation_reports(25)
    unflagged = [str(r.spec) for r in reps if not r.span_match and not _witness_verified(r)]
    equal = sum(bool(r.span_match) for r in reps)
    return not unflagged, f"{equal}/{len(reps)} spans equal, rest flagged with witnesses; unflagged {unflagged}"


def criterion_6():
    def scan():
        rng = random.Random(SEED)
        problems, specs = [], [s for s in family_specs(12)]
        for spec in specs:
            rep = solve_derivations(spec)
            t = build_table(spec)
            if not all(check_leibniz(t, D).ok for D in rep.kernel_maps()):
                problems.append((str(spec), "kernel basis"))
            if not all(check_leibniz(t, random_kernel_map(rep, rng)).ok for _ in range(100)):
                problems.append((str(spec), "random combination"))
            for _ in range(100):
                res = check_leibniz(t, random_non_kernel_map(rep, rng))
                if res.ok or res.witness is None:
                    problems.append((str(spec), "non-kernel map passed"))
                    break
        return len(specs), problems
    (count, problems), secs = _timed(scan)
    return not problems, f"{count} specs, 100 + 100 random maps each, problems {problems[:5]}, {secs:.1f}s"


def criterion_7():
    def scan():
        rows, low, failed = [], [], []
        for m in range(-2, 4):
            for k in range(3):
                t = build_table(AlgebraSpec(k, 20, m, 0, infinite=True))
                s = StarTable(t.spec)
                reps = [check_left_commutative(t), check_generalized_associative(t, s), check_conservative(t, s)]
                if not all(r.passed for r in reps):
                    failed.append(str(t.spec))
                if reps[2].checked <= 500:
                    low.append((str(t.spec), reps[2].checked))
                rows.append(reps[2].checked)
        witness = check_left_commutative(build_table(parse_spec("K0:inf@20:1,1"))).witness
        return rows, low, failed, witness
    (rows, low, failed, witness), secs = _timed(scan)
    ok = not failed and not low and witness is not None and secs < 120
    return ok, (f"18 configurations, identity failures {failed}, min safe quadruples {min(rows)}, "
                f"configurations at or below 500 {low}, (1,1) witness {witness and witness['triple']}, {secs:.1f}s; "
                "for k = 2, m = -2 every term of the conservative identity lands on e_(a+b+x+y+6), so safe "
                "quadruples need a+b+x+y <= 14 with every index >= 2: exactly C(10,4) = 210")


PRO_NILPOTENT_WINDOWS = ["K1:inf@30:0,0", "K2:inf@30:1,0", "K3:inf@30:2,-1"]


def criterion_8():
    def scan():
        return {s: pro_nilpotent_window_check(build_table(parse_spec(s))) for s in PRO_NILPOTENT_WINDOWS}
    res, secs = _timed(scan)
    ok = all(r["pass"] for r in res.values()) and secs < 5
    return ok, f"{ {s: (r['pass'], r['verified_t']) for s, r in res.items()} }, {secs:.2f}s"


def criterion_9():
    def scan():
        out = []
        for fam in INFINITE_FAMILIES:
            r = infinite_family_check(AlgebraSpec(fam.k, 30, fam.m1, fam.m2, infinite=True), fam)
            out.append((fam.key, r["leibniz_ok"], r["interior_within_corollary"], r["interior_equal"]))
        return out
    res, secs = _timed(scan)
    bad = [r[0] for r in res if not (r[1] and r[2])]
    strict = [r[0] for r in res if not r[3]]
    return not bad and secs < 120, (f"{len(res)} corollaries at N = 30, failing {bad}; corollary interior "
                                    f"strictly larger than window kernel for {strict}, {secs:.1f}s")


def criterion_10():
    def run():
        with tempfile.TemporaryDirectory() as d:
            paths = [Path(d) / "a.json", Path(d) / "b.json"]
            codes = [main(["verify-paper", "--scope", "all", "--n-max", "15", "--out", str(p)]) for p in paths]
            return codes, paths[0].read_bytes() == paths[1].read_bytes(), len(paths[0].read_bytes())
    (codes, same, size), secs = _timed(run)
    return same and codes == [0, 0], f"two runs, exit codes {codes}, byte-identical {same}, {size} bytes, {secs:.1f}s"


CRITERIA = {i: globals()[f"criterion_{i}"] for i in range(1, 11)}


@pytest.mark.parametrize("number", sorted(CRITERIA))
def test_criterion(number, record_property, capsys):
    ok, detail = CRITERIA[number]()
    line = f"{'PASS' if ok else 'FAIL'} criterion {number}: {detail}"
    record_property("acceptance", line)
    with capsys.disabled():
        print(f"\n{line}")
    assert ok, line


if __name__ == "__main__":
    results = []
    for number, fn in sorted(CRITERIA.items()):
        ok, detail = fn()
        print(f"{'PASS' if ok else 'FAIL'} criterion {number}: {detail}", flush=True)
        results.append(ok)
    sys.exit(0 if all(results) else 1)
