"""Registered theorem checks behind ``idd verify-paper``.

Each scope expands into a deterministic list of tasks; a task is a picklable
``(function name, args)`` pair so that a process pool can run it.  Every
task returns ``{"status", "details"}`` where the status is

* ``PASS``: the claim holds on this instance,
* ``DISCREPANCY``: the claim is refuted by a machine-checked witness,
* ``FAIL``: the code disagrees with itself (a bug, never a claim problem).
"""

from __future__ import annotations

import traceback
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable

from idd.algebra import AlgebraSpec, build_table, is_multiplicative_basis, is_strong_multiplicative, opposite_table
from idd.classify import (
    Discrepancy, classify, classify_window, triviality_bruteforce, triviality_predicate,
)
from idd.derivations import (
    DEFAULT_MARGIN, FAMILIES, INFINITE_FAMILIES, check_leibniz, family_specs, find_family,
    infinite_family_check, solve_derivations,
)
from idd.identities import StarTable, check_conservative, check_generalized_associative, check_left_commutative
from idd.scalars import render

PASS, FAIL, DISCREPANCY = "PASS", "FAIL", "DISCREPANCY"

GRID_K = range(0, 4)
GRID_M = range(-3, 4)
GRID_N_CAP = 10
WINDOW_N = 30
IDENTITY_N = 20
IDENTITY_M = range(-2, 4)
IDENTITY_K = range(0, 3)


def _outcome(ok: bool, details: dict, *, refuted_status: str = DISCREPANCY) -> dict:
    return {"status": PASS if ok else refuted_status, "details": details}


# --- explicit low-rank tables ------------------------------------------------------

def _q(x) -> Fraction:
    return Fraction(x)


# (k, m1, m2, coefficient of e_(i+j-l), lowest i+j, highest i+j as a function of n)
EXPLICIT_TABLES: list[tuple[int, int, int, Callable, int, Callable]] = [
    (0, 1, 0, lambda i, j: _q(i), 1, lambda n: n + 1),
    (1, 1, 0, lambda i, j: _q(i), 2, lambda n: n + 1),
    (0, 0, -1, lambda i, j: Fraction(1, j + 1), 0, lambda n: n - 1),
    (1, 0, -1, lambda i, j: Fraction(1, j + 1), 2, lambda n: n - 1),
    (0, 2, 0, lambda i, j: _q(i * (i - 1)), 2, lambda n: n + 2),
    (1, 2, 0, lambda i, j: _q(i * (i - 1)), 3, lambda n: n + 2),
    (0, 1, 1, lambda i, j: _q(i * j), 2, lambda n: n + 2),
    (1, 1, 1, lambda i, j: _q(i * j), 3, lambda n: n + 2),
    (0, 1, -1, lambda i, j: Fraction(i, j + 1), 1, lambda n: n),
    (1, 1, -1, lambda i, j: Fraction(i, j + 1), 2, lambda n: n),
    (0, -1, -1, lambda i, j: Fraction(1, (i + 1) * (j + 1)), 0, lambda n: n - 2),
    (1, -1, -1, lambda i, j: Fraction(1, (i + 1) * (j + 1)), 2, lambda n: n - 2),
    (0, 0, -2, lambda i, j: Fraction(1, (j + 1) * (j + 2)), 0, lambda n: n - 2),
    (1, 0, -2, lambda i, j: Fraction(1, (j + 1) * (j + 2)), 2, lambda n: n - 2),
]


def explicit_table(k: int, m1: int, m2: int, n: int) -> dict[tuple[int, int], Fraction]:
    """Nonzero entries of a listed table, written out from its closed form."""
    for k_, a, b, coeff, lo, hi in EXPLICIT_TABLES:
        if (k_, a, b) == (k, m1, m2):
            out = {}
            for i in range(k, n + 1):
                for j in range(k, n + 1):
                    if lo <= i + j <= hi(n):
                        c = coeff(i, j)
                        if c:
                            out[(i, j)] = c
            return out
    raise KeyError(f"no listed table for K{k} ({m1},{m2})")


def check_explicit_table(k: int, m1: int, m2: int, n_max: int) -> dict:
    mismatches = []
    for n in range(max(k, 1), n_max + 1):
        spec = AlgebraSpec(k, n, m1, m2)
        got = build_table(spec).entries
        want = explicit_table(k, m1, m2, n)
        for key in sorted(set(got) | set(want)):
            if got.get(key) != want.get(key):
                mismatches.append({"n": n, "pair": list(key), "built": render(got.get(key, Fraction(0))),
                                   "listed": render(want.get(key, Fraction(0)))})
    return _outcome(not mismatches, {"n_range": [max(k, 1), n_max], "mismatches": mismatches[:10]},
                    refuted_status=FAIL)


# --- opposite algebras and multiplicative bases --------------------------------------

def check_opposite(k: int, m1: int, m2: int, n_hi: int) -> dict:
    bad = []
    for n in range(k, n_hi + 1):
        spec = AlgebraSpec(k, n, m1, m2)
        t = build_table(spec)
        if opposite_table(t) != build_table(spec.opposite()):
            bad.append(str(spec))
        if m1 == m2 and any(t.entries.get((j, i)) != c for (i, j), c in t.entries.items()):
            bad.append(f"{spec} not commutative")
    return _outcome(not bad, {"n_range": [k, n_hi], "failures": bad}, refuted_status=FAIL)


def check_multiplicative(k: int, n_hi: int) -> dict:
    bad = [str(AlgebraSpec(k, n, a, b)) for n in range(k, n_hi + 1) for a in GRID_M for b in GRID_M
           if not is_multiplicative_basis(build_table(AlgebraSpec(k, n, a, b)))]
    return _outcome(not bad, {"n_range": [k, n_hi], "failures": bad}, refuted_status=FAIL)


def check_strong_multiplicative(k: int, m1: int, m2: int, window: int) -> dict:
    spec = AlgebraSpec(k, window, m1, m2, infinite=True)
    t = build_table(spec)
    if is_strong_multiplicative(t):
        return _outcome(True, {"spec": str(spec)})
    zero = next([i, j] for i in spec.indices for j in spec.indices
                if t.in_window(i, j) and (i, j) not in t.entries)
    return _outcome(False, {"spec": str(spec), "zero_product": zero,
                            "target": zero[0] + zero[1] - spec.level})


# --- triviality and classification ---------------------------------------------------

def _normalized_pairs():
    return [(a, b) for a in GRID_M for b in GRID_M if a >= b]


def check_triviality(k: int, n: int) -> dict:
    mismatches = []
    for a, b in _normalized_pairs():
        spec = AlgebraSpec(k, n, a, b)
        pred = triviality_predicate(spec)
        scan = triviality_bruteforce(build_table(spec))
        if pred != scan:
            mismatches.append({"spec": str(spec), "predicate_trivial": pred, "scan_trivial": scan})
    return _outcome(not mismatches, {"specs": len(_normalized_pairs()), "mismatches": mismatches})


def check_classification(k: int, n: int, m1: int, m2: int, seed: int) -> dict:
    spec = AlgebraSpec(k, n, m1, m2)
    try:
        c = classify(spec, seed)
    except Discrepancy as exc:
        return {"status": DISCREPANCY, "details": exc.details}
    if c.verdict == "Unclassified":
        return {"status": FAIL, "details": c.to_json()}
    return {"status": PASS, "details": {"verdict": c.verdict, "case": c.case,
                                        "nilpotency_index": c.nilpotency_index,
                                        "proper_ideals": c.proper_ideals}}


def classification_grid(n_hi: int) -> list[tuple[int, int, int, int]]:
    out = []
    for k in GRID_K:
        for n in range(k, n_hi + 1):
            for a, b in _normalized_pairs():
                if not triviality_bruteforce(build_table(AlgebraSpec(k, n, a, b))):
                    out.append((k, n, a, b))
    return out


def check_pro_nilpotent(k: int, m1: int, m2: int, window: int, seed: int) -> dict:
    r = classify_window(AlgebraSpec(k, window, m1, m2, infinite=True), seed)
    details = {"verdict": r["verdict"], "min_index_law": r["oracle_agreement"]}
    if not r["oracle_agreement"]:
        details["chain"] = [row for row in r["witnesses"].get("chain", []) if not row["pass"]][:3]
    if r["verdict"] != "ProNilpotent":
        return {"status": FAIL, "details": details}
    return _outcome(r["oracle_agreement"], details)


def pro_nilpotent_specs() -> list[tuple[int, int, int]]:
    return [(k, a, b) for k in range(1, 4) for a, b in _normalized_pairs() if a + b < k]


# --- identities -----------------------------------------------------------------

def check_conservativity(k: int, m: int, window: int) -> dict:
    t = build_table(AlgebraSpec(k, window, m, 0, infinite=True))
    s = StarTable(t.spec)
    reps = [check_left_commutative(t), check_generalized_associative(t, s), check_conservative(t, s)]
    details = {r.identity: {"pass": r.passed, "checked": r.checked, "excluded_unsafe": r.excluded_unsafe,
                            "excluded_undefined_star": r.excluded_undefined_star}
               for r in reps}
    for r in reps:
        if r.witness:
            details[r.identity]["witness"] = r.witness
    return _outcome(all(r.passed for r in reps), details)


def check_left_commutative_counterexample(k: int, m1: int, m2: int, window: int) -> dict:
    """Left-commutativity is only claimed for ``m2 = 0``; here it must visibly fail."""
    r = check_left_commutative(build_table(AlgebraSpec(k, window, m1, m2, infinite=True)))
    return {"status": PASS if r.witness else FAIL, "details": r.to_json()}


# --- derivations ------------------------------------------------------------------

def check_derivation_instance(k: int, n: int, m1: int, m2: int) -> dict:
    spec = AlgebraSpec(k, n, m1, m2)
    rep = solve_derivations(spec)
    t = build_table(spec)
    bad_basis = [idx for idx, D in enumerate(rep.kernel_maps()) if not check_leibniz(t, D).ok]
    details = {"family": rep.family, "kernel_dim": rep.kernel_dim, "claimed_dim": rep.claimed_dim,
               "span_match": rep.span_match, "discrepancies": rep.discrepancies}
    if bad_basis or any(d.get("leibniz_ok") is False for d in rep.discrepancies):
        details["kernel_vectors_failing_leibniz"] = bad_basis
        return {"status": FAIL, "details": details}
    return _outcome(rep.span_match and not rep.discrepancies, details)


def check_corollary(key: str, window: int, margin: int) -> dict:
    fam = next(f for f in INFINITE_FAMILIES if f.key == key)
    spec = AlgebraSpec(fam.k, window, fam.m1, fam.m2, infinite=True)
    r = infinite_family_check(spec, fam, margin)
    details = {k: r[k] for k in ("leibniz_ok", "safe_pairs_checked", "window_kernel_dim", "boundary_dim",
                                 "interior_dim", "corollary_interior_dim", "interior_within_corollary",
                                 "interior_equal")}
    for opt in ("generator_count_mismatch", "extra_interior"):
        if opt in r:
            details[opt] = r[opt]
    if not r["leibniz_ok"]:
        details["failing_maps"] = [m for m in r["per_map"] if not m["ok"]]
    ok = r["leibniz_ok"] and r["interior_within_corollary"] and "generator_count_mismatch" not in r
    return _outcome(ok, details)


# --- registry ----------------------------------------------------------------------

@dataclass(frozen=True)
class Task:
    scope: str
    instance: str
    claim: str
    fn: str
    args: tuple


def _m(x: int) -> str:
    return f"m{-x}" if x < 0 else str(x)


def derivation_scope(m1: int, m2: int) -> str:
    return f"der-{_m(m1)}-{_m(m2)}"


DERIVATION_SCOPES = sorted({derivation_scope(f.m1, f.m2) for f in FAMILIES})
SCOPES = ["tables", "opposite", "bases", "triviality", "classification", "pro-nilpotence",
          "conservativity", *DERIVATION_SCOPES, "der-inf"]


def tasks_for(scope: str, n_max: int, seed: int, margin: int = DEFAULT_MARGIN) -> list[Task]:
    if scope == "all":
        return [t for s in SCOPES for t in tasks_for(s, n_max, seed, margin)]
    grid_hi = min(n_max, GRID_N_CAP)
    if scope == "tables":
        return [Task(scope, f"K{k} ({m1},{m2})", "listed multiplication table", "check_explicit_table",
                     (k, m1, m2, n_max)) for k, m1, m2, *_ in EXPLICIT_TABLES]
    if scope == "opposite":
        return [Task(scope, f"K{k} ({a},{b})", "opposite algebra is the transposed table",
                     "check_opposite", (k, a, b, grid_hi)) for k in GRID_K for a, b in _normalized_pairs()]
    if scope == "bases":
        out = [Task(scope, f"K{k} all (m1,m2)", "multiplicative basis", "check_multiplicative", (k, grid_hi))
               for k in GRID_K]
        out += [Task(scope, f"K{k}:inf@{WINDOW_N}:{a},{b}", "strong multiplicative basis when k >= m1 >= m2",
                     "check_strong_multiplicative", (k, a, b, WINDOW_N))
                for k in GRID_K for a, b in _normalized_pairs() if k >= a]
        return out
    if scope == "triviality":
        return [Task(scope, f"K{k} n={n}", "triviality criterion", "check_triviality", (k, n))
                for k in GRID_K for n in range(k, grid_hi + 1)]
    if scope == "classification":
        return [Task(scope, str(AlgebraSpec(k, n, a, b)), "level case split", "check_classification",
                     (k, n, a, b, seed)) for k, n, a, b in classification_grid(grid_hi)]
    if scope == "pro-nilpotence":
        return [Task(scope, str(AlgebraSpec(k, WINDOW_N, a, b, True)), "pro-nilpotent below level k",
                     "check_pro_nilpotent", (k, a, b, WINDOW_N, seed)) for k, a, b in pro_nilpotent_specs()]
    if scope == "conservativity":
        out = [Task(scope, str(AlgebraSpec(k, IDENTITY_N, m, 0, True)),
                    "left-commutative, generalized associative, conservative", "check_conservativity",
                    (k, m, IDENTITY_N)) for m in IDENTITY_M for k in IDENTITY_K]
        out.append(Task(scope, str(AlgebraSpec(0, IDENTITY_N, 1, 1, True)),
                        "left-commutativity needs m2 = 0 (counterexample expected)",
                        "check_left_commutative_counterexample", (0, 1, 1, IDENTITY_N)))
        return out
    if scope == "der-inf":
        return [Task(scope, f.key, f.citation, "check_corollary", (f.key, WINDOW_N, margin))
                for f in INFINITE_FAMILIES]
    if scope in DERIVATION_SCOPES:
        out = []
        for spec in family_specs(n_max):
            if derivation_scope(spec.m1, spec.m2) == scope:
                fam = find_family(spec)
                out.append(Task(scope, str(spec), fam.citation, "check_derivation_instance",
                                (spec.k, spec.n, spec.m1, spec.m2)))
        return out
    raise KeyError(scope)


_FUNCS = {f.__name__: f for f in (
    check_explicit_table, check_opposite, check_multiplicative, check_strong_multiplicative,
    check_triviality, check_classification, check_pro_nilpotent, check_conservativity,
    check_left_commutative_counterexample, check_derivation_instance, check_corollary,
)}


def run_task(task: Task) -> dict:
    try:
        res = _FUNCS[task.fn](*task.args)
    except Exception as exc:  # surfaced as a failing instance, never swallowed
        res = {"status": FAIL, "details": {"error": f"{type(exc).__name__}: {exc}",
                                           "trace": traceback.format_exc().splitlines()[-3:]}}
    return {"scope": task.scope, "instance": task.instance, "claim": task.claim, **res}
