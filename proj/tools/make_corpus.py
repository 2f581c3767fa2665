#!/usr/bin/env python3
"""Writes the toy SMT-LIB corpus under data/smt (deterministic).

Each file states a valid LIA fact, or asserts the negation of one (an unsat
instance), built around repeated integer subterms so that anti-unification
has something to generalize.
"""
import argparse
import random
from pathlib import Path

NAMES = ["a", "b", "c", "d", "m", "n", "p", "q", "s", "t", "u", "v", "w", "z"]


def pick_vars(rng, k):
    return rng.sample(NAMES, k)


def header(names):
    return "".join(f"(declare-fun {n} () Int)\n" for n in names)


def gt_ite(rng, x, y, larger=True):
    # (ite cond x y) selecting the larger (or smaller) of x and y
    forms = [
        (f"(>= {x} {y})", f"(<= {y} {x})", f"(> {x} {y})", f"(< {y} {x})"),
        (f"(<= {x} {y})", f"(>= {y} {x})", f"(< {x} {y})", f"(> {y} {x})"),
    ]
    cond = rng.choice(forms[0] if larger else forms[1])
    return f"(ite {cond} {x} {y})"


def fam_max(rng):
    x, y = pick_vars(rng, 2)
    m = gt_ite(rng, x, y, True)
    body = f"(and (>= {m} {x}) (>= {m} {y}) (or (= {m} {x}) (= {m} {y})))"
    return [x, y], body


def fam_min(rng):
    x, y = pick_vars(rng, 2)
    m = gt_ite(rng, x, y, False)
    body = f"(and (<= {m} {x}) (<= {m} {y}) (or (= {m} {x}) (= {m} {y})))"
    return [x, y], body


def fam_abs(rng):
    (x,) = pick_vars(rng, 1)
    k = rng.randint(0, 1)
    cond = [f"(>= {x} 0)", f"(< {x} 0)"][k]
    a = f"(ite {cond} {x} (- {x}))" if k == 0 else f"(ite {cond} (- {x}) {x})"
    body = f"(and (>= {a} {x}) (>= {a} (- {x})) (or (= {a} {x}) (= {a} (- {x}))))"
    return [x], body


def fam_absdiff(rng):
    x, y = pick_vars(rng, 2)
    d = f"(ite (>= {x} {y}) (- {x} {y}) (- {y} {x}))"
    body = f"(and (>= {d} (- {x} {y})) (>= {d} (- {y} {x})) (>= {d} 0))"
    return [x, y], body


def fam_scaled_sum(rng):
    a, b, c, d, u, v = pick_vars(rng, 6)
    k = rng.randint(2, 5)
    body = (f"(=> (and (= {u} (+ (* {k} {a}) {b})) (= {v} (+ (* {k} {c}) {d}))) "
            f"(= (+ {u} {v}) (+ (* {k} (+ {a} {c})) {b} {d})))")
    return [a, b, c, d, u, v], body


def fam_double(rng):
    a, b, u, v = pick_vars(rng, 4)
    body = f"(=> (and (= {u} (+ {a} {a})) (= {v} (+ {b} {b}))) (= (+ {u} {v}) (* 2 (+ {a} {b}))))"
    return [a, b, u, v], body


def fam_offset(rng):
    a, b, u, v = pick_vars(rng, 4)
    k = rng.randint(2, 9)
    body = f"(=> (and (= {u} (+ {a} {k})) (= {v} (+ {b} {k}))) (= (+ {u} {v}) (+ {a} {b} {2 * k})))"
    return [a, b, u, v], body


def fam_diff(rng):
    a, b, c, d, u, v = pick_vars(rng, 6)
    body = f"(=> (and (= {u} (- {a} {b})) (= {v} (- {c} {d}))) (= (+ {u} {v} {b} {d}) (+ {a} {c})))"
    return [a, b, c, d, u, v], body


def fam_clamp(rng):
    (x,) = pick_vars(rng, 1)
    lo = rng.randint(-5, 0)
    hi = rng.randint(1, 6)
    lo_s = f"(- {-lo})" if lo < 0 else str(lo)
    c = f"(ite (< {x} {lo_s}) {lo_s} (ite (> {x} {hi}) {hi} {x}))"
    body = f"(and (>= {c} {lo_s}) (<= {c} {hi}) (=> (and (>= {x} {lo_s}) (<= {x} {hi})) (= {c} {x})))"
    return [x], body


def fam_max3(rng):
    x, y, z = pick_vars(rng, 3)
    inner = f"(ite (>= {x} {y}) {x} {y})"
    m = f"(ite (>= {inner} {z}) {inner} {z})"
    body = f"(and (>= {m} {x}) (>= {m} {y}) (>= {m} {z}))"
    return [x, y, z], body


def fam_chain(rng):
    a, b, c, u = pick_vars(rng, 4)
    body = f"(=> (= {u} (+ {a} {b} {c})) (= (- {u} {c}) (+ {a} {b})))"
    return [a, b, c, u], body


def fam_affine(rng):
    a, b, u, v = pick_vars(rng, 4)
    k = rng.randint(2, 5)
    c = rng.randint(1, 9)
    body = (f"(=> (and (= {u} (+ (* {k} {a}) {c})) (= {v} (+ (* {k} {b}) {c}))) "
            f"(= (- {u} {v}) (* {k} (- {a} {b}))))")
    return [a, b, u, v], body


def fam_lin2(rng):
    a, b, c, d, u, v = pick_vars(rng, 6)
    j, k = rng.sample(range(2, 6), 2)
    body = (f"(=> (and (= {u} (+ (* {j} {a}) (* {k} {b}))) (= {v} (+ (* {j} {c}) (* {k} {d})))) "
            f"(= (+ {u} {v}) (+ (* {j} (+ {a} {c})) (* {k} (+ {b} {d})))))")
    return [a, b, c, d, u, v], body


def fam_maxoff(rng):
    x, y = pick_vars(rng, 2)
    k = rng.randint(1, 9)
    m = f"(ite (>= {x} {y}) (+ {x} {k}) (+ {y} {k}))"
    body = f"(and (>= {m} (+ {x} {k})) (>= {m} (+ {y} {k})) (or (= {m} (+ {x} {k})) (= {m} (+ {y} {k}))))"
    return [x, y], body


def fam_cap(rng):
    (x,) = pick_vars(rng, 1)
    k = rng.randint(1, 9)
    m = f"(ite (>= {x} {k}) {k} {x})"
    body = f"(and (<= {m} {k}) (<= {m} {x}) (or (= {m} {k}) (= {m} {x})))"
    return [x], body


def fam_sum3(rng):
    a, b, c, d, e, g, u, v = pick_vars(rng, 8)
    body = (f"(=> (and (= {u} (+ {a} (+ {b} {c}))) (= {v} (+ {d} (+ {e} {g})))) "
            f"(= (+ {u} {v}) (+ {a} {b} {c} {d} {e} {g})))")
    return [a, b, c, d, e, g, u, v], body


def fam_sign(rng):
    (x,) = pick_vars(rng, 1)
    s = f"(ite (> {x} 0) 1 (ite (< {x} 0) (- 1) 0))"
    body = f"(and (=> (> {x} 0) (= {s} 1)) (=> (< {x} 0) (= {s} (- 1))) (=> (= {x} 0) (= {s} 0)))"
    return [x], body


FAMILIES = {
    "max": fam_max,
    "min": fam_min,
    "abs": fam_abs,
    "absdiff": fam_absdiff,
    "scaled_sum": fam_scaled_sum,
    "double": fam_double,
    "offset": fam_offset,
    "diff": fam_diff,
    "clamp": fam_clamp,
    "max3": fam_max3,
    "chain": fam_chain,
    "affine": fam_affine,
    "lin2": fam_lin2,
    "maxoff": fam_maxoff,
    "cap": fam_cap,
    "sum3": fam_sum3,
    "sign": fam_sign,
}


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--out", default=str(Path(__file__).resolve().parent.parent / "data" / "smt"))
    ap.add_argument("--per-family", type=int, default=10)
    ap.add_argument("--seed", type=int, default=2023)
    args = ap.parse_args()
    rng = random.Random(args.seed)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    for family, make in FAMILIES.items():
        for i in range(args.per_family):
            names, body = make(rng)
            negate = rng.random() < 0.5
            assertion = f"(assert (not {body}))" if negate else f"(assert {body})"
            logic = "QF_LIA"
            text = f"(set-logic {logic})\n{header(names)}{assertion}\n(check-sat)\n"
            (out / f"{family}_{i:02d}.smt2").write_text(text)


if __name__ == "__main__":
    main()
