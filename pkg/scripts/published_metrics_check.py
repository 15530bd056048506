"""Check the arithmetic identities of a published per-criterion metrics table.

Input is a TSV with the report.tsv columns (criterion, p_met, r_met, spec,
f_met, p_notmet, r_notmet, f_notmet, overall_f, auc) and rows named
``micro`` and ``macro``. Prints every row and the largest deviation of each
identity; exits 1 when any deviation exceeds the tolerance.

    python3 scripts/published_metrics_check.py tests/data/published_summary.tsv
"""

import argparse
import sys
from statistics import fmean

from cohort_sieve.evaluate import TSV_COLUMNS, f_score, read_tsv


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("tables", nargs="+")
    parser.add_argument("--tol", type=float, default=0.001)
    args = parser.parse_args()

    failed = False
    for path in args.tables:
        with open(path, encoding="utf-8") as fh:
            table = read_tsv(fh.read())
        per = {k: v for k, v in table.items() if k not in ("micro", "macro")}
        worst = {"F=HM(P,R)": 0.0, "overall=mean(F)": 0.0, "AUC=(R+S)/2": 0.0, "macro=col mean": 0.0}
        for name, r in {**per, "micro": table["micro"]}.items():
            worst["F=HM(P,R)"] = max(
                worst["F=HM(P,R)"],
                abs(f_score(r["p_met"], r["r_met"]) - r["f_met"]),
                abs(f_score(r["p_notmet"], r["r_notmet"]) - r["f_notmet"]),
            )
            worst["overall=mean(F)"] = max(worst["overall=mean(F)"], abs((r["f_met"] + r["f_notmet"]) / 2 - r["overall_f"]))
            worst["AUC=(R+S)/2"] = max(worst["AUC=(R+S)/2"], abs((r["r_met"] + r["spec"]) / 2 - r["auc"]))
        for col in TSV_COLUMNS[1:]:
            worst["macro=col mean"] = max(
                worst["macro=col mean"], abs(fmean(r[col] for r in per.values()) - table["macro"][col])
            )
        print(f"{path}: {len(per)} criteria")
        for k, v in worst.items():
            ok = v <= args.tol
            failed |= not ok
            print(f"  {'ok  ' if ok else 'FAIL'} {k:<16} max deviation {v:.5f}")
    return 1 if failed else 0


if __name__ == "__main__":
    sys.exit(main())
