"""Replicated sampling study: estimation error, test level, and test power
with and without contamination.

Generates from a two-point fixed design with true parameters (1, 1, 1),
optionally swapping the regression vector to (1.5, 2) on 10% of the sample,
and summarizes the usual robustness picture: maximum likelihood wins on
clean data, the robust fits win decisively once contamination enters.

Writes plot-ready CSV files next to this script (study_clean.csv,
study_contaminated.csv).
"""

from pathlib import Path

from renyireg import (
    ContaminationSpec,
    DesignSpec,
    StudyConfig,
    run_study,
    write_study_csv,
)

HERE = Path(__file__).resolve().parent


def summarize(label, contamination):
    config = StudyConfig(
        design=DesignSpec(kind="two_point", n=200, a=1.0, b=5.0),
        alphas=(0.0, 0.3, 0.7, 1.0),
        replications=500,
        seed=1234,
        contamination=contamination,
    )
    result = run_study(config)
    print(f"\n=== {label} (n = 200, 500 replications) ===")
    print(f"{'alpha':>6} {'rmse':>8} {'level b1':>9} {'level s':>8} {'power b1':>9} {'power s':>8}")
    for (alpha, _), cell in sorted(result.cells.items()):
        print(
            f"{alpha:>6.1f} {cell['rmse']:>8.4f} {cell['level']['beta1']:>9.3f} "
            f"{cell['level']['sigma']:>8.3f} {cell['power']['beta1']:>9.3f} "
            f"{cell['power']['sigma']:>8.3f}"
        )
    return result


clean = summarize("clean data", None)
dirty = summarize("10% contamination", ContaminationSpec(fraction=0.10))
write_study_csv(clean, HERE / "study_clean.csv")
write_study_csv(dirty, HERE / "study_contaminated.csv")
print("\nwrote", HERE / "study_clean.csv")
print("wrote", HERE / "study_contaminated.csv")
print("note how the alpha = 0 level explodes under contamination while the")
print("robust tests stay near the nominal 5%")
