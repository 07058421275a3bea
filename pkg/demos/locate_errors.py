"""Find the error-prone cells of one codeword through the ECC decoder.

Only post-correction data is visible.  BEEP crafts datawords whose
miscorrections reveal which cells failed, one target bit at a time.
"""

from beer import BeepChip, run_beep, sample_random_code

code = sample_random_code(120, seed=1)
hidden = frozenset({3, 58, 101, 124})
for probability, passes in ((1.0, 1), (0.75, 1), (0.75, 2)):
    report = run_beep(code, BeepChip(hidden, probability, seed=5), passes=passes)
    print(f"P[error]={probability} passes={passes}: suspected {sorted(report.suspected)}"
          f" exact={report.suspected == hidden} ({len(report.evidence)} miscorrections used)")
