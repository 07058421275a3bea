"""Recover a hidden on-die ECC function from simulated retention errors.

A random (k=16) code plays the role of an undocumented chip.  We write
1- and 2-CHARGED patterns, let charged cells leak with probability 0.5,
count post-correction errors per bit, threshold the counts into a
miscorrection profile and solve for every code that explains it.
"""

from beer import (
    RetentionErrorModel,
    TransientNoiseModel,
    canonicalize,
    enumerate_test_patterns,
    exhaustive_profile,
    monte_carlo_profile,
    sample_random_code,
    solve,
    threshold_filter,
)

hidden = sample_random_code(16, seed=2024)
patterns = enumerate_test_patterns(hidden.k, [1, 2])
print(f"hidden code: n={hidden.n}, k={hidden.k}, {len(patterns)} test patterns")

observed = monte_carlo_profile(
    hidden, patterns, None, RetentionErrorModel(0.5, seed=7), 20_000, TransientNoiseModel(1e-4)
)
profile = threshold_filter(observed)
print("thresholded profile equals the exact one:", profile == exhaustive_profile(hidden, patterns))

out = solve(profile, hidden.k)
print(f"{len(out.solutions)} solution(s), search exhausted: {out.exhausted}")
print("recovered the hidden code:", out.solutions == [canonicalize(hidden)])
for row in out.solutions[0].P.to_lists():
    print("  ", "".join(map(str, row)))
