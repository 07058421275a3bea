"""Different ECC functions leave different post-correction error spectra.

Three codes with identical (n, k) see the same uniform raw errors, yet
the per-bit counts after correction differ.  At a raw bit error rate of
1e-4 the difference only becomes statistically visible after billions of
words, so this demo uses a higher rate.
"""

from beer import compare_distributions, run_fig1_distribution, sample_random_code

codes = [sample_random_code(32, s) for s in (1, 2, 3)]
counts = run_fig1_distribution(codes, 1e-2, 1_000_000, seed=0)
for i, row in enumerate(counts):
    print(f"code {i}: {row.sum():6d} errors | " + " ".join(f"{c:4d}" for c in row[:12]) + " ...")
for i, j in ((0, 1), (0, 2), (1, 2)):
    print(f"codes {i} vs {j}: chi-square p = {compare_distributions(counts[i], counts[j]):.2e}")
again = run_fig1_distribution([codes[0]], 1e-2, 1_000_000, seed=1)[0]
print(f"code 0, two seeds: p = {compare_distributions(counts[0], again):.3f}")
