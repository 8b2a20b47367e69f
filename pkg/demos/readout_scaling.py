"""Compare logical-Z readout circuits and fit how their error falls with alpha'.

Run: python demos/readout_scaling.py
"""

from scqec.operators import CodeParams
from scqec.readout import PROTOCOLS, ReadoutConfig, perr, scaling_fit

grid = [3.0, 4.0, 5.0, 6.0, 8.0, 10.0, 12.0]
table = {p: [perr(ReadoutConfig(CodeParams.from_alpha_prime(ap, 1.0), p)).p_err for ap in grid]
         for p in PROTOCOLS}

print("alpha'   " + "".join(f"{p:>11}" for p in PROTOCOLS))
for i, ap in enumerate(grid):
    print(f"{ap:6.1f}   " + "".join(f"{table[p][i]:11.2e}" for p in PROTOCOLS))

print("\nlog-log slopes:")
for p in ("naive", "sharpen", "trim", "BsB", "sBs"):
    print(f"  {p:8s} {scaling_fit(grid, table[p]):6.2f}")
print("\nThe trim circuit applies the envelope correction before the x coupling, so its")
print("error drops like alpha'^-6 while the others stay near alpha'^-2.  Homodyne and")
print("the Helstrom bound sit far below every circuit at these sizes.")
