"""Rotate a squeezed-cat qubit about Z with small momentum kicks, with and without correction.

Run: python demos/logical_rotations.py
"""

import math

from scqec.gates import GateSchedule, zrot_protocol
from scqec.operators import CodeParams

code = CodeParams(2.0, 1.0)
schedule = GateSchedule(total_angle=6 * math.pi, n_steps=48)
with_qec = zrot_protocol(code, schedule, qec=True).rows
without = zrot_protocol(code, schedule, qec=False).rows

print("step  angle/pi   ideal <X>   <X> with QEC   <X> without   gauge n=1 (QEC / none)")
for a, b in zip(with_qec[::4], without[::4]):
    step, angle, x_q, g_q, _ = a
    print(f"{step:4d}  {angle / math.pi:8.3f}  {math.cos(angle):10.4f}  {x_q:13.4f}  {b[2]:12.4f}"
          f"   {g_q:.2e} / {b[3]:.2e}")

print("\nEach kick also excites the gauge mode.  Without correction that excitation piles up")
print("and the oscillation fades; interleaved cycles clear it after every step.")
