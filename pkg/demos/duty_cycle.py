"""How long a single kick keeps the variance below the vacuum level.

After one kick the variance ratio oscillates at 2 omega. The duty cycle is
the fraction of each period spent below 1. Weak kicks squeeze about half
the time; strong kicks squeeze only briefly.
"""

from squeezed_echo import OscillatorParams, squeezing_duty_cycle

for r in (0.01, 0.1, 0.5, 1.0, 3.0, 10.0, 100.0):
    print(f"mu/omega = {r:7.2f}: duty cycle {squeezing_duty_cycle(OscillatorParams(1.0), r):.4f}")
