"""Cross-check the closed forms against the numerical oracle.

Random oscillators and kick pairs are integrated with RK4 and compared to
the analytic trajectory and variance. The same check is available as
``squeezed-echo oracle-check``.
"""

from squeezed_echo.oracle import random_cross_check

for name, deviation in random_cross_check(n_draws=20, seed=3).items():
    print(f"{name:12s} max deviation {deviation:.2e}")
