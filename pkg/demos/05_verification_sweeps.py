# Randomized verification sweeps, the library's built-in test battery.
# Equivalent CLI: geokit verify all --trials 50 --seed 0

import time

from geokit import verify

for theorem in verify.THEOREM_IDS:
    t0 = time.time()
    rep = verify.run(theorem, trials=50, seed=0, nmax=7)[0]
    status = "ok" if rep.ok else f"FAILED at seed {rep.first_failing_seed}"
    print(f"{theorem:20s} {rep.passed:3d}/{rep.trials:3d}  {time.time() - t0:5.2f}s  {status}")
