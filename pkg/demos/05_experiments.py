"""The experiment suite at a glance: run everything, print the summary.

The default configuration reproduces the quantitative relationships at desk
scale: CGOS decay following the coefficient modulus, log-type stability of
the inverse map, the instability of the annulus family with spectra bounded
away from each other, and the Neumann-series tail bounds.  Outputs land in
out/ as deterministic CSV tables plus summary.json.
"""

import json

from calderonlab import experiments as E

summary = E.run_suite(out_dir="out")
print(json.dumps(summary, indent=1, default=E._json_default))
print("suite passed:", summary["passed"])
