"""
Running the verification suite
==============================

Every check runs on fixtures whose flags certify its hypotheses, and on
counter-fixtures where its conclusion is expected to fail.
"""

from collections import Counter

from metalgeom.fixtures import build_fixture, default_recipes
from metalgeom.verifier import run_fixtures

recipes = [r for r in default_recipes("rational") if (r.p, r.q) == (1, 6)]
fixtures = [build_fixture(r) for r in recipes]
report = run_fixtures(fixtures, ["GD8", "TOTALSYM_EQUIV", "THM_LOCALLY_METALLIC", "MLIKE_THEOREM"], seed=0)
print("summary:", report.summary)
for check, counts in sorted(Counter((r.check, r.outcome) for r in report.results).items()):
    print(f"  {check[0]:<22} {check[1]:<13} {counts}")

control = next(r for r in report.results if r.expected_fail)
print("a counter-fixture cell:", control.to_json())
