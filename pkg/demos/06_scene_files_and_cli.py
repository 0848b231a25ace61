"""
Scene files and the command line
================================

Fixtures serialize to JSON scenes. The ``metalgeom`` command checks a scene,
evaluates tensors at a point, and emits generated scenes.
"""

import json
import tempfile
from pathlib import Path

from metalgeom.cli import main
from metalgeom.fixtures import build_fixture, recipe
from metalgeom.scene import dumps_scene, load_scene

out = Path(tempfile.mkdtemp())
fx = build_fixture(recipe("statistical", 1, 2, 1, 6, holonomic=True))
path = out / "statistical.json"
path.write_text(dumps_scene(fx, ["TOTALSYM_EQUIV", "CONJ_INVOLUTION"]), encoding="utf-8")
print("round-trip is byte-identical:", dumps_scene(load_scene(path)) == path.read_text(encoding="utf-8"))

code = main(["check", str(path), "--report", str(out / "report.json")])
print("check exit code:", code, json.loads((out / "report.json").read_text())["summary"])

main(["eval", str(path), "--tensor", "cov_g", "--point", "1,2"])
main(["fixtures", "--seed", "7", "--dim", "3", "--count", "1", "--out", str(out / "scenes")])
print(sorted(p.name for p in (out / "scenes").iterdir()))
