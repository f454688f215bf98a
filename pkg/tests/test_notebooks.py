import os
import subprocess
import sys
from pathlib import Path

import pytest

pytest.importorskip("matplotlib")

SCRIPTS = sorted((Path(__file__).parent.parent / "notebooks").glob("[0-9]*.py"))


@pytest.mark.parametrize("script", SCRIPTS, ids=lambda p: p.stem)
def test_demo_script_runs(script, tmp_path):
    env = {**os.environ, "POTENTIOSTAT_DEMO_OUT": str(tmp_path), "MPLBACKEND": "Agg"}
    res = subprocess.run([sys.executable, script.name], cwd=script.parent, env=env,
                         capture_output=True, text=True, timeout=300)
    assert res.returncode == 0, res.stderr
    assert any(tmp_path.glob("*.png"))
