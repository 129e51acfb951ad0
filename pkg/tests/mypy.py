from pathlib import Path
from subprocess import PIPE, STDOUT, run

topdir = Path(__file__).resolve().parent.parent

def test_mypy():
    result = run(["./dev/mypy"], cwd = topdir, stdout = PIPE, stderr = STDOUT, universal_newlines = True)
    assert result.returncode == 0, f"mypy found type errors in lib/ebitsim:\n{result.stdout}"
