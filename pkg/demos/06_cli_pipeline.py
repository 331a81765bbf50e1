"""
The whole pipeline from the command line
========================================

The `protofair` command chains synth (or prepare), train, evaluate and
explain through files in one output directory. Here we drive it from Python
with the small config next to this script.
"""

import tempfile
from pathlib import Path

from protofair.cli import main

config = Path(__file__).parent / "configs" / "small.json"
out = Path(tempfile.mkdtemp())

# equivalent shell: protofair synth --config demos/configs/small.json --out-dir OUT
for command in ("synth", "train", "evaluate", "explain"):
    print(f"$ protofair {command}")
    code = main([command, "--config", str(config), "--out-dir", str(out)])
    assert code == 0, code

for path in sorted(out.rglob("*")):
    if path.is_file():
        print(path.relative_to(out))

# one explanation file per sampled item
md = sorted((out / "explain").glob("*.md"))[0]
print(md.read_text())
