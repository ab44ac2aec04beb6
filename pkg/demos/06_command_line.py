"""
The command-line pipeline
=========================

generate -> mine -> cluster -> report, driven by one config file.
"""

import tempfile
from pathlib import Path

from loanmine.cli import main

with tempfile.TemporaryDirectory() as tmp:
    cfg = Path(tmp) / "run.cfg"
    cfg.write_text(
        "data_dir = data\n"
        "output_dir = out\n"
        "synthetic.seed = 7\n"
        "synthetic.n_students = 500\n"
        "synthetic.planted_rules = QA+QC>QD:1.0\n"
    )
    c = str(cfg)
    main(["--config", c, "generate"])
    main(["--config", c, "mine"])
    main(["--config", c, "cluster", "--schema", "fsl"])
    main(["--config", c, "report", "--name", "top_faculties", "--year", "2016"])
    for path in sorted((Path(tmp) / "out").iterdir()):
        print(path.name)
    print((Path(tmp) / "out" / "apriori_all.txt").read_text()[:600])
