"""Shared plumbing for the experiment scripts."""
import argparse
import csv
import warnings
from dataclasses import asdict, fields, replace
from pathlib import Path

from emtrloc import solver

ROOT = Path(__file__).resolve().parents[1]
NETWORKS = ROOT / "networks"


def parse_config(default, description):
    """Override any dataclass field from the command line (``--field value``)."""
    ap = argparse.ArgumentParser(description=description)
    for f in fields(default):
        ap.add_argument(f"--{f.name.replace('_', '-')}", type=type(getattr(default, f.name)),
                        default=getattr(default, f.name))
    cfg = replace(default, **vars(ap.parse_args()))
    print("config:", asdict(cfg))
    return cfg


def simulate(net, fault, dt, window_s):
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", solver.TransientWarning)
        return solver.simulate_fault_transient(net, fault, dt, window_s)


def write_curves(path, labelled):
    """One row per (label, position) from ``[(label, LocationResult), ...]``."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["label", "segment", "distance_m", "energy", "normalized"])
        for label, res in labelled:
            for seg, d, e, n in res.energy_curve.rows():
                w.writerow([label, seg, repr(d), repr(e), repr(n)])
    for label, res in labelled:
        print(f"{label}: located {res.located} contrast_ratio={res.contrast_ratio:.4g}")
    print(f"wrote {path}")
