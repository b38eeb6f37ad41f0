"""Fixed-length fractions with different start times (no time synchronization)."""
from dataclasses import dataclass

from emtrloc import emtr, netmodel as nm, signals as sg

from _common import NETWORKS, ROOT, parse_config, simulate, write_curves


@dataclass(frozen=True)
class Config:
    network: str = str(NETWORKS / "t_network.net")
    fault: str = "T1@4000"
    fault_ohms: float = 1.0
    starts_ms: str = "0,0.5,1,1.5,2.5,3"
    length_ms: float = 2.0
    spacing_m: float = 500.0
    dt: float = 1e-7
    window_s: float = 5e-3
    out: str = str(ROOT / "results" / "fractions.csv")


def main(cfg: Config):
    net = nm.load_network(cfg.network)
    grid = nm.make_guess_grid(net, cfg.spacing_m)
    u, desc = emtr.excitation("impulse", int(round(cfg.window_s / cfg.dt)), cfg.dt)
    db = emtr.precompute_db(net, grid, u, descriptor=desc)
    u0 = simulate(net, nm.FaultSpec(*nm.Position.parse(cfg.fault), cfg.fault_ohms), cfg.dt, cfg.window_s)
    curves = []
    for ms in cfg.starts_ms.split(","):
        frac = sg.extract_fraction(u0, float(ms) * 1e-3, cfg.length_ms * 1e-3)
        curves.append((f"start {ms}ms", emtr.locate_convolution(db, frac)))
    write_curves(cfg.out, curves)


if __name__ == "__main__":
    main(parse_config(Config(), __doc__))
