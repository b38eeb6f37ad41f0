"""Signal-length sweep on the T network: leading fractions of 0.6 to 5 ms."""
from dataclasses import dataclass

from emtrloc import emtr, netmodel as nm, signals as sg

from _common import NETWORKS, ROOT, parse_config, simulate, write_curves


@dataclass(frozen=True)
class Config:
    network: str = str(NETWORKS / "t_network.net")
    fault: str = "T1@4000"
    fault_ohms: float = 1.0
    lengths_ms: str = "0.6,0.8,1,2,5"
    spacing_m: float = 500.0
    dt: float = 1e-7
    window_s: float = 5e-3
    out: str = str(ROOT / "results" / "signal_length.csv")


def main(cfg: Config):
    net = nm.load_network(cfg.network)
    grid = nm.make_guess_grid(net, cfg.spacing_m)
    u, desc = emtr.excitation("impulse", int(round(cfg.window_s / cfg.dt)), cfg.dt)
    db = emtr.precompute_db(net, grid, u, descriptor=desc)
    u0 = simulate(net, nm.FaultSpec(*nm.Position.parse(cfg.fault), cfg.fault_ohms), cfg.dt, cfg.window_s)
    curves = []
    for ms in cfg.lengths_ms.split(","):
        frac = sg.extract_fraction(u0, u0.t0, float(ms) * 1e-3)
        curves.append((f"{ms}ms", emtr.locate_convolution(db, frac)))
    print(f"25-transit length estimate: {emtr.min_signal_length_estimate(net) * 1e3:.3g} ms")
    write_curves(cfg.out, curves)


if __name__ == "__main__":
    main(parse_config(Config(), __doc__))
