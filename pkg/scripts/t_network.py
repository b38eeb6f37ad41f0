"""T network, 1 ohm faults at T1@4000 and T3@1000, lightning-impulse database."""
from dataclasses import dataclass

from emtrloc import emtr, netmodel as nm, store

from _common import NETWORKS, ROOT, parse_config, simulate, write_curves


@dataclass(frozen=True)
class Config:
    network: str = str(NETWORKS / "t_network.net")
    faults: str = "T1@4000,T3@1000"
    fault_ohms: float = 1.0
    spacing_m: float = 500.0
    dt: float = 1e-7
    window_s: float = 5e-3
    db: str = str(ROOT / "results" / "t_network_impulse.db")
    out: str = str(ROOT / "results" / "t_network.csv")


def main(cfg: Config):
    net = nm.load_network(cfg.network)
    grid = nm.make_guess_grid(net, cfg.spacing_m)
    u, desc = emtr.excitation("impulse", int(round(cfg.window_s / cfg.dt)), cfg.dt)
    db = emtr.precompute_db(net, grid, u, descriptor=desc)
    store.save_db(db, cfg.db)
    curves = []
    for key in cfg.faults.split(","):
        u0 = simulate(net, nm.FaultSpec(*nm.Position.parse(key), cfg.fault_ohms), cfg.dt, cfg.window_s)
        curves.append((key, emtr.locate_convolution(db, u0, net.fingerprint())))
    write_curves(cfg.out, curves)


if __name__ == "__main__":
    main(parse_config(Config(), __doc__))
