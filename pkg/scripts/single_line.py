"""Single 10 km line, fault at 8 km: classic, direct and convolution energy curves."""
from dataclasses import dataclass

from emtrloc import emtr, netmodel as nm

from _common import NETWORKS, ROOT, parse_config, simulate, write_curves


@dataclass(frozen=True)
class Config:
    network: str = str(NETWORKS / "single_line.net")
    fault: str = "L1@8000"
    spacing_m: float = 500.0
    dt: float = 1e-7
    window_s: float = 5e-3
    horizon_s: float = emtr.DEFAULT_HORIZON_S
    out: str = str(ROOT / "results" / "single_line.csv")


def main(cfg: Config):
    net = nm.load_network(cfg.network)
    pos = nm.Position.parse(cfg.fault)
    u0 = simulate(net, nm.FaultSpec(*pos), cfg.dt, cfg.window_s)
    grid = nm.make_guess_grid(net, cfg.spacing_m)
    fgrid = emtr.energy_grid(cfg.dt, len(u0), cfg.horizon_s)
    u, desc = emtr.excitation("impulse", len(u0), cfg.dt)
    db = emtr.precompute_db(net, grid, u, descriptor=desc)
    write_curves(cfg.out, [
        ("classic", emtr.locate_classic(net, u0, grid, fgrid)),
        ("direct", emtr.locate_direct(net, u0, grid, fgrid)),
        ("convolution", emtr.locate_convolution(db, u0)),
    ])


if __name__ == "__main__":
    main(parse_config(Config(), __doc__))
