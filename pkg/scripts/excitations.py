"""Direct convolution with lightning-impulse, 50 Hz AC and white-noise databases."""
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
    noise_seed: int = 7
    out: str = str(ROOT / "results" / "excitations.csv")


def main(cfg: Config):
    net = nm.load_network(cfg.network)
    u0 = simulate(net, nm.FaultSpec(*nm.Position.parse(cfg.fault)), cfg.dt, cfg.window_s)
    grid = nm.make_guess_grid(net, cfg.spacing_m)
    curves = []
    for kind, params in (("impulse", {}), ("ac", {}), ("noise", {"seed": cfg.noise_seed})):
        u, desc = emtr.excitation(kind, len(u0), cfg.dt, **params)
        db = emtr.precompute_db(net, grid, u, descriptor=desc)
        curves.append((kind, emtr.locate_convolution(db, u0)))
    write_curves(cfg.out, curves)


if __name__ == "__main__":
    main(parse_config(Config(), __doc__))
