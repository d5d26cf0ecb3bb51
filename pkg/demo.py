import numpy as np

from pynomavlc import ExperimentConfig, run_realization
from pynomavlc.allocation import evaluate
from pynomavlc.association import bind_max_gain
from pynomavlc.geometry import Room, build_scenario, channel_matrix
from pynomavlc.pairing import d_nlupa
from pynomavlc.phy import LinkConfig, NoiseConfig
from pynomavlc.search import simulated_annealing
from pynomavlc.types import SaParams, Scheme
from pynomavlc.utils import realization_streams


# one realization through the whole pipeline, driven by a config
cfg = ExperimentConfig().override(users=10, scheme="not-imposed", sa_outer_iterations=100)
result = run_realization(cfg, seed=42)
print(f"pairs per LED: {result.pairs.counts}")
print(f"max-min rate: {result.min_rate / 1e6:.3f} Mbit/s")

# the same steps by hand
placement, _, search_rng = realization_streams(7)
scenario = build_scenario(Room(), 4, 10, placement)
H = channel_matrix(scenario)
binding = bind_max_gain(H)
pairs = d_nlupa(binding, H, Scheme.NOT_IMPOSED)

link = LinkConfig(noise=NoiseConfig(subcarrier_count=16))
search = simulated_annealing(pairs, H, link, SaParams(outer_iterations=100), rng=search_rng)
print(f"best allocation:\n{search.allocation.grid}")
print(f"rates (bit/s): {np.round(search.report.rates)}")

# every allocation can be scored directly
report = evaluate(search.allocation, pairs, H, link)
assert report == search.report
