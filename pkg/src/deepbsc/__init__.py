"""Traffic-aware base-station sleep control: forecasting, simulation and DDPG control."""

__version__ = "0.1.0"
