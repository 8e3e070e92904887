"""Achievable secrecy rate regions for the two-user fading MISO broadcast
channel with confidential messages when the transmitter knows only the
channel statistics."""

from .channel_model import (ORDERS, ChannelStats, EncodingOrder, InflationFactor, Scenario,
                            TransmitCovariances, rician_k_factor, validate_stats)
from .classifier import Classification, Verdict, classify
from .optimizer import (RegionResult, build_region, dominates, grq_max, select_covariances,
                        solve_inflation_factor, upper_right_hull)
from .region_math import (RatePair, assemble_block_matrix, expect_log_quadratic, full_csit_rates,
                          low_snr_region, mmse_inflation_factor, rate_penalty, secrecy_rates, wiretap_rate)
from .sampling import FadingBatch, draw_batches, mc_expect, sample_channel

__version__ = "0.1.0"
