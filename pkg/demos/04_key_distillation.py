"""From a noisy sifted key to a short identical secret.

Simulates the link, then walks the classical stage by hand: parity
reconciliation (watching the disclosure budget), the abort threshold, and
Toeplitz compression down to the private remainder.
"""

import numpy as np

from b92sim.config import default_config
from b92sim.postproc import binary_entropy, distill, reconcile
from b92sim.protocol import run_link

config = default_config("enhanced")
summary, key, _ = run_link(config, 100_000_000, seed=9)

print(f"sifted key: {key.n_bits} bits, {key.n_errors} errors "
      f"(QBER {summary.qber:.4f})")

# --- reconciliation, step by step ---------------------------------------
rng = np.random.default_rng(10)
corrected, report = reconcile(key.alice_bits, key.bob_bits, summary.qber, rng)
print(f"cascade: {report.passes} passes, first blocks of "
      f"{report.initial_block_size}")
print(f"  corrected {report.corrected_errors} errors, "
      f"residual {report.residual_errors}")

shannon = key.n_bits * binary_entropy(max(summary.qber, 1e-9))
print(f"  disclosed {report.parity_bits_leaked} parity bits "
      f"({report.parity_bits_leaked / shannon:.2f}x the entropy floor)")

# --- the whole pipeline in one call --------------------------------------
result = distill(key.alice_bits, key.bob_bits, config.security, seed=11)
print()
print(f"distilled {result.final_length} bits from {key.n_bits}")
print(f"  keys identical: {result.identical}")
print(f"  alice: {result.alice_hex()[:48]}...")
print(f"  bob:   {result.bob_hex()[:48]}...")

# --- what happens past the threshold -------------------------------------
rng = np.random.default_rng(12)
alice = rng.integers(0, 2, 5_000, dtype=np.uint8)
bob = alice ^ (rng.random(5_000) < 0.12)
hot = distill(alice, bob.astype(np.uint8), config.security, seed=13)
print()
print(f"a 12% error key distills to {hot.final_length} bits: "
      "above the abort threshold nothing survives")
