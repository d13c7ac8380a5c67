"""Evolution detection: rank surviving sensors by distribution divergence.

Each surviving node's flow histogram (20 equal-width bins over its pooled
two-period range, Laplace-smoothed) is scored with KL(current || previous).
New nodes are unconditional retraining candidates; the top 10% of survivors
by KL join them.
"""

from flowrl import DriftSpec, GeneratorConfig, detect, generate_synthetic

config = GeneratorConfig(
    periods=2,
    initial_nodes=20,
    growth_per_period=3,
    steps_per_period=1000,
    noise_sigma=4.0,
    phase_jitter_steps=30.0,
    drift=(DriftSpec("s0004", 2, 35.0), DriftSpec("s0011", 2, -20.0)),
)
prev, curr = generate_synthetic(config, seed=8)
report = detect(prev, curr, fraction=0.10)

print(f"period {report.period}: {len(report.scores)} surviving nodes scored\n")
print("node      KL (nats)")
ranked = sorted(report.scores.items(), key=lambda kv: (-kv[1], kv[0]))
for node, kl in ranked[:8]:
    marker = " <- planted" if node in ("s0004", "s0011") else ""
    print(f"{node}   {kl:8.4f}{marker}")
print("...")

print("\nnew nodes (always candidates):", list(report.new_nodes))
print("top-KL survivors:             ", list(report.top_kl_nodes))
print("full candidate set:           ", list(report.candidates))
print("\nas JSON:", report.to_json_dict()["candidates"])
