from hypothesis import HealthCheck, settings

# Deterministic, CI-friendly hypothesis defaults: derandomize so repeated runs
# of the suite explore identical examples, and drop the per-example deadline
# (some properties build modest Fock tensors).
settings.register_profile(
    "deltapol",
    derandomize=True,
    max_examples=50,
    deadline=None,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile("deltapol")
