"""Shared test configuration: a fast, reproducible hypothesis profile."""

from hypothesis import HealthCheck, settings

settings.register_profile(
    "fgl",
    deadline=None,
    max_examples=25,
    derandomize=True,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile("fgl")
