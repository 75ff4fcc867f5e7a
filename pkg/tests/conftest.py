from __future__ import annotations

from fractions import Fraction

from hypothesis import HealthCheck, settings, strategies as st

settings.register_profile(
    "default",
    deadline=None,
    max_examples=60,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile("default")


small_fraction = st.builds(
    Fraction,
    st.integers(min_value=-40, max_value=40),
    st.integers(min_value=1, max_value=12),
)


@st.composite
def random_channel_nums(draw, max_pairs: int = 4):
    """Integer classes of a symmetric channel plus the common denominator."""
    k = draw(st.integers(min_value=1, max_value=max_pairs))
    pairs = [
        (draw(st.integers(min_value=0, max_value=50)), draw(st.integers(min_value=0, max_value=50)))
        for _ in range(k)
    ]
    erasure = draw(st.integers(min_value=0, max_value=20))
    nums = []
    for a, b in pairs:
        nums.extend([(a, b), (b, a)])
    nums.append((erasure, erasure))
    den = sum(a for a, _ in nums)
    if den == 0:
        nums, den = [(1, 0), (0, 1)], 1
    return nums, den
