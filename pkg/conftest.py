from hypothesis import strategies as st
from hypothesis.strategies import DrawFn, composite

from lts_core import Lts


def pytest_configure(config):
    config.addinivalue_line("markers", "slow: exhaustive suites over enumerated universes")


@composite
def random_lts(draw: DrawFn, max_states: int = 8, max_actions: int = 3) -> Lts:
    n = draw(st.integers(min_value=1, max_value=max_states))
    k = draw(st.integers(min_value=1, max_value=max_actions))
    transitions = draw(
        st.sets(
            st.tuples(
                st.integers(min_value=0, max_value=n - 1),
                st.integers(min_value=0, max_value=k - 1),
                st.integers(min_value=0, max_value=n - 1),
            ),
            max_size=3 * n,
        )
    )
    return Lts([f"s{i}" for i in range(n)], "abcd"[:k], transitions)
