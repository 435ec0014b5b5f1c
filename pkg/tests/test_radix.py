import pytest
from hypothesis import given, strategies as st

from lodisq.radix import MAX_N, complement, complement_digit_sum, digit_sum, expand, m_b


@pytest.mark.parametrize("N,b,d,digits", [(37, 2, 2, (1, 1, 2)), (0, 3, 1, ()), (5, 2, 1, (1, 0, 1))])
def test_expand_examples(N, b, d, digits):
    e = expand(N, b, d)
    assert e.digits == digits
    assert e.reassemble() == N


@pytest.mark.parametrize("digits,total", [((1, 0, 1), 2), ((1, 1, 2), 4), ((), 0)])
def test_digit_sum_examples(digits, total):
    N = {(1, 0, 1): (5, 2, 1), (1, 1, 2): (37, 2, 2), (): (0, 2, 1)}[digits]
    assert digit_sum(expand(*N)) == total


@pytest.mark.parametrize("N,expected", [(5, 2), (7, 2), (1, 1)])
def test_m_b_examples(N, expected):
    assert m_b(expand(N, 2)) == expected


@pytest.mark.parametrize("N,b,d,comp,power", [(5, 2, 1, 3, 8), (7, 2, 1, 1, 8), (37, 2, 2, 27, 64)])
def test_complement_examples(N, b, d, comp, power):
    assert complement(expand(N, b, d)) == comp
    assert N + comp == power


@pytest.mark.parametrize("b", [2, 3, 5])
@pytest.mark.parametrize("d", [1, 2])
def test_round_trip_below_a_million(b, d):
    step = 7 if b == 5 else 1
    for N in range(0, 10**6, step * 97):
        assert expand(N, b, d).reassemble() == N
    for N in range(2000):
        assert expand(N, b, d).reassemble() == N


@pytest.mark.parametrize("b", [2, 3])
@pytest.mark.parametrize("d", [1, 2])
def test_complement_identity(b, d):
    q = b**d
    for N in range(1, 5000):
        e = expand(N, b, d)
        assert N + complement(e) == q ** (e.n + 1)


@pytest.mark.parametrize("b", [2, 3])
def test_m_b_symmetry_under_digit_flip(b):
    # The second argument of the minimum is 2 plus the digit sum of the
    # flipped expansion, which is the expansion of N' - 1.
    for N in range(1, 2**12):
        e = expand(N, b)
        flipped = complement(e) - 1
        assert complement_digit_sum(e) == digit_sum(expand(flipped, b))
        assert m_b(e) == min(digit_sum(e), 2 + digit_sum(expand(flipped, b)))


@given(st.integers(min_value=0, max_value=MAX_N), st.integers(2, 9), st.integers(1, 3))
def test_round_trip_property(N, b, d):
    e = expand(N, b, d)
    assert e.reassemble() == N
    assert all(0 <= x < b**d for x in e.digits)
    assert not e.digits or e.digits[-1] != 0


def test_rejects_bad_input():
    with pytest.raises(ValueError):
        expand(-1, 2)
    with pytest.raises(ValueError):
        expand(MAX_N + 1, 2)
    with pytest.raises(ValueError):
        expand(3, 1)
    with pytest.raises(ValueError):
        expand(3, 2, 0)
    with pytest.raises(ValueError):
        m_b(expand(5, 2, 2))
    with pytest.raises(ValueError):
        m_b(expand(0, 2))
