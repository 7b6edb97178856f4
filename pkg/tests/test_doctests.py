import doctest

import floerforge.fualgebra


def test_fualgebra_doctests():
    results = doctest.testmod(floerforge.fualgebra)
    assert results.failed == 0
    assert results.attempted > 0
