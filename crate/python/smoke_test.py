"""Smoke test for the stabgame_py extension module."""

import stabgame_py as sg


def main():
    p = sg.PauliOperator("XZZ")
    q = sg.PauliOperator("ZXZ")
    assert p.commutes(q)
    assert str(p * q) == "+YYI"

    ghz = sg.StabilizerGenerators.ghz(3)
    assert (ghz.n, ghz.r) == (3, 3)
    game = sg.Game(ghz)
    assert game.query_count == 8
    assert game.classical_value() == "7/8"
    assert abs(game.quantum_win_probability() - 1.0) < 1e-12
    assert abs(game.quantum_win_probability([(0, 0), (1, 0)] + [(0, 0)] * 6) - 0.5) < 1e-12

    coset = sg.Game(sg.StabilizerGenerators.ghz(4), "coset:x1=1")
    assert coset.classical_value() == "3/4"
    assert dict(coset.bounds())["NL1"] == "3/4"

    cycle = sg.Game(sg.StabilizerGenerators.cycle(3))
    assert cycle.refutation() == [1, 2, 4, 7]
    assert sg.Game(sg.StabilizerGenerators.graph(2, [(0, 1)])).refutation() is None

    assert sg.cluster_value(6) == ("23/32", "23/32")
    assert sg.cluster_table_csv(4).splitlines()[1:] == ["3,7/8,7/8,0.7500", "4,12/16,14/16,0.7500"]
    assert sg.toric_bound(4)[0] == "49/64"

    try:
        sg.StabilizerGenerators("XX\nZI")
    except ValueError:
        pass
    else:
        raise AssertionError("non-commuting generators accepted")
    print("smoke test ok")


if __name__ == "__main__":
    main()
