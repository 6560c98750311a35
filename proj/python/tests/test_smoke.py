import math
from pathlib import Path

import pytest

import holocyc

DATA = Path(__file__).resolve().parents[2] / "data"


def test_center_has_vanishing_quantities():
    s = holocyc.load_system(str(DATA / "center.json"))
    lv = holocyc.lyapunov_quantities(s)
    assert lv.first_nonzero is None
    assert all(abs(v) < 1e-12 for v in lv.V)


def test_weak_focus_of_order_one():
    s = holocyc.PiecewiseSystem([0, 1j + 0.1], [0, 1j + 0.1])
    assert holocyc.weak_focus_order(s) == 1


def test_three_cycles():
    s = holocyc.load_system(str(DATA / "paper52.json"))
    scan = holocyc.find_cycles(s, 0.1, 12.0, 400)
    assert len(scan.cycles) == 3
    assert scan.cycles[2].section_point == pytest.approx(5.190834, rel=1e-5)


def test_first_order_averaging():
    p = holocyc.PerturbationPair([(0, -1), (1, 0)], [(0, 0), (0, 0)])
    m1 = holocyc.averaged_M1(p)
    assert holocyc.positive_zeros(m1) == pytest.approx([2 / math.pi])
    with pytest.raises(ValueError):
        holocyc.averaged_M2(p)


def test_verify_and_reverify():
    s = holocyc.load_system(str(DATA / "paper52.json"))
    certs = holocyc.verify_boxes(s, (DATA / "paper52_boxes.json").read_text())
    assert [c.certified for c in certs] == [True, True, True]
    ok, mismatches = holocyc.reverify(holocyc.certificate_json(s, certs))
    assert ok and not mismatches
