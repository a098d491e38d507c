import json

import pytest

from lsublab import props


SMALL = {
    "confluence": dict(count=30, size=8),
    "full-composition": dict(count=50),
    "simulation": dict(count=4, size=6),
    "psn": dict(count=30, size=8),
    "measures": dict(count=50, swaps=30),
    "diamond": dict(count=20, projections=40),
    "critical-pairs": dict(count=10, size=6),
    "typing": dict(count=30, derivations=10, ll_depth=2),
}


@pytest.mark.parametrize("name", sorted(props.CAMPAIGNS))
def test_small_campaigns_pass_and_repeat(name):
    fn = props.CAMPAIGNS[name]
    a = fn(seed=1, **SMALL[name])
    b = fn(seed=1, **SMALL[name])
    assert a.ok, a.failures[:3]
    assert a.checked > 0
    assert a.to_json() == b.to_json()


def test_report_formats():
    rep = props.PropReport("demo", checked=3)
    assert rep.summary() == "demo: pass checked=3 skipped=0 failures=0"
    rep.fail("boom")
    assert not rep.ok
    assert json.loads(rep.to_json())["failures"] == ["boom"]
    assert rep.summary().startswith("demo: FAIL")


def test_psn_reports_repeat():
    a = props.psn_random(seed=1, count=5)
    assert a.to_json() == props.psn_random(seed=1, count=5).to_json()
    assert a.checked + a.skipped == 5


def test_sn_profile_of_omega():
    from lsublab.lsub import Verdict
    from lsublab.syntax import parse

    v = props.sn_profile(parse("(\\x. x x) (\\x. x x)"))
    assert set(v) == {"beta", "lsub", "lpar", "ldef"}
    assert all(x is Verdict.NotSN for x in v.values())
