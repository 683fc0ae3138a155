import contextlib

import pytest

from behavxva.chain import ChainSpec
from behavxva.credit import CreditCurve, RateSpec
from behavxva.engine import CCPHedge, Scenario
from behavxva.profiles import ExposureProfile

PRESET = RateSpec(riskless_rate=0.02, bank_spread=0.01)

_CRITERIA: list[tuple[str, bool, str]] = []


def ccp_scenario(client_bps=250, shape="flat", maturity=30.0, rates=PRESET, scale=1.0,
                 adjustments=("mva",), **profiles):
    profs = {"im_posted": ExposureProfile(shape, scale, maturity)}
    profs.update(profiles)
    return Scenario(CreditCurve.from_bps(client_bps), CCPHedge(), rates, maturity, profs,
                    adjustments=adjustments)


def chain_scenario(client_bps=50, hedge_bps=250, multiplier=1.0, shape="flat", maturity=30.0,
                   n=None, epsilon=1e-6, scale=1.0, rates=PRESET, adjustments=("cva",), **profiles):
    spec = ChainSpec.from_curve(CreditCurve.from_bps(hedge_bps), multiplier, n=n,
                                epsilon=None if n else epsilon)
    profs = {"exposure": ExposureProfile(shape, scale, maturity)}
    profs.update(profiles)
    return Scenario(CreditCurve.from_bps(client_bps), spec, rates, maturity, profs,
                    adjustments=adjustments)


@pytest.fixture
def criterion():
    """Record an acceptance criterion outcome for the end-of-run summary."""
    @contextlib.contextmanager
    def _record(name: str, detail: str = ""):
        try:
            yield
        except BaseException as e:
            _CRITERIA.append((name, False, f"{detail} {type(e).__name__}: {e}".strip()))
            raise
        _CRITERIA.append((name, True, detail))
    return _record


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for name, ok, detail in _CRITERIA:
        line = f"{'PASS' if ok else 'FAIL'}  {name}"
        if detail:
            line += f"  [{detail.splitlines()[0][:160]}]"
        terminalreporter.write_line(line)
