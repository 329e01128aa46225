import functools
import pathlib
import sys

import pytest

ROOT = pathlib.Path(__file__).resolve().parent.parent
sys.path.insert(0, str(ROOT / "src"))
sys.path.insert(0, str(ROOT / "tests"))

from sepflow import events as ev  # noqa: E402
from sepflow.checker import explore, security_index  # noqa: E402
from sepflow.config import PortIdStrategy, load_config, parse_config  # noqa: E402
from sepflow.equivalence import TransmitterView  # noqa: E402
from sepflow.events import TRANSMITTER, partition  # noqa: E402
from sepflow.kernel import VARIANTS  # noqa: E402
from sepflow.model import build_model  # noqa: E402

CFG1_PATH = ROOT / "configs" / "cfg1.sk"
CFG3_PATH = ROOT / "configs" / "cfg3.sk"
P1, P2 = partition(1), partition(2)

SAMPLING_CFG = """\
partition 1 P1
partition 2 P2
samplingchannel S source=P1.ss dest=P2.sd
messages 1
"""


@functools.lru_cache(maxsize=None)
def cfg1():
    return load_config(CFG1_PATH)


@functools.lru_cache(maxsize=None)
def model(semantics="fixed", portids="static", view="source-only", path=str(CFG1_PATH)):
    return build_model(load_config(path), VARIANTS[semantics], PortIdStrategy(portids),
                       TransmitterView(view))


@functools.lru_cache(maxsize=None)
def reach(semantics="fixed", portids="static", view="source-only", path=str(CFG1_PATH)):
    return explore(model(semantics, portids, view, path))


@functools.lru_cache(maxsize=None)
def index(semantics="fixed", portids="static", view="source-only", path=str(CFG1_PATH)):
    return security_index(reach(semantics, portids, view, path))


def tiny_alphabet(portids):
    """A cut-down CFG1 alphabet small enough for the brute-force oracle."""
    base = [ev.schedule(P1), ev.schedule(P2), ev.schedule(TRANSMITTER),
            ev.send_queuing_message(1, "m0"), ev.receive_queuing_message(2),
            ev.transfer_queuing("C"), ev.clear_queuing_port(2)]
    if portids == "counter":
        base = [ev.create_queuing_port("qs"), ev.create_queuing_port("qd")] + base
    return tuple(base)


@functools.lru_cache(maxsize=None)
def tiny_model(semantics="fixed", portids="static", view="source-only", alphabet=None):
    cfg = parse_config(CFG1_PATH.read_text().replace("messages 2", "messages 1"))
    return build_model(cfg, VARIANTS[semantics], PortIdStrategy(portids), TransmitterView(view),
                       alphabet=alphabet or tiny_alphabet(portids))


@pytest.fixture(scope="session")
def cfg1_text():
    return CFG1_PATH.read_text()


# acceptance criteria register one line each; printed after the run
ACCEPTANCE: dict = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(ACCEPTANCE):
        terminalreporter.write_line(ACCEPTANCE[n])
