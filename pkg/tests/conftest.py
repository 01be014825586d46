import pytest

from luset.lang import elaborate
from luset.parser import parse_program

CTR_SRC = """
-- a simple counter node with a reset
node Ctr(init, incr: int, rst: bool) returns (n: int);
var fst: bool, pre_n: int;
let
  n = if (fst or rst) then init else pre_n + incr;
  fst = true fby false;
  pre_n = 0 fby n;
tel
"""

CTR_SPDMTR_SRC = CTR_SRC + """
node SpdMtr(acc: int) returns (spd, pos: int);
let
  spd = Ctr(0, acc, false);
  pos = Ctr(3, spd, false);
tel
"""

CNT_DN_SRC = """
node cnt_dn(res: bool; n: int) returns (cpt: int);
let
  cpt = if res then n else (n fby (cpt - 1));
tel
"""

RE_TRIG_SRC = CNT_DN_SRC + """
node re_trig(i: bool; n: int) returns (o: bool);
var edge, ck: bool, v: int;
let
  edge = i and (false fby (not i));
  ck = edge or (false fby o);
  v = merge ck (cnt_dn((edge, n) when ck)) (0 when not ck);
  o = v > 0;
tel
"""

LEAK_ITE_SRC = """
-- b secret, c public
node Leak(b: bool) returns (c: int);
let
  c = if b then 1 else 0;
tel
"""

LEAK_MERGE_SRC = """
-- x secret, c0 public
node Leak2(x: bool) returns (c0: int);
let
  c0 = merge x 1 0;
tel
"""

# the example run of the counter (7 ticks)
CTR_TABLE = {
    "init": [1, 2, 1, 1, 0, 2, 4],
    "incr": [1, 2, 2, 3, 3, 1, 2],
    "rst": [False, False, False, False, True, False, True],
    "fst": [True, False, False, False, False, False, False],
    "n": [1, 3, 5, 8, 0, 1, 4],
    "pre_n": [0, 1, 3, 5, 8, 0, 1],
}


@pytest.fixture
def ctr_prog():
    return elaborate(parse_program(CTR_SRC))


@pytest.fixture
def ctr_spdmtr_prog():
    return elaborate(parse_program(CTR_SPDMTR_SRC))


@pytest.fixture
def cnt_dn_prog():
    return elaborate(parse_program(CNT_DN_SRC))


@pytest.fixture
def re_trig_prog():
    return elaborate(parse_program(RE_TRIG_SRC))
