"""Exact piecewise-linear circle maps, certified rotation numbers and scl."""

__version__ = "0.1.0"

from .arith import Rat, SlopeGroup, format_rat, parse_rat
from .errors import RotcalcError
from .groups import (
    GroupDescriptor,
    IntervalMap,
    approximate,
    bieri_strebel,
    interpolate_circle,
    parse_group,
    random_element,
    stein_decompose,
    validate_membership,
)
from .invariant import balance_residual, verify_exp_conjugacy
from .lang import eval_word, example39, format_word, load_map_file, parse_word, serialize_map
from .plmap import PLLift, commutator, compose, evaluate, invert, power
from .rotation import (
    defect_scan,
    defect_witness_pair,
    rot_cf,
    rot_compare,
    rot_decimal,
    rot_enclosure,
    rot_rational,
    scl,
)
