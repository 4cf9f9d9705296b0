"""
Published Protocol Tables (transcribed as data)

The expansions printed for the protocol are kept here as text so the
transcription can be reviewed line by line against the printed source.
The checker in verify.py is table-agnostic: it only parses these strings.

TERM GRAMMAR:
    <sign><coefficient>(<ket>,<ket>,...)
- sign: + or -
- coefficient: 1, a0, a1, b0, b1 or a product such as a0b1
- each ket is a bitstring, optionally prefixed by its own - sign

Unnormalized: normalization constants are omitted, as in print.
"""

import re
from typing import Dict, List, Tuple

from bcqt_protocol import PauliOp
from qstate import BellOutcome

# (sign, coefficient name, ket bits)
Term = Tuple[int, str, str]


# ============================================================================
# THREE-PAIR CHANNEL (a1 b1 c1 a2 c2 b2)
# ============================================================================

CHANNEL_EXPANSION = "+1(000000,000011,001100,001111,110000,110011,111100,111111)"


# ============================================================================
# AFTER THE USERS' CNOTS (a1 b1 c1 a2 c2 b2, then A B)
# ============================================================================

# coefficient -> (AB bits, kets on a1 b1 c1 a2 c2 b2)
CNOT_STAGE_EXPANSION: Dict[str, Tuple[str, str]] = {
    "a0b0": ("00", "000000,000011,001100,001111,110000,110011,111100,111111"),
    "a0b1": ("01", "000001,000010,001101,001110,110001,110010,111101,111110"),
    "a1b0": ("10", "100000,100011,101100,101111,010000,010011,011100,011111"),
    "a1b1": ("11", "100001,100010,101101,101110,010001,010010,011101,011110"),
}


# ============================================================================
# COLLAPSED STATES OF b1 c1 a2 c2 AFTER THE USERS' MEASUREMENTS
# ============================================================================

# Rows in printed order.
# Key: (a1 Z result, A X result, b2 Z result, B X result); X result 0 is |+>, 1 is |->
PUBLISHED_COLLAPSED_STATES: List[Tuple[Tuple[int, int, int, int], str]] = [
    ((0, 0, 0, 0), "+a0b0(0000,0110) +a0b1(0001,0111) +a1b0(1000,1110) +a1b1(1001,1111)"),
    ((0, 0, 0, 1), "+a0b0(0000,0110) -a0b1(0001,0111) +a1b0(1000,1110) -a1b1(1001,1111)"),
    ((0, 1, 0, 0), "+a0b0(0000,0110) +a0b1(0001,0111) -a1b0(1000,1110) -a1b1(1001,1111)"),
    ((0, 1, 0, 1), "+a0b0(0000,0110) -a0b1(0001,0111) -a1b0(1000,1110) +a1b1(1001,1111)"),
    ((0, 0, 1, 0), "+a0b0(0001,0111) +a0b1(0000,0110) +a1b0(1001,1111) +a1b1(1000,1110)"),
    ((0, 0, 1, 1), "+a0b0(0001,0111) -a0b1(0000,0110) +a1b0(1001,1111) -a1b1(1000,1110)"),
    ((0, 1, 1, 0), "+a0b0(0001,0111) +a0b1(0000,0110) -a1b0(1001,1111) -a1b1(1000,1110)"),
    ((0, 1, 1, 1), "+a0b0(0001,0111) -a0b1(0000,0110) -a1b0(1001,1111) +a1b1(1000,1110)"),
    ((1, 0, 0, 0), "+a0b0(1000,1110) +a0b1(1001,1111) +a1b0(0001,0111) +a1b1(0000,0110)"),
    ((1, 0, 0, 1), "+a0b0(1000,1110) -a0b1(1001,1111) +a1b0(0001,0111) -a1b1(0000,0110)"),
    ((1, 1, 0, 0), "+a0b0(1000,1110) +a0b1(1001,1111) -a1b0(0001,0111) -a1b1(0000,0110)"),
    ((1, 1, 0, 1), "+a0b0(1000,1110) -a0b1(1001,1111) -a1b0(0001,0111) +a1b1(0000,0110)"),
    ((1, 0, 1, 0), "+a0b0(1001,1111) +a0b1(1000,1110) +a1b0(0001,0111) +a1b1(0000,0110)"),
    ((1, 0, 1, 1), "+a0b0(1001,1111) -a0b1(1000,1110) +a1b0(0001,0111) -a1b1(0000,0110)"),
    ((1, 1, 1, 0), "+a0b0(1001,1111) +a0b1(1000,1110) -a1b0(0001,0111) -a1b1(0000,0110)"),
    ((1, 1, 1, 1), "+a0b0(1001,1111) -a0b1(1000,1110) -a1b0(0001,0111) +a1b1(0000,0110)"),
]


# ============================================================================
# CHARLIE'S STAGE ON BRANCH (0, +, 0, +)
# ============================================================================

CHARLIE_STAGE_BRANCH = (0, 0, 0, 0)

# After H on c1 and c2, register b1 c1 a2 c2
HADAMARD_STAGE_EXPANSION = (
    "+a0b0(0000,0001,0100,0101,0010,0011,-0110,-0111) "
    "+a0b1(0000,-0001,0100,-0101,0010,-0011,-0110,0111) "
    "+a1b0(1000,1001,1100,1101,1010,1011,-1110,-1111) "
    "+a1b1(1000,-1001,1100,-1101,1010,-1011,-1110,1111)"
)

# Bell outcome on (c1, c2) -> (b1 factor, a2 factor)
BELL_REGROUPING: Dict[BellOutcome, Tuple[str, str]] = {
    BellOutcome.PHI_PLUS: ("+a0(0) +a1(1)", "+b0(0) +b1(1)"),
    BellOutcome.PHI_MINUS: ("+a0(0) +a1(1)", "+b0(1) +b1(0)"),
    BellOutcome.PSI_PLUS: ("+a0(0) +a1(1)", "+b0(0) -b1(1)"),
    BellOutcome.PSI_MINUS: ("+a0(0) +a1(1)", "+b0(1) -b1(0)"),
}


# ============================================================================
# PUBLISHED CORRECTIONS ON BRANCH (0, +, 0, +)
# ============================================================================

# "Bob's operation" acts on b1, "Alice's operation" acts on a2
PUBLISHED_CORRECTIONS: Dict[str, Dict[BellOutcome, PauliOp]] = {
    "b1": {
        BellOutcome.PHI_PLUS: PauliOp.I,
        BellOutcome.PHI_MINUS: PauliOp.X,
        BellOutcome.PSI_PLUS: PauliOp.Z,
        BellOutcome.PSI_MINUS: PauliOp.IY,
    },
    "a2": {
        BellOutcome.PHI_PLUS: PauliOp.I,
        BellOutcome.PHI_MINUS: PauliOp.I,
        BellOutcome.PSI_PLUS: PauliOp.I,
        BellOutcome.PSI_MINUS: PauliOp.I,
    },
}


# ============================================================================
# PARSER
# ============================================================================

_GROUP_PATTERN = re.compile(r"([+-])(\w+)\(([^)]*)\)")


def parse_terms(text: str) -> List[Term]:
    """
    Parse a transcribed expansion into (sign, coefficient, ket) terms.

    Args:
        text: Expansion in the term grammar of this module

    Returns:
        One (sign, coefficient, ket) triple per ket, in printed order
    """
    terms: List[Term] = []
    for group_sign, coefficient, kets in _GROUP_PATTERN.findall(text):
        sign = -1 if group_sign == "-" else 1
        for ket in kets.split(","):
            ket = ket.strip()
            ket_sign = -1 if ket.startswith("-") else 1
            terms.append((sign * ket_sign, coefficient, ket.lstrip("+-")))
    if not terms:
        raise ValueError(f"No terms found in '{text}'")
    return terms


def cnot_stage_terms() -> List[Term]:
    return [
        (1, coefficient, ket + ab)
        for coefficient, (ab, kets) in CNOT_STAGE_EXPANSION.items()
        for ket in kets.split(",")
    ]
