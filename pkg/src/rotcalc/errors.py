"""Exception hierarchy.

Every error carries a ``name`` that the CLI prints verbatim as
``ERROR:<name>:<message>``.
"""


class RotcalcError(Exception):
    name = "RotcalcError"

    def __init__(self, message=""):
        super().__init__(message)
        self.message = message

    def __str__(self):
        return self.message or self.name


def _make(name, doc, base=RotcalcError):
    return type(name, (base,), {"name": name, "__doc__": doc})


# arith
NonPositive = _make("NonPositive", "A slope-group query on a non-positive number.")
NotInRing = _make("NotInRing", "A rational outside the break ring.")
RationalFormatError = _make("RationalFormatError", "Malformed rational text.")

# plmap
InvalidMap = _make("InvalidMap", "Piece data does not describe a PL lift.")
NotMonotone = _make("NotMonotone", "Some slope is not positive.", InvalidMap)
Discontinuous = _make("Discontinuous", "Continuity or wrap condition violated.", InvalidMap)
EmptyInput = _make("EmptyInput", "No pieces supplied.", InvalidMap)
MismatchedCircumference = _make("MismatchedCircumference", "Maps live on circles of different length.")

# rotation
EffortExceeded = _make("EffortExceeded", "Iteration or piece-count cap reached.")
UnsupportedGroup = _make("UnsupportedGroup", "The scl formula is not available for this group.")
NotAMember = _make("NotAMember", "Map failed group membership validation.")
PartitionMismatch = _make("PartitionMismatch", "Measure intervals do not tile or refine the map's pieces.")
NotAConjugacy = _make("NotAConjugacy", "Candidate conjugacy fails its endpoint or monotonicity check.")
PreconditionViolation = _make("PreconditionViolation", "Operation precondition does not hold.")

# groups
CongruenceViolation = _make("CongruenceViolation", "Interval lengths differ modulo IP*A.")
ConstructionFailed = _make("ConstructionFailed", "A constructive step exhausted its search bound.")
WindowTooLarge = _make("WindowTooLarge", "Supplied arc leaves no room for a disjoint fixed arc.")
SamplesTooCoarse = _make("SamplesTooCoarse", "Consecutive sample images are too far apart.")
GroupFormatError = _make("GroupFormatError", "Malformed group descriptor text.")

# lang
UnboundName = _make("UnboundName", "Word refers to a name with no binding.")
ParseError = _make("ParseError", "Malformed map or environment file.")
IoError = _make("IoError", "File could not be read or written.")


class WordSyntaxError(RotcalcError):
    """Malformed word expression; ``position`` is a 1-based column."""

    name = "SyntaxError"

    def __init__(self, message, position):
        super().__init__(f"{message} at offset {position}")
        self.position = position
