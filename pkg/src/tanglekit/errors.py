"""Exception hierarchy.

Three tiers, mirrored by the CLI exit codes:

* malformed input / broken axioms        -> InputError      (exit 1)
* unmet preconditions or hypotheses      -> PreconditionError (exit 2)
* a theorem failed on validated inputs   -> TheoremViolation (exit 3)
"""


class TanglekitError(Exception):
    pass


class InputError(TanglekitError):
    pass


class SystemValidationError(InputError):
    """An axiom failed at load time; carries the axiom name and a witness."""

    def __init__(self, axiom, witness=None):
        self.axiom = axiom
        self.witness = witness
        super().__init__(f"axiom {axiom} violated, witness {witness!r}")


class UnknownHandle(InputError):
    def __init__(self, handle):
        self.handle = handle
        super().__init__(f"unknown oriented handle {handle!r}")


class PreconditionError(TanglekitError):
    pass


class BoundExceeded(PreconditionError):
    pass


class InconsistentSet(PreconditionError):
    def __init__(self, witness):
        self.witness = witness
        super().__init__(f"inconsistent pair {witness!r}")


class NonInjectiveOrder(PreconditionError):
    pass


class NonSubmodularOrder(PreconditionError):
    pass


class NotStandard(PreconditionError):
    pass


class NonStarFamily(PreconditionError):
    pass


class NotIrreducible(PreconditionError):
    pass


class TrivialElementsPresent(PreconditionError):
    pass


class HypothesisFailure(PreconditionError):
    """A stated theorem hypothesis failed its eager check."""


class AmbiguousShiftChoice(PreconditionError):
    """Incomparable maxima in the shift-selection rule; carries all maxima."""

    def __init__(self, maxima):
        self.maxima = sorted(maxima)
        super().__init__(f"incomparable shift candidates {self.maxima}")


class TheoremViolation(TanglekitError):
    pass


class RichnessViolation(TheoremViolation):
    """Builder reached a full closure that avoids no forbidden set anywhere.

    Doubles as an empirical refutation of richness: carries the closure and
    its forbidden subset.
    """

    def __init__(self, closure, forbidden_subset):
        self.closure = closure
        self.forbidden_subset = forbidden_subset
        super().__init__(
            "closure orients all of S, avoids nothing in beta_v, "
            f"but contains forbidden subset {sorted(forbidden_subset)}"
        )


class ReductionStuck(TheoremViolation):
    pass


class BothOrNeither(TheoremViolation):
    """Dichotomy failure: both or neither branch validated."""
