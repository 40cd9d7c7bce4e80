"""Exception types shared across the package."""


class SheafkitError(Exception):
    """Base class for every error raised by sheafkit."""


class DuplicateObservable(SheafkitError):
    """Two observables in a scenario share an id."""


class UnknownObservable(SheafkitError):
    """A context or proposition references an observable the scenario lacks."""


class DominatedContext(SheafkitError):
    """A cover context is contained in another, violating maximality."""


class InvalidScenario(SheafkitError):
    """A scenario violates a structural invariant not covered by a finer error."""


class EmptyCover(SheafkitError):
    """A scenario was given no cover contexts."""


class SizeLimitExceeded(SheafkitError):
    """A combinatorial enumeration would exceed its configured budget."""


class NotASubcontext(SheafkitError):
    """A restriction target is not contained in the source context."""


class EmptySupport(SheafkitError):
    """A context's support is empty at the requested threshold."""


class InvalidModel(SheafkitError):
    """An empirical model violates a table invariant (domain, sign, or sum)."""


class OutcomeOutOfRange(SheafkitError):
    """An outcome value is not within an observable's arity."""


class IncompatibleModel(SheafkitError):
    """An empirical model's marginals disagree on a context overlap."""


class SolverBudgetExceeded(SheafkitError):
    """The linear-programming solver exceeded its pivot budget."""


class StabilityViolation(SheafkitError):
    """A dynamics time step exceeds the configured stability bound."""


class DensityCollapse(SheafkitError):
    """The density floor activated over too large a grid fraction in one step."""


class NonMonotoneMap(SheafkitError):
    """A user-supplied sigma-to-lambda table is not monotone non-decreasing."""


class ParseError(SheafkitError):
    """A scenario/model file or proposition string failed to parse."""
