"""Exception hierarchy.

Everything raised on bad input derives from :class:`BHTError` (a ``ValueError``),
so callers that only care about "bad input" can catch one thing.
"""


class BHTError(ValueError):
    pass


class NegativeMass(BHTError):
    pass


class NotNormalized(BHTError):
    pass


class LengthMismatch(BHTError):
    pass


class EmptySupport(BHTError):
    pass


class DuplicateLabel(BHTError):
    pass


class AtomExplosion(BHTError):
    pass


class AlphaOutOfRange(BHTError):
    pass


class NegativeLambda(BHTError):
    pass


class OrderOutOfRange(BHTError):
    pass


class DomainError(BHTError):
    pass


class NegativeArgument(BHTError):
    pass


class DegenerateVariance(BHTError):
    pass


class InfiniteLlr(BHTError):
    """Raised when a quantity needs L finite P-almost surely but P puts mass where Q=0."""


class OutOfRange(BHTError):
    pass
