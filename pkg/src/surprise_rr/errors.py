"""Exception types shared across the package."""


class SurpriseRRError(Exception):
    """Base class for all errors raised by this package."""


class LexiconError(SurpriseRRError, ValueError):
    """Malformed or inconsistent lexicon data, or a missing lexicon key."""


class AssumptionError(SurpriseRRError, ValueError):
    """Malformed assumption set, variant edit, or alternative spec."""


class ClusterError(SurpriseRRError, ValueError):
    """Malformed cluster or inscription data."""


class UnknownRenditionError(ClusterError):
    """An inscription rendition does not resolve to any lexicon entry."""


class AmbiguousRenditionError(ClusterError):
    """An inscription rendition resolves to more than one generic name."""
