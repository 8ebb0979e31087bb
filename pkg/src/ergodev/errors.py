"""Exception types shared across the library.

Every error raised by library code derives from ErgodevError so the CLI can
map failures onto its exit-code contract (2 = invariant violation, 3 = bad
configuration) without pattern-matching on messages.
"""


class ErgodevError(Exception):
    """Base class for all library errors."""


# --- linear algebra / spectrum ---

class NotUnimodular(ErgodevError):
    """Matrix flagged as a cohomology action has determinant != +-1."""


class TopEigenvalueNotSimple(ErgodevError):
    """Leading eigenvalue is not real, simple and strictly dominant."""


# --- toral maps ---

class NotHyperbolic(ErgodevError):
    """Linear part fails |trace| > 2 or det != 1."""


class PerturbationTooLarge(ErgodevError):
    """Cone-field invariance failed on the verification grid."""


class NoConvergence(ErgodevError):
    """Iterative refinement did not reach the requested tolerance."""


class ResolutionInsufficient(ErgodevError):
    """Grid solve residual stayed above tolerance at the maximal grid size."""


# --- interval exchanges / suspensions ---

class TieBreakUndefined(ErgodevError):
    """Rauzy step requested with equal winner/loser lengths."""


class WrongSide(ErgodevError):
    """Rauzy step requested on the non-admissible side."""


class LoopNotClosed(ErgodevError):
    """Rauzy word does not return to its starting combinatorics."""


class NotPrimitive(ErgodevError):
    """Loop matrix has no strictly positive power."""


class PerronRootNotSimple(ErgodevError):
    """Loop matrix Perron root fails the simplicity test."""


class HitSingularity(ErgodevError):
    """Orbit reached a cone point / interval endpoint exactly."""


# --- fitting / reports ---

class DegenerateWindow(ErgodevError):
    """Fit window has too few usable points."""


class ExponentCollision(ErgodevError):
    """Two deviation exponents are numerically indistinguishable."""


# --- CLI ---

class ConfigInvalid(ErgodevError):
    """Experiment configuration failed validation."""


class PresetMissing(ErgodevError):
    """Requested preset file does not exist."""
