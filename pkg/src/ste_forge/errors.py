"""Exception types raised by ste_forge.

Every error that is part of an operation's contract gets its own class so
callers can catch precisely. All inherit from SteForgeError; most are also
ValueError (bad argument) or OSError-adjacent so generic handling still works.
"""


class SteForgeError(Exception):
    """Base class for all ste_forge errors."""


# --- raster / layer arguments ---

class DimMismatch(SteForgeError, ValueError):
    """Two rasters that must share dimensions do not."""


class TooSmall(SteForgeError, ValueError):
    """Image is smaller than the minimum the operation supports."""


# --- text rendering ---

class EmptyText(SteForgeError, ValueError):
    """Text to render is empty."""


class UnsupportedCharacter(SteForgeError, ValueError):
    """Text contains a character outside the renderable charset."""


class UnknownFont(SteForgeError, ValueError):
    """font_id does not resolve to a loaded font."""


class TextWiderThanCanvas(SteForgeError, ValueError):
    """Text cannot fit the canvas width even at the 8px shrink floor."""


# --- geometry ---

class AngleOutOfRange(SteForgeError, ValueError):
    """Rotation angle outside the supported +-45 degree range."""


class DegenerateHomography(SteForgeError, ValueError):
    """Perspective target corners are collinear; no valid homography exists."""


class NegativeSigma(SteForgeError, ValueError):
    """Gaussian blur sigma is negative."""


# --- dataset generation ---

class EmptyLexicon(SteForgeError, ValueError):
    """Word list is empty (or empty after charset filtering)."""


class EmptyFontSet(SteForgeError, ValueError):
    """No fonts available to sample from."""


class IndexOutOfRange(SteForgeError, IndexError):
    """Sample or label index beyond the valid range."""


class CorruptSample(SteForgeError):
    """A stored sample is unreadable: missing layer file or dim mismatch."""


class ConfigError(SteForgeError, ValueError):
    """Generation config file is malformed or has invalid values."""


# --- losses ---

class LayerMismatch(SteForgeError, ValueError):
    """Feature-map lists differ in length or per-layer shape."""


class NonFiniteInput(SteForgeError, ValueError):
    """An input scalar or array contains NaN or infinity."""


# --- metrics ---

class NonSymmetric(SteForgeError, ValueError):
    """Covariance matrix is not symmetric."""


class NotPSD(SteForgeError, ValueError):
    """Covariance product has an eigenvalue below the -1e-5 tolerance."""


class TooFewSamples(SteForgeError, ValueError):
    """Feature set has fewer than 2 samples; covariance undefined."""


class LengthMismatch(SteForgeError, ValueError):
    """Prediction and target lists differ in length."""


class EmptyLists(SteForgeError, ValueError):
    """Prediction/target lists are empty."""


class NoPairs(SteForgeError):
    """Evaluation directories share no decodable filenames."""


class PairDimMismatch(SteForgeError, ValueError):
    """A prediction/ground-truth pair differs in dimensions."""


class MalformedFeatureFile(SteForgeError, ValueError):
    """Feature file is neither valid binary nor parseable CSV."""
