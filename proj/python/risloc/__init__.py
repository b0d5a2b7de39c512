"""Localization error bounds and RIS phase design for single-anchor near-field systems."""

try:
    from ._risloc import *  # noqa: F401,F403
    from ._risloc import __version__  # noqa: F401
except ImportError:  # development layout: the extension sits on sys.path directly
    from _risloc import *  # noqa: F401,F403
    from _risloc import __version__  # noqa: F401
