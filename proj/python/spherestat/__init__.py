"""HEALPix pixelation, spherical windows, FITS maps and geostatistics on the sphere."""

from ._core import *  # noqa: F401,F403
from ._core import Error, MapSource, SkyFrame, Window

__all__ = [name for name in dir() if not name.startswith("_")]
