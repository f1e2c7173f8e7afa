"""Structure/texture/noise image decomposition toolkit.

Submodules:

* ``image``       float64 image arrays, noise generation, PGM/raw-float I/O
* ``tv``          gradient/divergence, total variation, dual projectors
* ``wavelet``     orthonormal wavelet transform, soft thresholding, norms
* ``contourlet``  pyramid + directional bank, soft thresholding, norms
* ``models``      the seven decomposition algorithms
* ``evaluation``  phantom synthesis and quality metrics
* ``cli``         the ``vardecomp`` command line front end
"""

from . import contourlet, evaluation, image, models, tv, wavelet

__all__ = ["contourlet", "evaluation", "image", "models", "tv", "wavelet"]
__version__ = "0.1.0"
