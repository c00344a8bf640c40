"""Regional electricity spot-price modeling.

Monotone supply/cost regressions with mixture disturbances, a Gaussian-copula
VAR time-series layer, ensemble density forecasting, event studies and
backtest validation. The heavy lifting lives in the compiled `_elspot`
extension; this package re-exports its surface.
"""

try:
    from ._elspot import *  # noqa: F401,F403
    from ._elspot import __version__  # noqa: F401
except ImportError:  # running against a build tree: module on PYTHONPATH
    from _elspot import *  # noqa: F401,F403
    from _elspot import __version__  # noqa: F401
