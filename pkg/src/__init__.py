"""
Rank Dynamics - rank distributions and rank dynamics of ranking time series

Generalized Zipf models with bootstrap goodness of fit, per-rank dynamics
measures (diversity, change probability, entropy, complexity, closure)
and a calibrated random-walk ranking model.
"""

__version__ = "1.0.0"
__author__ = "Rank Dynamics Development Team"
__description__ = "Rank distribution and rank dynamics analysis toolkit"

# Modules import each other by plain name; entry points put src/ on sys.path
try:
    from core_data import RankingSeries, parse_ranking_csv
    from dynamics import compute_profile
    from walker import calibrate_sigma, simulate

    __all__ = [
        'RankingSeries',
        'parse_ranking_csv',
        'compute_profile',
        'calibrate_sigma',
        'simulate',
    ]
except ImportError:
    # Handle case where src/ is not on sys.path or dependencies are missing
    __all__ = []
