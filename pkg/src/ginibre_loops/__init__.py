"""Loop equations, exact resolvents and moments for the product of two
complex Ginibre matrices."""
from .algebra import BigRational, LaurentSeries, MultiPoly, RationalFunc, laurent_at, residue_at
from .curve import CurveData, build_curve, density_rho01, fuss_catalan
from .loops import ResolventTable, solve_all, solve_through, solve_wgn, to_w_form
from .maps import enumerate_cumulants
from .moments import CumulantRecord, MomentEngine

__version__ = "0.1.0"
