"""Almost-periodic Hamilton-Jacobi solvers on lifted tori."""

from .apfunc import (
    FrequencyVector,
    SampledLine,
    TrigPoly,
    bohr_coefficient,
    bohr_probe_sampled,
    evaluate,
    fejer_approx,
    mean_value,
    spectrum,
    sup_distance,
)
from .freqmod import (
    SpectrumModule,
    combine,
    declared_module,
    hermite_normal_form,
    integer_coordinates,
    kronecker_fill_distance,
    membership,
    module_basis_rational,
    module_of,
)
from .hamiltonian import Hamiltonian
from .hjsolve import SolveConfig, lift_initial, solve_direct_1d, solve_lifted, solve_viscous, trace_back
from .torus import TorusField

__version__ = "0.1.0"
