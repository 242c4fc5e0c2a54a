"""Physics-informed neural network solver for thermally coupled steady
incompressible flow, with a pressure-Poisson loss augmentation and tooling
for manufactured-solution convergence studies."""

from .autodiff import LossSpec, evaluate_jet, field_jets, loss_gradient
from .errors import (
    ArchitectureError,
    CheckpointError,
    ConfigurationError,
    NumericalOverflowError,
    ThermopinnError,
)
from .evaluation import (
    ConvergenceFit,
    ErrorReport,
    error_field,
    estimate_generalization_error,
    evaluate_errors,
    fit_convergence,
    l2_error,
    sobolev_error,
)
from .fields import FieldJet2, FieldState, Point2, ScalarJet2
from .net import MLPArchitecture, forward, init_parameters, parameter_count
from .physics import (
    DomainSpec,
    FlowParameters,
    ResidualBreakdown,
    beltrami_exact,
    beltrami_exact_jet,
    beltrami_forcing,
    beltrami_forcing_divergence,
    total_loss,
)
from .sampling import (
    CollocationSet,
    hierarchical_datasets,
    latin_hypercube,
    split_validation,
    test_grid,
)
from .training import (
    TrainConfig,
    TrainingHistory,
    adam_step,
    lbfgs_minimize,
    train,
    transfer_learn,
)

__version__ = "0.1.0"
