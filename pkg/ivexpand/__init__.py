# ivexpand: gH calculus and expansions of interval-valued functions

from ivexpand.calculus import (
    DerivativeLadder,
    DerivativeTensor,
    MonotonicityReport,
    PartialResult,
    chain_endpoint_gradients,
    chain_gradient,
    derivative_tensor,
    directional_derivs,
    gradient,
    hessian,
    mu_classify,
    partial_gh,
    partial_numeric,
    real_product_derivative,
)
from ivexpand.errors import (
    BranchSwitchError,
    DerivativeUndefinedError,
    DomainError,
    ExpansionHypothesisError,
    HessianUndefinedError,
    InvalidArgumentError,
    IvexpandError,
    MathematicalError,
    ParseError,
    PreconditionViolatedError,
)
from ivexpand.expansion import (
    EnclosureReport,
    ExpansionPolynomial,
    Term,
    enclosure_1d,
    enclosure_nd,
    eval_polynomial,
    remainder_decay,
    remainder_hull,
    taylor_1d,
    taylor_nd,
)
from ivexpand.funcexpr import (
    DualEndpoint,
    EvalPoint,
    Expr,
    branch_stability,
    eval_dual,
    eval_interval,
    eval_series,
    parse,
    to_text,
)
from ivexpand.interval import (
    Interval,
    IntervalMatrix,
    IntervalVector,
    bracket,
    gh_diff,
    hausdorff,
    hull,
    int_pow,
    is_subset_within,
    linear_comb,
    magnitude,
    spread,
)
from ivexpand.verify import Report, check_algebra_rules, check_bracket_theorem, check_mvt, run_suite

__version__ = "0.1.0"
