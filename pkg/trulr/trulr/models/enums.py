from enum import Enum


class Family(Enum):
    """Parametric input families understood by configs and the CLI"""

    BETA = "beta"
    NORMAL = "normal"
    CHI_SQUARED = "chi_squared"
    MV_NORMAL = "mv_normal"
    FINITE_DISCRETE = "finite_discrete"
    UNIFORM_LAPLACE = "uniform_laplace"

    def __repr__(self):
        return f"F.{self.name}"


class DivergenceMethod(Enum):
    CLOSED_FORM = "closed_form"
    MONTE_CARLO = "monte_carlo"


class RewardKind(Enum):
    BINARY = "binary"
    NORMAL = "normal"


class BoundaryRule(Enum):
    INF_SIMPLE = "inf_simple"
    INF_OPTIMAL = "inf_optimal"
    PNORM_SIMPLE = "pnorm_simple"
    PNORM_MGF_OPTIMAL = "pnorm_mgf_optimal"
    PNORM_BERNSTEIN = "pnorm_bernstein"
    FIXED = "fixed"


INF_NORM_RULES = (BoundaryRule.INF_SIMPLE, BoundaryRule.INF_OPTIMAL)
PNORM_RULES = (
    BoundaryRule.PNORM_SIMPLE,
    BoundaryRule.PNORM_MGF_OPTIMAL,
    BoundaryRule.PNORM_BERNSTEIN,
)


class TailKind(Enum):
    """Shapes of Y with tabulated MGF / Bernstein constants"""

    BOUNDED = "bounded"
    HOEFFDING = "hoeffding"
    NORMAL = "normal"
    EXPONENTIAL = "exponential"


class BoundId(Enum):
    LR_CONC_INF = "lr_conc_inf"
    LR_CONC_P = "lr_conc_p"
    LR_VAR_P = "lr_var_p"
    TRULR_BIAS_INF = "trulr_bias_inf"
    TRULR_VAR_INF = "trulr_var_inf"
    TRULR_BIAS_P = "trulr_bias_p"
    TRULR_VAR_P = "trulr_var_p"
    TRULR_CONC_INF_FULL = "trulr_conc_inf_full"
    TRULR_CONC_MGF_FULL = "trulr_conc_mgf_full"
    TRULR_CONC_BERNSTEIN_FULL = "trulr_conc_bernstein_full"


class OutputKind(Enum):
    IDENTITY = "identity"
