"""Newton transformations, the operators ``L_k`` and hypersurfaces with ``L_k x = Ax + b``.

Hypersurfaces of the sphere ``S^{n+1}`` and of hyperbolic space ``H^{n+1}``
are handled through charts into ``R^{n+2}``; the catalog supplies the
closed-form families and the verify module fits and classifies samples.
"""

from .catalog import (
    ExampleFamily,
    PredictedAffine,
    classify_example3,
    family_from_config,
    predicted_affine,
    predicted_Hk,
    riemannian_product,
    umbilic_hyperbolic,
    umbilic_sphere_cap,
    zero_hk1,
)
from .chart import AmbientSpace, Chart, FrameData, frame, hessian, numeric_chart, principal_curvatures, tangential_projection
from .errors import DomainError, ImmersionError, MetricSignatureError, NewtonLkError, OffManifoldError, SchemaError
from .lkop import LinearField, LkEvaluation, lk_gauss, lk_Hk, lk_position, lk_scalar, point_evaluations
from .symfun import (
    CurvatureProfile,
    c_k,
    characteristic_polynomial,
    curvature_profile,
    elementary_symmetric,
    identity_residuals,
    mean_curvatures,
    newton_eigenvalues,
    newton_matrix,
    newton_matrix_sum,
    scalar_curvature_check,
    trace_identities,
)
from .verify import (
    AffineFit,
    ClassificationReport,
    SampleSet,
    classify,
    compare_affine,
    fit_affine,
    quadratic_shape_check,
    sample_chart,
    selfadjoint_defect,
    structural_checks,
)

__version__ = "0.1.0"
