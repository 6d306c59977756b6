# Eigenvalue ranges of iterated gradient fields, sampled and bounded.
import numpy as np

import iterfield as itf

# For a gradient field, the symmetrized Jacobian at a point is the Hessian of
# the potential; its eigenvalue range over samples is evidence about convexity.

quad = itf.glm_gradient(itf.GlmSpec([[1.0, 0.0], [0.0, 2.0]], "quadratic"))
sample = itf.spectrum_at(quad, [0.3, -0.4])
print("quadratic model spectrum:", (sample.lambda_min, sample.lambda_max))
print("classified:", itf.classify(quad).to_dict())

logistic = itf.glm_gradient(itf.GlmSpec([[1.0, 0.0]], "logistic"))
wide = itf.SamplingConfig(count=50, radius=40.0, seed=1)
print("logistic on a wide ball:", itf.classify(logistic, wide).to_dict())

# Iterating a gradient field powers up its eigenvalue bounds: if the Hessian
# lives in [alpha, beta] along the points the orbit visits, the j-th iterate's
# Jacobian lives in [alpha^j, beta^j].
report = itf.check_propagation(quad, 3)
print(f"\npropagation (alpha={report.alpha_hat}, beta={report.beta_hat}):")
for level in report.levels:
    print(f"  j={level.j}: sampled [{level.lambda_min:.4f}, {level.lambda_max:.4f}] "
          f"inside [{level.bound_low:.4f}, {level.bound_high:.4f}] -> {level.passed}")

# The same machinery for descent maps.  With f alpha-strongly convex and
# beta-smooth and step gamma <= 2/(alpha+beta), the model-delta field
# x - (descent map)^j(x) has spectrum in [1 - lam^j, 1 + lam^j], lam = 1 - gamma*alpha.
field = itf.Linear(np.diag([1.0, 3.0]))
gd_report = itf.check_gd_propagation(field, 0.5, 3, claimed="strongly-convex",
                                     alpha=1.0, beta=3.0,
                                     critical_points=[np.zeros(2)])
print(f"\ndescent-delta propagation (lambda={gd_report.lam}):")
for level in gd_report.levels:
    print(f"  j={level.j}: sampled [{level.lambda_min:.4f}, {level.lambda_max:.4f}] "
          f"inside [{level.bound_low:.4f}, {level.bound_high:.4f}] -> {level.passed}, "
          f"critical-point residuals {level.critical_point_residuals}")
# Critical points of the potential stay critical for every delta field: the
# descent map fixes them exactly, so the delta vanishes there.

# Convex case: with gamma <= 1/beta the delta field is 1-Lipschitz.
log2 = itf.glm_gradient(itf.GlmSpec(np.eye(2), "logistic"))
conv = itf.check_gd_propagation(log2, 4.0, 3, claimed="convex", beta=0.25)
print("\nconvex descent deltas stay in [0, 1]:",
      [(round(l.lambda_min, 3), round(l.lambda_max, 3)) for l in conv.levels])

# Refusals are part of the contract: a too-large step is an error, not a
# silently vacuous pass.
try:
    itf.check_gd_propagation(field, 0.9, 2, claimed="strongly-convex",
                             alpha=1.0, beta=3.0)
except itf.StepSizeError as err:
    print("\nstep-size guard:", err)
