# Iterating vector fields and asking when the iterates stay gradient fields.
import numpy as np

import iterfield as itf

# A field is conservative when it is the gradient of some potential; on all
# of R^n that is the same as having a symmetric Jacobian everywhere.  The
# interesting question: if V is conservative, is V composed with itself?

# --- a linear field that alternates ---------------------------------------
A = [[1, 2], [1, -1]]
report = itf.scan_k(itf.Linear(A), 8)
print("A =", A)
for k, verdict in report.entries:
    print(f"  k={k}: {verdict.kind:10}", verdict.certificate or "")
# A^2 = 3I, so even powers are symmetric and odd powers are not: the field
# is 2-conservative without being conservative.

# --- rotations: divisibility, decided symbolically ------------------------
print("\nrotation by pi/3:")
rot = itf.Rotation2D(3)
print("  exact:", itf.scan_k(rot, 6).pattern())
print("  numeric residuals:",
      [round(itf.check_numeric(rot, k).residual, 12) for k in range(1, 7)])
# The k-th power rotates by k*pi/3 and is symmetric only when that is a
# multiple of pi, i.e. when 3 divides k.  The verdict never touches float
# trigonometry; the sampled residuals just confirm it.

# --- a nilpotent field: conservative only from k = 2 on --------------------
nil = itf.Linear([[-1, -1], [1, 1]])
print("\nnilpotent field:", itf.scan_k(nil, 4).pattern())
print("  second iterate of (3, -7):", itf.Iterate(nil, 2)(np.array([3.0, -7.0])))

# --- coordinate-wise fields are conservative forever -----------------------
maps = [itf.ScalarMap("exp", np.exp, np.exp),
        itf.ScalarMap("cube", lambda t: t ** 3, lambda t: 3 * t * t)]
coord = itf.CoordWise1D(maps)
print("\ncoordinate-wise field:", itf.scan_k(coord, 4).pattern())
print("  potential at (1, 1):", coord.potential([1.0, 1.0]))

# --- closure fails for composition of *different* fields -------------------
V1 = itf.Linear([[0, 1], [1, 0]])
V2 = itf.Linear([[1, 0], [0, -1]])
composed = itf.compose(V1, V2)
print("\nV1, V2 symmetric; V1 after V2 maps e1 to", composed([1.0, 0.0]))
print("  verdict:", itf.scan_k(composed, 1).verdict(1).kind)
# Both factors are gradient fields for every k, but their composition is a
# quarter turn: self-composition closure does not extend to mixed composition.

# --- Jacobians three ways ---------------------------------------------------
field = itf.Iterate(itf.Linear(A), 2)
x = np.array([0.3, -0.7])
print("\nJacobian of the second iterate at", x)
print("  chain product :\n", itf.jacobian(field, x, itf.ChainProduct()))
print("  finite diff   :\n", itf.jacobian(field, x, itf.CentralDifference()))
print("  asymmetry     :", itf.asymmetry(itf.jacobian(field, x)))
