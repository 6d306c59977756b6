# Exact rational polynomial algebra: certificates instead of residuals.
from iterfield.polynomials import (PolyField, RationalPoly,
                                   cubic_asymmetry_coefficients, cubic_gate,
                                   cubic_gate_symbolic, divide_exact,
                                   iterate_poly_field, linear_asymmetry_symbolic,
                                   parse_poly)
from iterfield.conservatism import check_poly

NAMES = ("a", "b", "c", "d")

# --- symbolic verdicts for every 2-D linear field at once ------------------
# The field (x, y) -> (ax + by, cx + dy) is k-conservative exactly when the
# k-th matrix power is symmetric; over the coefficient ring the off-diagonal
# gap factors beautifully.
for k in (1, 2, 3, 4):
    print(f"asymmetry of power {k}:", linear_asymmetry_symbolic(k).to_text(NAMES))
# Reading the factors: conservative fields (b = c) vanish everywhere, trace
# zero matrices (a + d = 0) are 2-conservative without being conservative.

# --- the gradient of x^2 y -------------------------------------------------
f = RationalPoly(2, {(2, 1): 1})
V = PolyField.gradient_of(f)
print("\ngrad(x^2 y)        :", V.to_texts())
print("second iterate     :", iterate_poly_field(V, 2).to_texts())
verdict = check_poly(V, 2)
print("verdict at k=2     :", verdict.kind, "| certificate:", verdict.certificate)
# The certificate is the exact polynomial obstruction: the mixed partials of
# the second iterate differ by 4x^3 - 8xy^2, which is not the zero polynomial.

# --- one equation cuts out the 2-conservative plane cubics ------------------
# Gradients of a x^3 + b x^2 y + c x y^2 + d y^3 are 2-conservative exactly
# on the zero set of the gate below.
gate = cubic_gate_symbolic()
print("\ngate polynomial    :", gate.to_text(NAMES))
print("gate at (0,1,0,0)  :", cubic_gate(0, 1, 0, 0), " (x^2 y: not 2-conservative)")
print("gate at (1,0,0,1)  :", cubic_gate(1, 0, 0, 1), " (separable cubic: fine)")

coeffs = cubic_asymmetry_coefficients(2)
print("\nasymmetry coefficients at k=2, each divisible by the gate:")
for key in sorted(coeffs, reverse=True):
    quotient = divide_exact(coeffs[key], gate)
    print(f"  x^{key[0]} y^{key[1]}: quotient {quotient.to_text(NAMES)}")

coeffs3 = cubic_asymmetry_coefficients(3)
all_divisible = all(divide_exact(p, gate) is not None for p in coeffs3.values())
print(f"\nat k=3: {len(coeffs3)} coefficient polynomials of degree "
      f"{sorted({p.degree() for p in coeffs3.values()})}, "
      f"all divisible by the gate: {all_divisible}")
# Consequence: every 2-conservative cubic gradient is automatically
# 3-conservative, because the k=3 obstruction vanishes wherever the gate does.

# --- the canonical text form round-trips ------------------------------------
text = "4*x0^3 + -8*x0^1*x1^2"
print("\nparse/render round trip:", parse_poly(text, 2).to_text() == text)
