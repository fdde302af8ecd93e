"""Tour of the deformed su(2) layer: q-numbers, the q-exponential, the
lambda-contraction of commutators, and the deformed CNOT construction.

Run:  python demos/01_deformed_algebra.py
"""

import numpy as np
import scipy.linalg

from qiprune import (
    DeformationParams,
    build_Uq,
    build_cnot_q,
    commutator_contraction_check,
    q_exp,
    q_factorial,
    q_number,
)

print("=== q-numbers and q-factorials ===")
print("The q-number [x]_q = (q^x - q^-x)/(q - q^-1) deforms plain integers;")
print("it recovers x as q -> 1 and is symmetric under q -> 1/q.\n")
for q in (1.0, 1.2, 2.0):
    print(f"  q={q}:  [1]_q={q_number(1, q):.4f}  [2]_q={q_number(2, q):.4f}  "
          f"[3]_q={q_number(3, q):.4f}  [3]_q!={q_factorial(3, q):.4f}")

print("\n=== q-exponential vs the ordinary matrix exponential ===")
rng = np.random.default_rng(0)
h = rng.standard_normal((2, 2)) + 1j * rng.standard_normal((2, 2))
a = 1j * (h + h.conj().T) / 2.0
ours, order = q_exp(a, q=1.0)
ref = scipy.linalg.expm(a)
print(f"at q = 1 the series reproduces expm: max |diff| = {np.max(np.abs(ours - ref)):.2e} "
      f"(series truncated at order {order})")
deformed, order_d = q_exp(a, q=1.5)
print(f"at q = 1.5 the deformed series differs: max |diff| = {np.max(np.abs(deformed - ref)):.2e}")

print("\n=== lambda-contraction of commutators ===")
print("Scaling generators by lambda scales every commutator by lambda^2;")
print("lambda = 0 is the commutative limit, lambda = 1 the full algebra.\n")
for lam in (0.0, 0.25, 0.5, 0.97, 1.0):
    residual = commutator_contraction_check(DeformationParams(lam))
    print(f"  lambda={lam:4}:  max residual |[lT_i, lT_j] - l^2 [T_i, T_j]| = {residual:.2e}")

print("\n=== the gate family exp_q(i sum theta_k lambda T_k) ===")
print("These operators are a mathematical parametrization and are generally")
print("NOT unitary; circuits execute compiled Rz/Ry/Rz rotations instead.\n")
for lam, theta in ((1.0, (0.4, 0.4, 0.3)), (1.0, (0.5, -0.2, 0.3)), (0.5, (0.4, 0.4, 0.3))):
    params = DeformationParams(lam)
    _, dev = build_Uq(theta, params)
    kind = "Hermitian combo" if theta[0] == theta[1] else "generic angles"
    print(f"  lambda={lam}, q={params.q:.3f}, {kind}: unitarity deviation = {dev:.2e}")

print("\n=== the deformed CNOT and its unitarity deficit ===")
print("Two readings of the projector construction are provided; neither is")
print("unitary away from lambda = 1, so the deviation is reported, not assumed.\n")
for lam in (1.0, 0.97, 0.5, 0.0):
    params = DeformationParams(lam)
    _, dev_2q = build_cnot_q(params, projectors="two_qubit")
    _, dev_c = build_cnot_q(params, projectors="control")
    print(f"  lambda={lam:4}: deviation two_qubit={dev_2q:.3f}  control={dev_c:.3f}")
