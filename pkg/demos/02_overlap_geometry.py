"""The task-conditioned overlap geometry: the weight operator G_q, the
distance d_q, threshold calibration, and the analytic drift bound that the
published tables are built from.

Run:  python demos/02_overlap_geometry.py
"""

import math

import numpy as np

from qiprune import build_geometry, calibrate_epsilon, d_q, drift_rhs, statewise_deviation_bound
from qiprune.linalg import haar_unitary, random_state

print("=== the weight operator G_q ===")
print("Diagonal entries q^(hamming - n), rescaled so M_q = 1; q = 1 gives the")
print("identity and recovers the standard inner product.\n")
for q in (1.0, math.exp(0.03), 1.5):
    geo = build_geometry(3, q)
    print(f"  q={q:.3f}:  m_q={geo.m_q:.4f}  M_q={geo.M_q}  g_diag={np.round(geo.g_diag, 4)}")

print("\n=== the distance d_q on a task ensemble ===")
rng = np.random.default_rng(1)
geo = build_geometry(2, math.exp(0.03))
ens = np.array([random_state(2, rng) for _ in range(10)])
u = haar_unitary(4, rng)
print(f"  d_q(U, U)          = {d_q(u, u.copy(), ens, geo)}  (identical operators, exactly zero)")
x_on_0 = np.kron(np.array([[0, 1], [1, 0]]), np.eye(2)).astype(complex)
print(f"  d_q(U, X0 U)       = {d_q(u, x_on_0 @ u, ens, geo):.4f}  (a hard flip is far)")
small = u @ (np.eye(4) + 0.01j * np.diag([1, -1, 1, -1]))
small, _ = np.linalg.qr(small)
print(f"  d_q(U, U + tiny)   = {d_q(u, small, ens, geo):.4f}  (a small perturbation is close)")

print("\n=== calibrating the pruning threshold from the task tolerance ===")
for delta in (0.01, 0.02):
    half = calibrate_epsilon(delta, geo, rule="half_delta_rule")
    arcs = calibrate_epsilon(delta, geo, rule="arcsin_rule")
    print(f"  delta={delta}:  half-delta rule eps={half.epsilon_q:.6f}   "
          f"arcsin rule eps={arcs.epsilon_q:.6f}")

print("\n=== one replacement: the state-wise deviation bound ===")
for eps in (0.005, 0.01):
    print(f"  eps={eps}: trace-distance bound per replacement = {statewise_deviation_bound(eps, 1.0):.5f}")

print("\n=== L replacements: the published drift arithmetic ===")
print("RHS_raw = 2 L sin(delta/2), clipped to min(1, .) for reporting.")
print("Reference points from the benchmark tables:\n")
rows = [
    ("480-gate circuit, 60.00% replaced, delta=0.01", 0.60 * 480, 0.005, 2.88),
    ("480-gate circuit, 51.98% replaced, delta=0.02", 0.5198 * 480, 0.010, 4.99),
    ("240-gate circuit, 59.79% replaced, delta=0.01", 0.5979 * 240, 0.005, 1.435),
    ("240-gate circuit, 10.63% replaced, delta=0.01", 0.1063 * 240, 0.005, 0.26),
]
for label, L, eps, published in rows:
    raw, clip = drift_rhs(L, eps)
    arrow = f"{raw:.3f} -> {clip:.0f}" if raw > 1 else f"{raw:.3f} (unclipped)"
    print(f"  {label}: {arrow}   [published {published}]")
