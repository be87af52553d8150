"""Persistence threshold of the logistic population on a ball.

A positive steady state exists exactly when the principal eigenvalue
of the diffusion operator is below the growth rate 1.  With a
Dirichlet boundary on a ball of radius R this happens for R > pi.

    python demos/persistence_threshold.py
"""
import numpy as np

from coatfkpp.coated import CoatingSpec
from coatfkpp.effective import EbcKind
from coatfkpp.steady import steady_coated, steady_effective
from coatfkpp.surface import build_surface

print(" R1   lambda_1   exists   max V")
for R1 in (2.0, 3.0, 3.2, 4.0, 6.0):
    st = steady_effective(EbcKind.dirichlet(), 1.0, build_surface("sphere", R1, 2), 256)
    peak = float(np.max(st.profile.values[0]) * st.profile.spectrum.e0) if st.profile is not None else 0.0
    print(f"{R1:4.1f}  {st.eigenvalue:9.5f}   {str(st.exists):6s}   {peak:.4f}")

# a poorly conducting coating acts like a weak Robin boundary and lowers the threshold
sp = build_surface("sphere", 2.0, 2)
for delta in (0.1, 0.025):
    st = steady_coated(CoatingSpec(1.0, delta * delta, 1.0, delta), sp, 256, 32)
    print(f"coated R1=2, delta={delta}: lambda_1 = {st.eigenvalue:.4f}, exists = {st.exists}")
