"""
A small MLP with hand-written backprop
======================================

Parameters live in one flat vector. Here we check the reverse-mode
gradient against central differences.
"""

import numpy as np

from rofso_alloc import mlp

spec = mlp.MlpSpec((1, 20, 10, 5, 2))
print("parameter count:", spec.n_params)

rng = np.random.default_rng(0)
theta = mlp.init(spec, rng)
x = np.array([0.4])
out, cache = mlp.forward(theta, spec, x)
print("output:", out)

# gradient of <d, f(x)> with respect to theta
d = np.array([1.0, -0.5])
g = mlp.backward(theta, spec, cache, d)

eps = 1e-5
fd = np.array([(d @ mlp.forward(theta + eps * e, spec, x)[0]
                - d @ mlp.forward(theta - eps * e, spec, x)[0]) / (2 * eps)
               for e in np.eye(spec.n_params)])
print("max |backward - finite diff|:", np.max(np.abs(g - fd)))

# Several independent networks can be stacked and run in one call.
stack = mlp.init(spec, rng, count=4)
outs, _ = mlp.forward(stack, spec, rng.normal(size=(4, 3, 1)))
print("stacked output shape:", outs.shape)
