"""Tour of the reverse-mode tensor engine: taped ops, backward, and the
finite-difference checker that guards every derivative in this package."""

import numpy as np

import rankgcl.autodiff as ad

# Forward + backward on a tiny expression: f(x) = sum((x W) * (x W))
rng = np.random.default_rng(0)
x = ad.parameter(rng.standard_normal((2, 3)))
w = ad.tensor(rng.standard_normal((3, 4)))

y = ad.matmul(x, w)
loss = ad.reduce_sum(ad.hadamard(y, y))
ad.backward(loss)
print("loss:", loss.item())
print("grad via tape:\n", x.grad)

# The same gradient, by central differences:
err = ad.grad_check(lambda t: ad.reduce_sum(
    ad.hadamard(ad.matmul(t, w), ad.matmul(t, w))), ad.tensor(x.data))
print(f"max relative error vs finite differences: {err:.2e}")

# Softmax handles -inf scores by assigning exactly zero probability,
# which is how "rank these at the bottom" targets are encoded.
scores = ad.tensor(np.array([2.0, -np.inf, 1.0]))
print("\nsoftmax with a -inf entry:", ad.row_softmax(scores).data)

# detach() cuts the tape: no gradient flows through self-generated targets.
a = ad.parameter(np.array([[1.0, 2.0]]))
live = ad.reduce_sum(ad.hadamard(a, a))
frozen = ad.reduce_sum(ad.hadamard(ad.detach(a), a))
ad.backward(live)
g_live = a.grad.copy()
a.zero_grad()
ad.backward(frozen)
print("\ngrad of sum(a*a):         ", g_live)
print("grad of sum(detach(a)*a): ", a.grad, " (one factor held constant)")
