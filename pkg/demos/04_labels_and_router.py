"""
Routing labels and the router
=============================

Labels come from judge scores of follow/avoid candidates as the user
perceives them. A softmax router then learns to predict the label from
history embeddings.
"""
import numpy as np

from apmbench.personalizers import (class_to_label, label_to_class, margin_label, one_sided_label, train_router,
                                    two_sided_label)

plus = np.array([6.0, 9.0, 5.0])
minus = np.array([5.0, 2.0, 8.0])
print("margin:   ", margin_label(plus, minus))     # principle 1, follow (margin +7)
print("two-sided:", two_sided_label(plus, minus))  # raw best is 9 on principle 1, follow
print("one-sided:", one_sided_label(plus))          # 9 is farthest from 5.5
print("class of (2, avoid):", label_to_class(2, -1), "->", class_to_label(5))

# Toy routing problem: three clusters of users, one label each.
rng = np.random.default_rng(0)
centres = rng.standard_normal((3, 8)) * 3
y = rng.integers(0, 3, 300)
x = centres[y] + rng.standard_normal((300, 8))
labels = [class_to_label(2 * c) for c in y]
router = train_router(x, labels, mode="classify", n_classes=6, epochs=200)
trace = router.meta["loss_trace"]
print(f"loss {trace[0]:.3f} -> {trace[-1]:.3f}, never increased: {bool(np.all(np.diff(trace) <= 0))}")
pred = [label_to_class(lab.principle, lab.direction) for lab in router.predict(x)]
print("train accuracy:", np.mean(np.array(pred) == 2 * y))
