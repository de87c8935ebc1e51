"""
Fusing text and image predictions with a decision matrix
========================================================

Each modality has its own blind spots.  The decision matrix is learned from
(text prediction, image prediction, gold) triples: every pair of predicted
classes gets a row saying which modality to trust.
"""

import numpy as np

from metaforge import GOVDOC, OneHot, fuse, train_decision_matrix

k = GOVDOC.k
idx = GOVDOC.code
print(k, "classes:", GOVDOC.names)

# The text model confuses Section2 with Section3; the image model is right there.
samples = [(idx("Section3"), idx("Section2"), idx("Section2"))] * 5
# The image model confuses Addressee with Paragraph; text is right.
samples += [(idx("Addressee"), idx("Paragraph"), idx("Addressee"))] * 5
W = train_decision_matrix(samples, k)

j = idx("Section3") * k + idx("Section2")
print("row for (text=Section3, image=Section2):", W.weights[j])

probs, cls = fuse(OneHot(k, idx("Section3")), OneHot(k, idx("Section2")), W)
print("fused class:", GOVDOC.names[cls])
print("fused vector sums to", float(np.sum(probs)))

# Unseen pairs keep an even split and the text class wins the tie.
_, cls = fuse(OneHot(k, idx("Title")), OneHot(k, idx("Paragraph")), W)
print("unseen pair ->", GOVDOC.names[cls])
