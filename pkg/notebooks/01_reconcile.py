"""
Matching OCR text back to text-modal elements
=============================================

The image modality reads its text through OCR, so a few characters are
usually wrong.  ``reconcile`` pairs each image element with the nearest
text element by edit distance and accepts the pair when the distance is
small enough.
"""

from metaforge import DetectionVector, Element, Modality, SentenceCoord, levenshtein, reconcile

# Two text-modal elements, as a layout parser would emit them.
text = [
    Element("Title", "Notice on road maintenance", Modality.TEXT, coord=SentenceCoord(0, 0)),
    Element("Paragraph", "Works start on Monday.", Modality.TEXT, coord=SentenceCoord(1, 0)),
]



def img(label, ocr, y):
    return Element(label, ocr, Modality.IMAGE, box=DetectionVector(label, 0.9, 10.0, y, 400.0, 20.0))


# The same content seen through OCR, plus one smudge that matches nothing.
image = [
    img("Title", "Notlce on road maintenanse", 10.0),
    img("Paragraph", "Works start on Mondav.", 40.0),
    img("Paragraph", "%%##@@!!", 70.0),
]

print("distance of the title pair:", levenshtein(image[0].text, text[0].text))

for m in reconcile(image, text, threshold=3):
    print(m)

# A relative threshold scales with the length of the OCR string instead.
for m in reconcile(image, text, relative=0.05):
    print("relative:", m.image_element_index, m.best_text_element_index, m.distance, m.accepted)
