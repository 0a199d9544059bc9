"""Prompt template ensemble for score averaging.

80 base templates (each ending with a period) plus one period-stripped
variant per template, 160 in total. ``<WORD>`` marks the concept slot.
"""

BASE_TEMPLATES = [
    "a bad photo of a <WORD>.",
    "a photo of many <WORD>.",
    "a sculpture of a <WORD>.",
    "a photo of the hard to see <WORD>.",
    "a low resolution photo of the <WORD>.",
    "a rendering of a <WORD>.",
    "graffiti of a <WORD>.",
    "a bad photo of the <WORD>.",
    "a cropped photo of the <WORD>.",
    "a tattoo of a <WORD>.",
    "the embroidered <WORD>.",
    "a photo of a hard to see <WORD>.",
    "a bright photo of a <WORD>.",
    "a photo of a clean <WORD>.",
    "a photo of a dirty <WORD>.",
    "a dark photo of the <WORD>.",
    "a drawing of a <WORD>.",
    "a photo of my <WORD>.",
    "the plastic <WORD>.",
    "a photo of the cool <WORD>.",
    "a close-up photo of a <WORD>.",
    "a black and white photo of the <WORD>.",
    "a painting of the <WORD>.",
    "a painting of a <WORD>.",
    "a pixelated photo of the <WORD>.",
    "a sculpture of the <WORD>.",
    "a bright photo of the <WORD>.",
    "a cropped photo of a <WORD>.",
    "a plastic <WORD>.",
    "a photo of the dirty <WORD>.",
    "a jpeg corrupted photo of a <WORD>.",
    "a blurry photo of the <WORD>.",
    "a photo of the <WORD>.",
    "a good photo of the <WORD>.",
    "a rendering of the <WORD>.",
    "a <WORD> in a video game.",
    "a photo of one <WORD>.",
    "a doodle of a <WORD>.",
    "a close-up photo of the <WORD>.",
    "a photo of a <WORD>.",
    "the origami <WORD>.",
    "the <WORD> in a video game.",
    "a sketch of a <WORD>.",
    "a doodle of the <WORD>.",
    "a origami <WORD>.",
    "a low resolution photo of a <WORD>.",
    "the toy <WORD>.",
    "a rendition of the <WORD>.",
    "a photo of the clean <WORD>.",
    "a photo of a large <WORD>.",
    "a rendition of a <WORD>.",
    "a photo of a nice <WORD>.",
    "a photo of a weird <WORD>.",
    "a blurry photo of a <WORD>.",
    "a cartoon <WORD>.",
    "art of a <WORD>.",
    "a sketch of the <WORD>.",
    "a embroidered <WORD>.",
    "a pixelated photo of a <WORD>.",
    "itap of the <WORD>.",
    "a jpeg corrupted photo of the <WORD>.",
    "a good photo of a <WORD>.",
    "a plushie <WORD>.",
    "a photo of the nice <WORD>.",
    "a photo of the small <WORD>.",
    "a photo of the weird <WORD>.",
    "the cartoon <WORD>.",
    "art of the <WORD>.",
    "a drawing of the <WORD>.",
    "a photo of the large <WORD>.",
    "a black and white photo of a <WORD>.",
    "the plushie <WORD>.",
    "a dark photo of a <WORD>.",
    "itap of a <WORD>.",
    "graffiti of the <WORD>.",
    "a toy <WORD>.",
    "itap of my <WORD>.",
    "a photo of a cool <WORD>.",
    "a photo of a small <WORD>.",
    "a tattoo of the <WORD>.",
]


def all_templates() -> list[str]:
    """Base templates followed by their period-stripped variants."""
    return BASE_TEMPLATES + [t.rstrip(".") for t in BASE_TEMPLATES]


def fill(template: str, word: str) -> str:
    return template.replace("<WORD>", word)
