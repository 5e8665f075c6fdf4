from .hull import ChordSupport, EnvelopeResult, chord_support, concave_envelope, upper_hull

__all__ = [
    'ChordSupport',
    'EnvelopeResult',
    'chord_support',
    'concave_envelope',
    'upper_hull',
]
