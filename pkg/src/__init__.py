"""ems-segment - edge-mean separation level-set segmentation"""

__version__ = "0.1.0"
