"""active-rays: polar active contours evolved over data, curvature and balloon landscapes."""

__version__ = "0.1.0"
