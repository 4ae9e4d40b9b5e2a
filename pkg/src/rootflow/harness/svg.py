"""Minimal SVG scatter and line plots (no plotting dependency)."""
from __future__ import annotations

from pathlib import Path

import numpy as np

_W, _H, _PAD = 480, 480, 40


def _fmt(v: float) -> str:
    return f"{v:.3f}"


class _Frame:
    def __init__(self, xs, ys, square=False):
        x0, x1 = float(np.min(xs)), float(np.max(xs))
        y0, y1 = float(np.min(ys)), float(np.max(ys))
        if square:
            half = 0.5 * max(x1 - x0, y1 - y0, 1e-12)
            cx, cy = 0.5 * (x0 + x1), 0.5 * (y0 + y1)
            x0, x1, y0, y1 = cx - half, cx + half, cy - half, cy + half
        self.x0, self.x1 = x0, x1 if x1 > x0 else x0 + 1.0
        self.y0, self.y1 = y0, y1 if y1 > y0 else y0 + 1.0

    def px(self, x):
        return _PAD + (np.asarray(x) - self.x0) / (self.x1 - self.x0) * (_W - 2 * _PAD)

    def py(self, y):
        return _H - _PAD - (np.asarray(y) - self.y0) / (self.y1 - self.y0) * (_H - 2 * _PAD)


def _document(body: list, title: str) -> str:
    head = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{_W}" height="{_H}" viewBox="0 0 {_W} {_H}">',
        f'<rect width="{_W}" height="{_H}" fill="white"/>',
        f'<text x="{_W // 2}" y="20" text-anchor="middle" font-family="sans-serif" font-size="13">{title}</text>',
        f'<rect x="{_PAD}" y="{_PAD}" width="{_W - 2 * _PAD}" height="{_H - 2 * _PAD}" fill="none" stroke="#888"/>',
    ]
    return "\n".join(head + body + ["</svg>"]) + "\n"


def scatter(path, points, title: str = "") -> None:
    """Complex points as dots on equal axes."""
    z = np.asarray(points, dtype=complex).ravel()
    frame = _Frame(z.real, z.imag, square=True)
    xs, ys = frame.px(z.real), frame.py(z.imag)
    body = [f'<circle cx="{_fmt(x)}" cy="{_fmt(y)}" r="1.5" fill="#1f4e9c"/>' for x, y in zip(xs, ys)]
    Path(path).write_text(_document(body, title))


def lines(path, series, title: str = "") -> None:
    """Polylines; ``series`` is a list of ``(x, y, colour)`` triples."""
    allx = np.concatenate([np.asarray(s[0], dtype=float) for s in series])
    ally = np.concatenate([np.asarray(s[1], dtype=float) for s in series])
    frame = _Frame(allx, ally)
    body = []
    for x, y, colour in series:
        pts = " ".join(f"{_fmt(a)},{_fmt(b)}" for a, b in zip(frame.px(x), frame.py(y)))
        body.append(f'<polyline points="{pts}" fill="none" stroke="{colour}" stroke-width="1.5"/>')
    Path(path).write_text(_document(body, title))
