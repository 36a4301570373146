import json
import math
from typing import Any, Dict, Iterable, List, Optional, Sequence

import numpy as np

from .errors import SchemaError

SPARKLINE_CHARS = ' ▁▂▃▄▅▆▇█'


def sparkline(values: Sequence[float], width: int = 20, peak: Optional[float] = None) -> str:
    if not len(values):
        return ' ' * width
    recent = list(values)[-width:]
    top = peak if peak is not None else (max(recent) or 1)
    max_idx = len(SPARKLINE_CHARS) - 1
    chars = []
    for v in recent:
        idx = int((v / top) * max_idx) if top else 0
        chars.append(SPARKLINE_CHARS[max(0, min(idx, max_idx))])
    return ''.join(chars).rjust(width)


def render_histogram(histogram: Dict[Any, int], width: int = 30) -> List[str]:
    """One bar per bucket, scaled to the largest bucket."""
    if not histogram:
        return []
    top = max(histogram.values())
    lines = []
    for key in sorted(histogram):
        count = histogram[key]
        bar = '█' * max(1, round(width * count / top))
        lines.append(f"{key:>4} │{bar} {count}")
    return lines


def spawn_rngs(seed: int, count: int) -> List[np.random.Generator]:
    """Independent generators, one per task; stable for a given seed regardless of scheduling."""
    children = np.random.SeedSequence(seed).spawn(count)
    return [np.random.default_rng(c) for c in children]


def complex_pair(z: complex) -> List[float]:
    z = complex(z)
    return [z.real, z.imag]


def vector_pairs(v: Iterable[complex]) -> List[List[float]]:
    return [complex_pair(z) for z in v]


def parse_complex(value: Any) -> complex:
    """Accept a number or a ``[re, im]`` pair."""
    if isinstance(value, (int, float)) and not isinstance(value, bool):
        return complex(value)
    if isinstance(value, (list, tuple)) and len(value) == 2:
        try:
            return complex(float(value[0]), float(value[1]))
        except (TypeError, ValueError):
            pass
    raise SchemaError(f"expected a number or [re, im] pair, got {value!r}")


def _format_float(x: float) -> str:
    if math.isnan(x) or math.isinf(x):
        # not representable in JSON
        return json.dumps(repr(x))
    if x == 0:
        return '0.0'
    text = format(x, '.17g')
    if text.lstrip('-').isdigit():
        text += '.0'
    return text


def _encode(obj: Any, indent: int, level: int) -> str:
    pad = ' ' * (indent * (level + 1))
    end = ' ' * (indent * level)
    if isinstance(obj, bool) or obj is None:
        return json.dumps(obj)
    if isinstance(obj, (np.bool_,)):
        return json.dumps(bool(obj))
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        return _format_float(float(obj))
    if isinstance(obj, (complex, np.complexfloating)):
        return _encode(complex_pair(obj), indent, level)
    if isinstance(obj, str):
        return json.dumps(obj, ensure_ascii=False)
    if isinstance(obj, np.ndarray):
        return _encode(obj.tolist(), indent, level)
    if isinstance(obj, dict):
        if not obj:
            return '{}'
        items = [f"{pad}{json.dumps(str(k), ensure_ascii=False)}: {_encode(v, indent, level + 1)}"
                 for k, v in obj.items()]
        return '{\n' + ',\n'.join(items) + '\n' + end + '}'
    if isinstance(obj, (list, tuple)):
        if not obj:
            return '[]'
        if all(isinstance(v, (int, float, np.integer, np.floating)) and not isinstance(v, bool)
               for v in obj):
            return '[' + ', '.join(_encode(v, indent, level + 1) for v in obj) + ']'
        items = [pad + _encode(v, indent, level + 1) for v in obj]
        return '[\n' + ',\n'.join(items) + '\n' + end + ']'
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def dumps_report(report: Any, indent: int = 2) -> str:
    """JSON text with insertion-ordered keys and floats at 17 significant digits."""
    return _encode(report, indent, 0) + '\n'
