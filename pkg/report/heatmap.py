"""Attention heatmaps as SVG.

Rows are target tokens, columns source tokens. Each cell is drawn as its own
rectangle with id ``cell-<row>-<col>``; gold links are drawn as unfilled
rectangles with id ``gold-<row>-<col>``. The SVG is written with a fixed hash
salt and no date, so equal inputs produce equal bytes.
"""

import logging
from typing import Iterable, NamedTuple, Optional, Tuple
import numpy as np
import matplotlib
matplotlib.use('Agg')
import matplotlib.pyplot as plt
from matplotlib.colors import Normalize, to_hex
from matplotlib.patches import Rectangle
from common.errors import ShapeError
from corpus.alignments import HardAlignmentSet
from corpus.export import AttentionRecord

_log = logging.getLogger(__name__)

COLORMAP = 'Greys'
SVG_SALT = 'attnalign'
GOLD_COLOR = '#d62728'
CELL_INCHES = 0.45


class HeatmapSpec(NamedTuple):

    sentence_id: int
    attention: np.ndarray
    source: Tuple[str, ...]
    target: Tuple[str, ...]
    gold: Optional[HardAlignmentSet] = None

    @classmethod
    def create(cls, sentence_id: int, attention, source: Iterable[str], target: Iterable[str],
               gold: HardAlignmentSet=None):
        attention = np.asarray(attention, dtype=np.float64)
        source, target = tuple(source), tuple(target)
        if attention.shape != (len(target), len(source)):
            raise ShapeError("attention does not match {} target x {} source tokens".format(len(target), len(source)),
                             attention.shape, (len(target), len(source)))
        if gold is not None:
            gold.check_bounds(len(source), len(target))
        return cls(sentence_id, attention, source, target, gold)

    @classmethod
    def from_record(cls, record: AttentionRecord, gold: HardAlignmentSet=None):
        return cls.create(record.sentence_id, record.attention, record.source, record.target, gold)


def cell_color(value: float) -> str:
    return to_hex(matplotlib.colormaps[COLORMAP](Normalize(vmin=0.0, vmax=1.0, clip=True)(value)))


def render_heatmap(spec: HeatmapSpec, pathname: str) -> str:
    ntgt, nsrc = spec.attention.shape
    with matplotlib.rc_context({'svg.hashsalt': SVG_SALT, 'svg.fonttype': 'none'}):
        fig, ax = plt.subplots(figsize=(1.5 + CELL_INCHES * max(nsrc, 1), 1.5 + CELL_INCHES * max(ntgt, 1)))
        try:
            for t in range(ntgt):
                for s in range(nsrc):
                    ax.add_patch(Rectangle((s, t), 1.0, 1.0, facecolor=cell_color(spec.attention[t, s]),
                                           edgecolor='none', gid='cell-{}-{}'.format(t, s)))
            if spec.gold is not None:
                for s, t in sorted(spec.gold.possible, key=lambda link: (link[1], link[0])):
                    ax.add_patch(Rectangle((s, t), 1.0, 1.0, fill=False, edgecolor=GOLD_COLOR,
                                           linewidth=2.0 if (s, t) in spec.gold.sure else 1.0,
                                           linestyle='-' if (s, t) in spec.gold.sure else '--',
                                           gid='gold-{}-{}'.format(t, s)))
            ax.set_xlim(0, nsrc)
            ax.set_ylim(ntgt, 0)
            ax.set_xticks(np.arange(nsrc) + 0.5)
            ax.set_xticklabels(spec.source, rotation=90)
            ax.set_yticks(np.arange(ntgt) + 0.5)
            ax.set_yticklabels(spec.target)
            ax.xaxis.tick_top()
            ax.set_title("sentence {}".format(spec.sentence_id), y=-0.1)
            fig.savefig(pathname, format='svg', bbox_inches='tight', metadata={'Date': None})
        finally:
            plt.close(fig)
    _log.debug("wrote %dx%d heatmap for sentence %s to %s", ntgt, nsrc, spec.sentence_id, pathname)
    return pathname


def heatmap_name(sentence_id: int) -> str:
    return 'attention-{:05d}.svg'.format(sentence_id)
