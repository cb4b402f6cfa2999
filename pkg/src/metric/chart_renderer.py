import logging

import numpy as np
import matplotlib
matplotlib.use("Agg")  # Use non-interactive backend
import matplotlib.pyplot as plt

from ..config import Config
from ..utils.io_utils import atomic_write

logger = logging.getLogger(__name__)


class CorrelationChartRenderer:
    """Renders metric-vs-performance scatter charts with a least-squares line"""

    def __init__(self, width=None, height=None):
        self.config = Config()
        section = self.config.report
        self.width = width or section.get('width', 640)
        self.height = height or section.get('height', 480)

        # Get chart colors from config
        self.chart_colors = section['chart_colors']

    def render(self, joined, correlations, path):
        """Draw one panel per (metric, performance) pair into a PNG at `path`"""
        pairs = list(correlations.itertuples(index=False))
        n_cols = min(3, max(1, len(pairs)))
        n_rows = int(np.ceil(len(pairs) / n_cols)) if pairs else 1

        fig, axes = plt.subplots(n_rows, n_cols, squeeze=False,
                                 figsize=(n_cols * self.width / 100, n_rows * self.height / 100),
                                 dpi=100)
        for ax in axes.ravel()[len(pairs):]:
            ax.set_visible(False)
        for ax, pair in zip(axes.ravel(), pairs):
            self._plot_pair(ax, joined, pair)
            self._customize_plot(ax, pair.metric, pair.performance)

        fig.tight_layout()
        atomic_write(path, lambda f: fig.savefig(
            f, format='png', facecolor=self._rgb_to_hex(self.chart_colors['background'])),
            mode='wb')
        plt.close(fig)
        logger.info("Saved correlation chart to %s", path)
        return path

    def _plot_pair(self, ax, joined, pair):
        data = joined[[pair.metric, pair.performance]].dropna()
        x = data[pair.metric].to_numpy(dtype=float)
        y = data[pair.performance].to_numpy(dtype=float)
        ax.scatter(x, y, color=self._rgb_to_hex(self.chart_colors['point']), s=36, zorder=3)
        if 'name' in joined.columns:
            for name, xi, yi in zip(joined.loc[data.index, 'name'], x, y):
                ax.annotate(str(name), (xi, yi), xytext=(4, 4), textcoords='offset points',
                            fontsize=7, color=self._rgb_to_hex(self.chart_colors['text']))

        if len(x) >= 2 and np.ptp(x) > 0:
            slope, intercept = np.polyfit(x, y, 1)
            xs = np.linspace(x.min(), x.max(), 50)
            ax.plot(xs, slope * xs + intercept, color=self._rgb_to_hex(self.chart_colors['fit']),
                    linewidth=2)

        label = 'r = n/a' if np.isnan(pair.pearson_r) else f"r = {pair.pearson_r:.3f}"
        ax.annotate(label, xy=(0.98, 0.95), xycoords='axes fraction', fontsize=11,
                    fontweight='bold', color=self._rgb_to_hex(self.chart_colors['fit']),
                    ha='right', va='top')

    def _customize_plot(self, ax, metric, performance):
        text = self._rgb_to_hex(self.chart_colors['text'])
        grid = self._rgb_to_hex(self.chart_colors['grid'])
        ax.set_facecolor(self._rgb_to_hex(self.chart_colors['background']))
        ax.grid(True, linestyle='--', alpha=0.3, color=grid)
        ax.spines['top'].set_visible(False)
        ax.spines['right'].set_visible(False)
        ax.spines['bottom'].set_color(grid)
        ax.spines['left'].set_color(grid)
        ax.tick_params(axis='x', colors=text)
        ax.tick_params(axis='y', colors=text)
        ax.set_xlabel(metric, color=text)
        ax.set_ylabel(performance, color=text)

    def _rgb_to_hex(self, rgb):
        """Convert RGB color to hex format for matplotlib"""
        return '#{:02x}{:02x}{:02x}'.format(rgb[0], rgb[1], rgb[2])
