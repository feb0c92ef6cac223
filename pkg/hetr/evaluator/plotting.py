"""Envelope plots of trajectory ensembles."""
import numpy as np
import pandas as pd
from hetr.models.base import quantile_envelope

try:
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt
except Exception:
    _has_matplotlib = False
else:
    _has_matplotlib = True


def envelope_frame(ensemble, probs=(0.025, 0.975), observed=None):
    """Mean, chosen quantiles and (optionally) what was observed, per projected day."""
    env = quantile_envelope(ensemble, probs)
    env.columns = [f"q{p:g}" for p in probs]
    plot_df = pd.concat([ensemble.mean().rename('mean'), env], axis=1)
    if observed is not None:
        values = observed.values if hasattr(observed, 'incidence') else np.asarray(observed)
        plot_df['observed'] = np.asarray(values, dtype=float)[: ensemble.horizon]
    plot_df.index = ensemble.forecast_index()
    return plot_df


def plot_envelope(plot_df: pd.DataFrame, path: str, title: str = None, **kwargs):
    """Write an SVG of an envelope_frame, identical bytes for identical input.

    Args:
        plot_df (pd.DataFrame): output of envelope_frame
        path (str): target file
        title (str): figure title
        **kwargs passed to pd.DataFrame.plot()
    """
    if not _has_matplotlib:
        raise ImportError("Package matplotlib is required for plots")
    with matplotlib.rc_context({'svg.hashsalt': 'hetr', 'svg.fonttype': 'none'}):
        fig, ax = plt.subplots(figsize=(8, 4.5))
        quantile_cols = [c for c in plot_df.columns if c.startswith('q')]
        if len(quantile_cols) >= 2:
            ax.fill_between(
                range(len(plot_df)),
                plot_df[quantile_cols[0]],
                plot_df[quantile_cols[-1]],
                alpha=0.25,
                label=f"{quantile_cols[0]}-{quantile_cols[-1]}",
            )
        plot_df = plot_df.reset_index(drop=True)
        plot_df.plot(ax=ax, **kwargs)
        ax.set_xlabel('day')
        ax.set_ylabel('daily cases')
        if title:
            ax.set_title(title)
        fig.savefig(path, format='svg', metadata={'Date': None})
        plt.close(fig)
    return path
