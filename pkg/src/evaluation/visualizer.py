from pathlib import Path
from typing import Sequence, Union

import pandas as pd
import plotly.express as px
import plotly.graph_objects as go

from ..models import SweepResult

AXIS_TITLES = {"a": "a value (word noise)", "b": "b value (word-order noise)"}

TRANSLATION_SERIES = (("translation_l1_l2", "lang1→lang2"), ("translation_l2_l1", "lang2→lang1"))
AUTOENCODER_SERIES = (("autoencoder_l1", "lang1→lang1"), ("autoencoder_l2", "lang2→lang2"))


class SweepVisualizer:
    def __init__(self):
        self.color_palette = px.colors.qualitative.Set2

    def create_sweep_figure(self, results: Sequence[SweepResult]) -> go.Figure:
        """Translation BLEU solid, auto-encoder BLEU dashed, one colour per model and direction."""
        if not results:
            raise ValueError("no sweep results to plot")
        axis = results[0].axis

        fig = go.Figure()
        color = 0
        for result in results:
            for (column, direction), (ae_column, ae_direction) in zip(TRANSLATION_SERIES, AUTOENCODER_SERIES):
                line_color = self.color_palette[color % len(self.color_palette)]
                color += 1
                fig.add_trace(go.Scatter(
                    x=result.values, y=result.column(column),
                    mode='lines+markers',
                    name=f"{result.label} {direction}",
                    line=dict(width=2, color=line_color),
                    marker=dict(size=7)
                ))
                fig.add_trace(go.Scatter(
                    x=result.values, y=result.column(ae_column),
                    mode='lines+markers',
                    name=f"{result.label} {ae_direction}",
                    line=dict(width=2, color=line_color, dash='dash'),
                    marker=dict(size=7, symbol='diamond')
                ))

        fig.update_layout(
            title='BLEU under synthetic noise',
            xaxis_title=AXIS_TITLES.get(axis, axis),
            yaxis_title='BLEU',
            hovermode='x unified'
        )
        return fig

    def create_robustness_bars(self, table: pd.DataFrame, direction: str = "l1_l2") -> go.Figure:
        column = f"translation_{direction}"
        fig = px.bar(table, x='scenario', y=column, color='model', barmode='group',
                     title=f'Translation BLEU per noise scenario ({direction})',
                     labels={'scenario': 'Test condition', column: 'BLEU'})
        return fig


def sweep_figure(results: Sequence[SweepResult]) -> go.Figure:
    return SweepVisualizer().create_sweep_figure(results)


def write_figure(fig: go.Figure, path: Union[str, Path]) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fig.write_html(str(path), include_plotlyjs="cdn")
    return path
