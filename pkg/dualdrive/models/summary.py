from dataclasses import dataclass

from dualdrive.nn.spec import LayerKind, mac_count, param_count
from .builders import ModelSpec


@dataclass(frozen=True)
class SummaryRow:
    kind: str
    kernel: str
    stride: str
    output_channels: int
    params: int
    macs: int


@dataclass(frozen=True)
class ModelSummary:
    name: str
    rows: tuple[SummaryRow, ...]
    flatten_length: int

    @property
    def total(self) -> int:
        return sum(row.params for row in self.rows)

    @property
    def total_macs(self) -> int:
        return sum(row.macs for row in self.rows)


def summarize(spec: ModelSpec) -> ModelSummary:
    rows = []
    flatten_length = 0
    in_shape: tuple[int, ...] = spec.input_shape
    for layer, out_shape in zip(spec.layers, spec.layer_shapes()):
        has_kernel = layer.is_conv
        if layer.kind == LayerKind.FLATTEN:
            flatten_length = out_shape[0]
        rows.append(
            SummaryRow(
                kind=layer.kind.value,
                kernel="{}x{}".format(*layer.kernel) if has_kernel else "-",
                stride="{}x{}".format(*layer.stride) if has_kernel else "-",
                output_channels=out_shape[-1],
                params=param_count(layer),
                macs=mac_count(layer, in_shape),
            )
        )
        in_shape = out_shape

    return ModelSummary(name=spec.name, rows=tuple(rows), flatten_length=flatten_length)


def parameter_reduction(original: ModelSummary, modified: ModelSummary) -> float:
    return 1.0 - modified.total / original.total


_ROW = "{:<16} {:>6} {:>6} {:>7} {:>11}"


def summary_lines(summary: ModelSummary) -> list[str]:
    """Table-style rendering: one layer per line, then the totals."""
    lines = [_ROW.format("Layer", "Kernel", "Stride", "Output", "Parameters")]
    for row in summary.rows:
        lines.append(
            _ROW.format(
                row.kind, row.kernel, row.stride, row.output_channels, row.params
            )
        )
    lines.append(f"total: {summary.total}")
    lines.append(f"flatten: {summary.flatten_length}")
    lines.append(f"macs: {summary.total_macs}")
    return lines
