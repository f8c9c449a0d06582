"""CSV and JSON output of experiment results."""

import json
import logging
import os
from typing import Any, Dict, List, Optional, Sequence

import numpy as np
import pandas as pd

from config.settings import settings

logger = logging.getLogger(__name__)

FLOAT_FORMAT = '%.17g'

NORMALIZATION_NOTE = (
    "eigenfunctions aligned so that <u_h, u>_L2h > 0 and |u_h|_L2h = |u|_L2h"
)


def _format_value(value: Any) -> str:
    if isinstance(value, float):
        return f"{value:.17g}"
    if isinstance(value, (list, tuple)):
        return '[' + ', '.join(_format_value(v) for v in value) + ']'
    return str(value)


class ReportWriter:
    """Writes tables with a ``#`` provenance header below an output directory."""

    def __init__(self, output_dir: str = None):
        """Initialize report writer.

        Args:
            output_dir: Directory for relative paths (defaults to settings.OUTPUT_DIR)
        """
        self.output_dir = output_dir or settings.OUTPUT_DIR

    def resolve(self, path: str) -> str:
        full = path if os.path.isabs(path) else os.path.join(self.output_dir, path)
        directory = os.path.dirname(full)
        if directory:
            os.makedirs(directory, exist_ok=True)
        return full

    @staticmethod
    def header_lines(sections: Dict[str, Dict[str, Any]]) -> List[str]:
        """``# section.key = value`` lines in insertion order."""
        lines = []
        for section, values in sections.items():
            for key, value in values.items():
                lines.append(f"# {section}.{key} = {_format_value(value)}")
        return lines

    def write_table(
        self,
        rows: Sequence[Dict[str, Any]],
        path: str,
        header: Optional[Dict[str, Dict[str, Any]]] = None,
        columns: Optional[Sequence[str]] = None,
    ) -> str:
        """Write rows as CSV, preceded by the provenance header.

        Returns:
            Path of the written file
        """
        df = pd.DataFrame(list(rows), columns=list(columns) if columns else None)
        full = self.resolve(path)
        with open(full, 'w', newline='') as handle:
            for line in self.header_lines(header or {}):
                handle.write(line + '\n')
            df.to_csv(handle, index=False, float_format=FLOAT_FORMAT)
        logger.info(f"Wrote {len(df)} rows to {full}")
        return full

    def write_geometry(self, geometry_dict: Dict[str, Any], path: str) -> Dict[str, str]:
        """Geometry as JSON plus a CSV of the control net next to it."""
        base, _ = os.path.splitext(path)
        json_path = self.resolve(base + '.json')
        with open(json_path, 'w') as handle:
            json.dump(geometry_dict, handle, indent=2)

        points = np.asarray(geometry_dict['control_points'])
        weighted = np.asarray(geometry_dict['weighted_control_points'])
        n1, n2 = geometry_dict['shape']
        flat = np.arange(points.shape[0])
        net = pd.DataFrame({
            'index': flat,
            'i1': flat % n1,
            'i2': flat // n1,
            'x': points[:, 0],
            'y': points[:, 1],
            'weight': geometry_dict['weights'],
            'wx': weighted[:, 0],
            'wy': weighted[:, 1],
        })
        csv_path = self.write_table(net.to_dict('records'), base + '.csv',
                                    header={'geometry': {'omega': geometry_dict['omega'],
                                                         'n_arc': geometry_dict['n_arc']}},
                                    columns=list(net.columns))
        logger.info(f"Wrote geometry to {json_path}")
        return {'json': json_path, 'csv': csv_path}

    def write_matrix(self, matrix, path: str) -> str:
        """Sparse matrix as ``row col value`` lines, zero-based."""
        coo = matrix.tocoo()
        order = np.lexsort((coo.col, coo.row))
        df = pd.DataFrame({
            'row': coo.row[order],
            'col': coo.col[order],
            'value': coo.data[order],
        })
        full = self.resolve(path)
        df.to_csv(full, sep=' ', index=False, header=False, float_format=FLOAT_FORMAT)
        logger.info(f"Wrote {coo.shape[0]}x{coo.shape[1]} matrix with {coo.nnz} entries to {full}")
        return full


def read_table(path: str) -> pd.DataFrame:
    """Read a table written by ReportWriter, skipping the header."""
    return pd.read_csv(path, comment='#')


# Create a singleton instance
report_writer = ReportWriter()
