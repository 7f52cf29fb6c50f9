"""Result tables.

``table`` is for people. ``delimited`` is tab-separated with one header
line, ``DELIMITED_HEADER``, whose columns are:

    method           attack type (OPT, Ra-R, ...)
    parameter        the method's knob, e.g. ``lambda=1``
    retained_scores  comma-separated win rates (mean returns on tree games)
                     of the retained seeds, or ``degraded``
    mean_score       mean of the retained scores
    attacked_steps   comma-separated mean attacked steps, one per attacked agent
    total_steps      mean episode length
    config_hash      sha256 of the canonical config text

Numbers are written with three decimals.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Literal, Sequence

from .records import RunRecord

logger = logging.getLogger(__name__)

ReportFormat = Literal['table', 'delimited']

COLUMNS = ('method', 'parameter', 'retained_scores', 'mean_score', 'attacked_steps', 'total_steps', 'config_hash')
DELIMITED_HEADER = '\t'.join(COLUMNS)
DEGRADED = 'degraded'


@dataclass(frozen=True)
class ReportRow:
    method: str
    parameter: str
    retained_scores: tuple[float, ...] | None
    mean_score: float | None
    attacked_steps: tuple[float, ...]
    total_steps: float | None
    config_hash: str


def _num(value: float) -> str:
    return f'{value:.3f}'


def row_of(record: RunRecord) -> ReportRow:
    aggregate = record.aggregate
    if record.degraded or aggregate is None:
        return ReportRow(record.method, record.parameter, None, None, (), None, record.config_hash)
    return ReportRow(
        method=record.method,
        parameter=record.parameter,
        retained_scores=tuple(aggregate.scores),
        mean_score=aggregate.mean_score,
        attacked_steps=tuple(aggregate.attacked_steps),
        total_steps=aggregate.mean_total_steps,
        config_hash=record.config_hash,
    )


def _delimited_line(row: ReportRow) -> str:
    if row.retained_scores is None:
        return '\t'.join((row.method, row.parameter, DEGRADED, '', '', '', row.config_hash))
    return '\t'.join((
        row.method,
        row.parameter,
        ','.join(_num(s) for s in row.retained_scores),
        _num(row.mean_score),
        ','.join(_num(s) for s in row.attacked_steps),
        _num(row.total_steps),
        row.config_hash,
    ))


def _table(rows: list[ReportRow]) -> str:
    header = ('Attack type', 'Parameter', 'Winning rate', 'Attacked steps / Total steps')
    body = []
    for row in rows:
        if row.retained_scores is None:
            body.append((row.method, row.parameter, DEGRADED, ''))
            continue
        steps = ', '.join(f'{_num(s)} / {_num(row.total_steps)}' for s in row.attacked_steps)
        scores = ' '.join(_num(s) for s in row.retained_scores) + f' (mean {_num(row.mean_score)})'
        body.append((row.method, row.parameter, scores, steps))
    widths = [max(len(line[i]) for line in [header, *body]) for i in range(len(header))]
    lines = [' | '.join(cell.ljust(width) for cell, width in zip(line, widths)).rstrip() for line in [header, *body]]
    lines.insert(1, '-+-'.join('-' * width for width in widths))
    return '\n'.join(lines) + '\n'


def emit_report(records: Sequence[RunRecord], format: ReportFormat = 'table') -> str:
    rows = [row_of(record) for record in records]
    logger.debug('report of %d records as %s', len(rows), format)
    if format == 'delimited':
        return '\n'.join([DELIMITED_HEADER, *(_delimited_line(row) for row in rows)]) + '\n'
    return _table(rows)


def _floats(cell: str) -> tuple[float, ...]:
    return tuple(float(part) for part in cell.split(',') if part)


def parse_report(text: str) -> list[ReportRow]:
    lines = [line for line in text.splitlines() if line]
    if not lines or lines[0] != DELIMITED_HEADER:
        raise ValueError('not a delimited report')
    rows = []
    for line in lines[1:]:
        method, parameter, scores, mean, steps, total, digest = line.split('\t')
        if scores == DEGRADED:
            rows.append(ReportRow(method, parameter, None, None, (), None, digest))
        else:
            rows.append(ReportRow(method, parameter, _floats(scores), float(mean), _floats(steps), float(total), digest))
    return rows
