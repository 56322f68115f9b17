# Lattice reduction helpers (integer relations, simultaneous approximation)
import logging
from typing import List, Sequence

from sympy import QQ, ZZ
from sympy.polys.matrices import DomainMatrix

logger = logging.getLogger(__name__)

LLL_DELTA = QQ(3, 4)


def lll_reduce(rows: Sequence[Sequence[int]]) -> List[List[int]]:
    """
    LLL-reduces the lattice spanned by `rows` (linearly independent integer vectors).

    Returns:
        The reduced basis as rows of Python ints, shortest first (up to the LLL factor).
    """
    if not rows:
        return []
    shape = (len(rows), len(rows[0]))
    matrix = DomainMatrix([[ZZ(int(v)) for v in row] for row in rows], shape, ZZ)
    logger.debug(f"LLL reducing a {shape[0]}x{shape[1]} integer basis")
    reduced = matrix.lll(delta=LLL_DELTA)
    return [[int(v) for v in row] for row in reduced.to_Matrix().tolist()]


def relation_basis(scaled_values: Sequence[int]) -> List[List[int]]:
    """
    Standard relation-finding basis: row i is e_i followed by round(W * x_i).

    A short reduced row (c, sum_i c_i round(W x_i)) exposes an integer relation c . x ~= 0.
    """
    size = len(scaled_values)
    return [[1 if j == i else 0 for j in range(size)] + [int(scaled_values[i])] for i in range(size)]


def simultaneous_approximation_basis(scaled_steps: Sequence[int], scaled_targets: Sequence[int],
                                     scale: int, embedding: int) -> List[List[int]]:
    """
    Embedding basis for finding kappa, m_i with kappa * s_i - m_i - t_i ~= 0 for every i.

    Rows (dimension d + 2):
        (1, S s_1, ..., S s_d, 0)            -- multiples of kappa
        (0, ..., S, ..., 0)                  -- integer shifts m_i
        (0, -S t_1, ..., -S t_d, embedding)  -- target row
    Here scaled_steps[i] = round(S s_i) and scaled_targets[i] = round(S t_i).
    """
    d = len(scaled_steps)
    rows = [[1] + [int(v) for v in scaled_steps] + [0]]
    for i in range(d):
        rows.append([0] + [scale if j == i else 0 for j in range(d)] + [0])
    rows.append([0] + [-int(v) for v in scaled_targets] + [int(embedding)])
    return rows
