"""Vectorized float kernels for the numeric integration path.

Function expressions are compiled once into a flat postfix program, then
evaluated over large grids either by a pure-numpy stack machine or by a
numba-jitted per-element loop. The backend is chosen by the HYPERCALC_KERNEL
environment variable: "numpy", "numba", or "auto" (default: numba when
importable, numpy otherwise). Results agree up to floating-point reduction
order; exact-arithmetic paths never come through here.
"""

import os
from typing import NamedTuple

import numpy as np

from .errors import UnsupportedFormError
from .expressions import Add, Call, Const, Div, Mul, Neg, Node, Pow, Sub, Var

(
    OP_CONST,
    OP_X,
    OP_ADD,
    OP_SUB,
    OP_MUL,
    OP_DIV,
    OP_NEG,
    OP_POW,
    OP_EXP,
    OP_LN,
    OP_SIN,
    OP_COS,
    OP_SQRT,
    OP_ABS,
) = range(14)

_CALL_OPS = {
    "exp": OP_EXP,
    "ln": OP_LN,
    "sin": OP_SIN,
    "cos": OP_COS,
    "sqrt": OP_SQRT,
    "abs": OP_ABS,
}


class Program(NamedTuple):
    ops: np.ndarray    # int64 opcodes
    args: np.ndarray   # int64 operand per op (const index / exponent)
    consts: np.ndarray
    stack_need: int


def compile_program(node: Node) -> Program:
    ops, args, consts = [], [], []

    def emit(n):
        if isinstance(n, Const):
            ops.append(OP_CONST)
            args.append(len(consts))
            consts.append(float(n.value))
        elif isinstance(n, Var):
            ops.append(OP_X)
            args.append(0)
        elif isinstance(n, (Add, Sub, Mul, Div)):
            emit(n.left)
            emit(n.right)
            ops.append(
                {Add: OP_ADD, Sub: OP_SUB, Mul: OP_MUL, Div: OP_DIV}[type(n)]
            )
            args.append(0)
        elif isinstance(n, Neg):
            emit(n.operand)
            ops.append(OP_NEG)
            args.append(0)
        elif isinstance(n, Pow):
            emit(n.base)
            ops.append(OP_POW)
            args.append(n.exponent)
        elif isinstance(n, Call):
            emit(n.arg)
            ops.append(_CALL_OPS[n.func])
            args.append(0)
        else:
            raise UnsupportedFormError(
                f"{type(n).__name__} cannot be compiled to a grid kernel"
            )

    emit(node)
    depth = need = 0
    for op in ops:
        if op in (OP_CONST, OP_X):
            depth += 1
        elif op in (OP_ADD, OP_SUB, OP_MUL, OP_DIV):
            depth -= 1
        need = max(need, depth)
    return Program(
        np.asarray(ops, dtype=np.int64),
        np.asarray(args, dtype=np.int64),
        np.asarray(consts, dtype=np.float64),
        need,
    )


# -- numpy backend -----------------------------------------------------------

def _eval_numpy(prog: Program, xs: np.ndarray) -> np.ndarray:
    stack = []
    with np.errstate(all="ignore"):
        for op, arg in zip(prog.ops, prog.args):
            if op == OP_CONST:
                stack.append(np.full_like(xs, prog.consts[arg]))
            elif op == OP_X:
                stack.append(xs.astype(np.float64, copy=True))
            elif op == OP_ADD:
                b = stack.pop()
                stack[-1] = stack[-1] + b
            elif op == OP_SUB:
                b = stack.pop()
                stack[-1] = stack[-1] - b
            elif op == OP_MUL:
                b = stack.pop()
                stack[-1] = stack[-1] * b
            elif op == OP_DIV:
                b = stack.pop()
                stack[-1] = stack[-1] / b
            elif op == OP_NEG:
                stack[-1] = -stack[-1]
            elif op == OP_POW:
                stack[-1] = np.power(stack[-1], float(arg))
            elif op == OP_EXP:
                stack[-1] = np.exp(stack[-1])
            elif op == OP_LN:
                stack[-1] = np.log(stack[-1])
            elif op == OP_SIN:
                stack[-1] = np.sin(stack[-1])
            elif op == OP_COS:
                stack[-1] = np.cos(stack[-1])
            elif op == OP_SQRT:
                stack[-1] = np.sqrt(stack[-1])
            elif op == OP_ABS:
                stack[-1] = np.abs(stack[-1])
    return stack[0]


# -- numba backend -----------------------------------------------------------

_NUMBA_FUNCS = None


def _build_numba():
    global _NUMBA_FUNCS
    if _NUMBA_FUNCS is not None:
        return _NUMBA_FUNCS
    from numba import njit

    @njit(cache=True, error_model="numpy")
    def eval_scalar(ops, args, consts, x, stack):
        sp = 0
        for k in range(ops.size):
            op = ops[k]
            if op == 0:
                stack[sp] = consts[args[k]]
                sp += 1
            elif op == 1:
                stack[sp] = x
                sp += 1
            elif op == 2:
                stack[sp - 2] = stack[sp - 2] + stack[sp - 1]
                sp -= 1
            elif op == 3:
                stack[sp - 2] = stack[sp - 2] - stack[sp - 1]
                sp -= 1
            elif op == 4:
                stack[sp - 2] = stack[sp - 2] * stack[sp - 1]
                sp -= 1
            elif op == 5:
                stack[sp - 2] = stack[sp - 2] / stack[sp - 1]
                sp -= 1
            elif op == 6:
                stack[sp - 1] = -stack[sp - 1]
            elif op == 7:
                e = args[k]
                neg = e < 0
                if neg:
                    e = -e
                acc = 1.0
                base = stack[sp - 1]
                while e:
                    if e & 1:
                        acc *= base
                    base *= base
                    e >>= 1
                stack[sp - 1] = 1.0 / acc if neg else acc
            elif op == 8:
                stack[sp - 1] = np.exp(stack[sp - 1])
            elif op == 9:
                stack[sp - 1] = np.log(stack[sp - 1])
            elif op == 10:
                stack[sp - 1] = np.sin(stack[sp - 1])
            elif op == 11:
                stack[sp - 1] = np.cos(stack[sp - 1])
            elif op == 12:
                stack[sp - 1] = np.sqrt(stack[sp - 1])
            elif op == 13:
                stack[sp - 1] = np.abs(stack[sp - 1])
        return stack[0]

    @njit(cache=True, error_model="numpy")
    def grid(ops, args, consts, xs, stack_need):
        out = np.empty(xs.size, dtype=np.float64)
        stack = np.empty(stack_need, dtype=np.float64)
        for i in range(xs.size):
            out[i] = eval_scalar(ops, args, consts, xs[i], stack)
        return out

    @njit(cache=True, error_model="numpy")
    def cell_min_max(ops, args, consts, a, dx, n_cells, samples, stack_need):
        mins = np.empty(n_cells, dtype=np.float64)
        maxs = np.empty(n_cells, dtype=np.float64)
        stack = np.empty(stack_need, dtype=np.float64)
        sub = dx / samples
        for i in range(n_cells):
            lo = np.inf
            hi = -np.inf
            left = a + dx * i
            for s in range(samples + 1):
                v = eval_scalar(ops, args, consts, left + sub * s, stack)
                if v < lo:
                    lo = v
                if v > hi:
                    hi = v
            mins[i] = lo
            maxs[i] = hi
        return mins, maxs

    _NUMBA_FUNCS = (grid, cell_min_max)
    return _NUMBA_FUNCS


def backend_name() -> str:
    choice = os.environ.get("HYPERCALC_KERNEL", "auto").lower()
    if choice not in ("auto", "numpy", "numba"):
        raise ValueError("HYPERCALC_KERNEL must be auto, numpy, or numba")
    if choice == "numba" or choice == "auto":
        try:
            _build_numba()
            return "numba"
        except ImportError:
            if choice == "numba":
                raise
            return "numpy"
    return "numpy"


def grid_eval(prog: Program, xs: np.ndarray) -> np.ndarray:
    if backend_name() == "numba":
        grid, _ = _build_numba()
        return grid(prog.ops, prog.args, prog.consts, xs, prog.stack_need)
    return _eval_numpy(prog, xs)


def cell_min_max(prog: Program, a: float, dx: float, n_cells: int, samples: int):
    """Per-cell min and max of the compiled function over a regular grid of
    n_cells cells of width dx starting at a, each sampled at samples+1
    equally spaced points (both cell endpoints included)."""
    if backend_name() == "numba":
        _, fused = _build_numba()
        return fused(
            prog.ops, prog.args, prog.consts,
            float(a), float(dx), int(n_cells), int(samples), prog.stack_need,
        )
    xs = float(a) + float(dx) / samples * np.arange(n_cells * samples + 1)
    values = _eval_numpy(prog, xs)
    interior = values[:-1].reshape(n_cells, samples)
    rights = values[samples::samples]
    mins = np.minimum(interior.min(axis=1), rights)
    maxs = np.maximum(interior.max(axis=1), rights)
    return mins, maxs
