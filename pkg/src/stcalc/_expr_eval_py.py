"""Pure-Python stack machine for compiled scalar expressions.

Semantics are identical to the Cython kernel ``_expr_eval``; this module is
the import-time fallback and the baseline for benchmarking.  Opcode numbers
must stay in sync with ``exprs.py``.
"""

import cmath

OP_CONST = 0
OP_LOADX = 1
OP_LOADC = 2
OP_LOADCC = 3
OP_ADD = 4
OP_MUL = 5
OP_NEG = 6
OP_POW = 7
OP_SIN = 8
OP_COS = 9
OP_EXP = 10


def eval_program(codes, iargs, consts, env, stack):
    sp = 0
    for k in range(len(codes)):
        op = codes[k]
        arg = iargs[k]
        if op == OP_CONST:
            stack[sp] = consts[arg]
            sp += 1
        elif op == OP_LOADX or op == OP_LOADC:
            stack[sp] = env[arg]
            sp += 1
        elif op == OP_LOADCC:
            stack[sp] = env[arg].conjugate()
            sp += 1
        elif op == OP_ADD:
            sp -= 1
            stack[sp - 1] = stack[sp - 1] + stack[sp]
        elif op == OP_MUL:
            sp -= 1
            stack[sp - 1] = stack[sp - 1] * stack[sp]
        elif op == OP_NEG:
            stack[sp - 1] = -stack[sp - 1]
        elif op == OP_POW:
            v = complex(stack[sp - 1])
            m = -arg if arg < 0 else arg
            out = 1.0 + 0.0j
            while m:
                if m & 1:
                    out *= v
                v *= v
                m >>= 1
            stack[sp - 1] = 1.0 / out if arg < 0 else out
        elif op == OP_SIN:
            stack[sp - 1] = cmath.sin(complex(stack[sp - 1]))
        elif op == OP_COS:
            stack[sp - 1] = cmath.cos(complex(stack[sp - 1]))
        elif op == OP_EXP:
            stack[sp - 1] = cmath.exp(complex(stack[sp - 1]))
        else:
            raise ValueError(f"bad opcode {op}")
    return complex(stack[sp - 1])
