# cython: boundscheck=False, wraparound=False, cdivision=True, language_level=3
"""Cython stack machine for compiled scalar expressions.

Mirrors ``_expr_eval_py`` exactly (same opcodes, same integer-power
algorithm) so that the two kernels are interchangeable bit-for-bit up to
libm differences in the transcendentals.
"""

import numpy as np

cimport numpy as cnp

cdef extern from "complex.h" nogil:
    double complex csin(double complex)
    double complex ccos(double complex)
    double complex cexp(double complex)
    double complex conj(double complex)


def eval_program(cnp.int64_t[::1] codes, cnp.int64_t[::1] iargs,
                 double complex[::1] consts, double complex[::1] env,
                 double complex[::1] stack):
    cdef Py_ssize_t n = codes.shape[0]
    cdef Py_ssize_t k, sp = 0
    cdef long long op, arg, m
    cdef double complex v, acc

    for k in range(n):
        op = codes[k]
        arg = iargs[k]
        if op == 0:  # CONST
            stack[sp] = consts[arg]
            sp += 1
        elif op == 1 or op == 2:  # LOADX / LOADC
            stack[sp] = env[arg]
            sp += 1
        elif op == 3:  # LOADCC
            stack[sp] = conj(env[arg])
            sp += 1
        elif op == 4:  # ADD
            sp -= 1
            stack[sp - 1] = stack[sp - 1] + stack[sp]
        elif op == 5:  # MUL
            sp -= 1
            stack[sp - 1] = stack[sp - 1] * stack[sp]
        elif op == 6:  # NEG
            stack[sp - 1] = -stack[sp - 1]
        elif op == 7:  # POW (binary exponentiation, negative -> reciprocal)
            v = stack[sp - 1]
            m = -arg if arg < 0 else arg
            acc = 1.0
            while m:
                if m & 1:
                    acc = acc * v
                v = v * v
                m >>= 1
            stack[sp - 1] = 1.0 / acc if arg < 0 else acc
        elif op == 8:  # SIN
            stack[sp - 1] = csin(stack[sp - 1])
        elif op == 9:  # COS
            stack[sp - 1] = ccos(stack[sp - 1])
        elif op == 10:  # EXP
            stack[sp - 1] = cexp(stack[sp - 1])
        else:
            raise ValueError(f"bad opcode {op}")
    return complex(stack[sp - 1])
