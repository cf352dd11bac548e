"""Minimal arithmetic expressions in one variable, compiled to numpy callables.

Grammar: numbers, `pi`, the variable name, + - * / with the usual precedence,
unary minus, parentheses, and sin(...). Division by zero yields +-inf, which
downstream code treats as a boundary marker.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

__all__ = ["SymFn", "parse_symfn"]


@dataclass(frozen=True)
class SymFn:
    text: str
    var: str
    _fn: Callable

    def __call__(self, x):
        scalar = np.isscalar(x)
        arr = np.asarray(x, dtype=float)
        with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
            out = self._fn(arr)
        out = np.broadcast_to(np.asarray(out, dtype=float), arr.shape).copy()
        return float(out) if scalar else out

    def __repr__(self):
        return f"SymFn({self.text!r})"


def _tokenize(text: str):
    tokens = []
    i = 0
    while i < len(text):
        ch = text[i]
        if ch.isspace():
            i += 1
            continue
        if ch in "+-*/()":
            tokens.append(ch)
            i += 1
            continue
        if ch.isdigit() or ch == ".":
            j = i
            while j < len(text) and (text[j].isdigit() or text[j] in ".eE"
                                     or (text[j] in "+-" and text[j - 1] in "eE")):
                j += 1
            tokens.append(("num", float(text[i:j])))
            i = j
            continue
        if ch.isalpha() or ch == "_":
            j = i
            while j < len(text) and (text[j].isalnum() or text[j] == "_"):
                j += 1
            tokens.append(("name", text[i:j]))
            i = j
            continue
        raise ValueError(f"unexpected character {ch!r} in {text!r}")
    return tokens


def parse_symfn(text: str, var: str = "t") -> SymFn:
    tokens = _tokenize(text)
    pos = 0

    def peek():
        return tokens[pos] if pos < len(tokens) else None

    def take():
        nonlocal pos
        tok = tokens[pos]
        pos += 1
        return tok

    def expr():
        node = term()
        while peek() in ("+", "-"):
            op = take()
            rhs = term()
            node = (lambda a, b: (lambda x: a(x) + b(x)))(node, rhs) if op == "+" \
                else (lambda a, b: (lambda x: a(x) - b(x)))(node, rhs)
        return node

    def term():
        node = unary()
        while peek() in ("*", "/"):
            op = take()
            rhs = unary()
            node = (lambda a, b: (lambda x: a(x) * b(x)))(node, rhs) if op == "*" \
                else (lambda a, b: (lambda x: a(x) / b(x)))(node, rhs)
        return node

    def unary():
        if peek() == "-":
            take()
            inner = unary()
            return lambda x: -inner(x)
        return atom()

    def atom():
        tok = take()
        if tok == "(":
            node = expr()
            if take() != ")":
                raise ValueError("missing closing parenthesis")
            return node
        if isinstance(tok, tuple) and tok[0] == "num":
            val = tok[1]
            return lambda x: np.full_like(np.asarray(x, dtype=float), val)
        if isinstance(tok, tuple) and tok[0] == "name":
            name = tok[1]
            if name == "pi":
                return lambda x: np.full_like(np.asarray(x, dtype=float), math.pi)
            if name == "sin":
                if take() != "(":
                    raise ValueError("sin expects parentheses")
                inner = expr()
                if take() != ")":
                    raise ValueError("missing closing parenthesis")
                return lambda x: np.sin(inner(x))
            if name == var:
                return lambda x: np.asarray(x, dtype=float)
            raise ValueError(f"unknown name {name!r} (variable is {var!r})")
        raise ValueError(f"unexpected token {tok!r}")

    try:
        fn = expr()
    except IndexError:
        raise ValueError("unexpected end of expression") from None
    if pos != len(tokens):
        raise ValueError("trailing tokens")
    return SymFn(text=text, var=var, _fn=fn)
