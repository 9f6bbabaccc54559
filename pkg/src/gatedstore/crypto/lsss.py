"""Monotone boolean policies and their linear secret-sharing form.

Grammar (whitespace-insensitive, attribute names case-sensitive)::

    formula := term ('OR' term)*
    term    := factor ('AND' factor)*
    factor  := ATTR | '(' formula ')'
    ATTR    := [A-Za-z0-9_]+          (AND / OR are reserved words)

A parsed formula can be evaluated directly against an attribute set, or
converted into a share-generating matrix via the Lewko-Waters construction:
the root is labeled (1); an OR gate copies its label to both children; an
AND gate with label v hands one child v|1 and the other (0^c)|-1, growing
the vector length by one.  Leaf labels, padded to the final length, become
the matrix rows.  Rows are emitted in depth-first formula order, which is
deterministic; among rows usable for reconstruction, candidates are
considered in (attribute, row-index) lexicographic order.
"""

from __future__ import annotations

import re
from dataclasses import dataclass

from ..errors import PolicySyntaxError

_TOKEN_RE = re.compile(r"[A-Za-z0-9_]+|\(|\)")
_RESERVED = {"AND", "OR"}


@dataclass(frozen=True)
class Node:
    op: str  # "attr" | "and" | "or"
    attr: str | None = None
    children: tuple["Node", ...] = ()


def tokenize(formula: str) -> list[str]:
    tokens = []
    pos = 0
    for m in _TOKEN_RE.finditer(formula):
        if formula[pos : m.start()].strip():
            raise PolicySyntaxError(f"illegal characters near {formula[pos:m.start()]!r}")
        tokens.append(m.group())
        pos = m.end()
    if formula[pos:].strip():
        raise PolicySyntaxError(f"illegal trailing characters {formula[pos:]!r}")
    return tokens


class _Parser:
    def __init__(self, tokens: list[str]):
        self.tokens = tokens
        self.i = 0

    def peek(self) -> str | None:
        return self.tokens[self.i] if self.i < len(self.tokens) else None

    def take(self) -> str:
        tok = self.peek()
        if tok is None:
            raise PolicySyntaxError("unexpected end of formula")
        self.i += 1
        return tok

    def formula(self) -> Node:
        terms = [self.term()]
        while self.peek() == "OR":
            self.take()
            terms.append(self.term())
        return terms[0] if len(terms) == 1 else Node("or", children=tuple(terms))

    def term(self) -> Node:
        factors = [self.factor()]
        while self.peek() == "AND":
            self.take()
            factors.append(self.factor())
        return factors[0] if len(factors) == 1 else Node("and", children=tuple(factors))

    def factor(self) -> Node:
        tok = self.take()
        if tok == "(":
            node = self.formula()
            if self.take() != ")":
                raise PolicySyntaxError("expected ')'")
            return node
        if tok == ")" or tok in _RESERVED:
            raise PolicySyntaxError(f"unexpected token {tok!r}")
        return Node("attr", attr=tok)


def parse_formula(formula: str) -> Node:
    if not formula or not formula.strip():
        raise PolicySyntaxError("empty formula")
    parser = _Parser(tokenize(formula))
    node = parser.formula()
    if parser.peek() is not None:
        raise PolicySyntaxError(f"unexpected token {parser.peek()!r}")
    return node


def evaluate(node: Node, attrs: frozenset[str] | set[str]) -> bool:
    """Brute-force boolean evaluation; the independent oracle for the
    share-matrix path."""
    if node.op == "attr":
        return node.attr in attrs
    if node.op == "and":
        return all(evaluate(c, attrs) for c in node.children)
    return any(evaluate(c, attrs) for c in node.children)


def formula_attrs(node: Node) -> frozenset[str]:
    if node.op == "attr":
        return frozenset([node.attr])
    out: set[str] = set()
    for c in node.children:
        out |= formula_attrs(c)
    return frozenset(out)


@dataclass(frozen=True)
class ShareMatrix:
    """rows[i] is the share-generating vector for row_attrs[i]; a set S of
    attributes is authorized iff (1,0,...,0) lies in the span of the rows
    whose attribute is in S."""

    rows: tuple[tuple[int, ...], ...]
    row_attrs: tuple[str, ...]
    width: int


def to_share_matrix(node: Node) -> ShareMatrix:
    rows: list[tuple[list[int], str]] = []
    counter = 1

    def walk(n: Node, label: list[int]) -> None:
        nonlocal counter
        if n.op == "attr":
            rows.append((label, n.attr))
            return
        if n.op == "or":
            for c in n.children:
                walk(c, list(label))
            return
        # n-ary AND is a chain of binary ANDs: peel children left to right.
        current = label
        for c in n.children[:-1]:
            padded = current + [0] * (counter - len(current))
            left = padded + [1]
            right = [0] * counter + [-1]
            counter += 1
            walk(c, left)
            current = right
        walk(n.children[-1], current)

    walk(node, [1])
    width = counter
    padded_rows = tuple(tuple(r + [0] * (width - len(r))) for r, _ in rows)
    return ShareMatrix(rows=padded_rows, row_attrs=tuple(a for _, a in rows), width=width)


def reconstruction_coefficients(
    matrix: ShareMatrix, attrs: frozenset[str] | set[str], modulus: int
) -> dict[int, int] | None:
    """Coefficients w with sum_i w_i * rows[i] = (1,0,...,0) using only rows
    whose attribute is in ``attrs``; None when the set is not authorized."""
    usable = [i for i in range(len(matrix.rows)) if matrix.row_attrs[i] in attrs]
    usable.sort(key=lambda i: (matrix.row_attrs[i], i))
    if not usable:
        return None

    # Solve A^T w = e1 by Gaussian elimination over Z_modulus on the
    # augmented system of column equations.
    n_eq = matrix.width
    n_var = len(usable)
    aug = [[matrix.rows[i][c] % modulus for i in usable] for c in range(n_eq)]
    rhs = [1] + [0] * (n_eq - 1)

    pivot_of_col: list[int | None] = [None] * n_var
    row = 0
    for col in range(n_var):
        sel = None
        for r in range(row, n_eq):
            if aug[r][col] % modulus != 0:
                sel = r
                break
        if sel is None:
            continue
        aug[row], aug[sel] = aug[sel], aug[row]
        rhs[row], rhs[sel] = rhs[sel], rhs[row]
        inv = pow(aug[row][col], modulus - 2, modulus)
        aug[row] = [(v * inv) % modulus for v in aug[row]]
        rhs[row] = (rhs[row] * inv) % modulus
        for r in range(n_eq):
            if r != row and aug[r][col] % modulus != 0:
                factor = aug[r][col]
                aug[r] = [(a - factor * b) % modulus for a, b in zip(aug[r], aug[row])]
                rhs[r] = (rhs[r] - factor * rhs[row]) % modulus
        pivot_of_col[col] = row
        row += 1

    # Inconsistent system -> not authorized.
    for r in range(row, n_eq):
        if rhs[r] % modulus != 0:
            return None

    w = [0] * n_var
    for col in range(n_var):
        pr = pivot_of_col[col]
        if pr is not None:
            w[col] = rhs[pr]
    coeffs = {usable[j]: w[j] % modulus for j in range(n_var) if w[j] % modulus != 0}
    # Free variables default to zero; when every coefficient is zero the
    # target e1 cannot be hit (it is nonzero), so treat as unauthorized.
    if not coeffs:
        return None
    return coeffs
