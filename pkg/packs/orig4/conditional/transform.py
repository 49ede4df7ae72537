"""Rewrite single-operator comparisons into negated complement form.

Reads a program on stdin and writes the rewritten program on stdout. Each
comparison with exactly one operator becomes the negation of its complement:
a < b turns into not (a >= b), x == y into not (x != y), k in s into
not (k not in s), and so on for >, <=, >=, !=, is, is not, not in. Chained
comparisons (a < b < c) have no single complement and stay untouched, as
does anything that is not a comparison. The complement identity assumes the
usual total-order semantics of the subject values; exotic operands with
partial orderings are outside the contract. Programs with no eligible
comparison pass through unchanged; unparseable input exits nonzero.
"""

import ast
import sys

COMPLEMENT = {
    ast.Lt: ast.GtE,
    ast.LtE: ast.Gt,
    ast.Gt: ast.LtE,
    ast.GtE: ast.Lt,
    ast.Eq: ast.NotEq,
    ast.NotEq: ast.Eq,
    ast.In: ast.NotIn,
    ast.NotIn: ast.In,
    ast.Is: ast.IsNot,
    ast.IsNot: ast.Is,
}


class Complement(ast.NodeTransformer):
    def __init__(self) -> None:
        self.rewrote = False

    def visit_Compare(self, node: ast.Compare):
        self.generic_visit(node)
        if len(node.ops) != 1:
            return node
        flipped = COMPLEMENT.get(type(node.ops[0]))
        if flipped is None:
            return node
        self.rewrote = True
        inner = ast.Compare(left=node.left, ops=[flipped()], comparators=node.comparators)
        return ast.UnaryOp(op=ast.Not(), operand=inner)


def main() -> int:
    source = sys.stdin.read()
    try:
        tree = ast.parse(source)
    except SyntaxError:
        return 1
    rewriter = Complement()
    tree = rewriter.visit(tree)
    if not rewriter.rewrote:
        sys.stdout.write(source)
        return 0
    ast.fix_missing_locations(tree)
    sys.stdout.write(ast.unparse(tree) + "\n")
    return 0


if __name__ == "__main__":
    sys.exit(main())
