"""Negate the test of every two-branch conditional and swap its branches.

Reads a program on stdin and writes the rewritten program on stdout. Both
statement conditionals (if/else, including the implicit else of an elif
chain) and conditional expressions (a if c else b) are flipped; one-branch
if-statements stay as they are. The rewrite wraps the old test in not(...),
so a second application is semantically equivalent to the original without
being byte-identical. Programs with nothing to flip pass through unchanged;
unparseable input exits nonzero.
"""

import ast
import sys


def _negate(test: ast.expr) -> ast.expr:
    return ast.UnaryOp(op=ast.Not(), operand=test)


class Flip(ast.NodeTransformer):
    def __init__(self) -> None:
        self.rewrote = False

    def visit_If(self, node: ast.If):
        self.generic_visit(node)
        if not node.orelse:
            return node
        self.rewrote = True
        return ast.If(test=_negate(node.test), body=node.orelse, orelse=node.body)

    def visit_IfExp(self, node: ast.IfExp):
        self.generic_visit(node)
        self.rewrote = True
        return ast.IfExp(test=_negate(node.test), body=node.orelse, orelse=node.body)


def main() -> int:
    source = sys.stdin.read()
    try:
        tree = ast.parse(source)
    except SyntaxError:
        return 1
    flipper = Flip()
    tree = flipper.visit(tree)
    if not flipper.rewrote:
        sys.stdout.write(source)
        return 0
    ast.fix_missing_locations(tree)
    sys.stdout.write(ast.unparse(tree) + "\n")
    return 0


if __name__ == "__main__":
    sys.exit(main())
