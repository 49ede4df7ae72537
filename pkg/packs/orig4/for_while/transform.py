"""Rewrite counting for-loops over range() as explicit-cursor while-loops.

Reads a program on stdin and writes the rewritten program on stdout. A loop
is rewritten only when it can be proven equivalent: the target is a plain
name, the iterable is a direct range(...) call with one to three positional
arguments, the step is a nonzero integer literal, and the program never
rebinds the name range. Start and stop are captured into fresh variables
before the loop so they are evaluated exactly once, in range's order. The
cursor advances before the body runs, which keeps continue correct, and the
loop target is assigned from the cursor each pass, so body writes to it
cannot perturb iteration. break, loop-else, and the target's value after the
loop all behave as before. Everything else passes through; unparseable input
exits nonzero.
"""

import ast
import sys


def _literal_step(expr: ast.expr) -> int | None:
    if isinstance(expr, ast.Constant) and isinstance(expr.value, int) and not isinstance(expr.value, bool):
        return expr.value
    if (
        isinstance(expr, ast.UnaryOp)
        and isinstance(expr.op, ast.USub)
        and isinstance(expr.operand, ast.Constant)
        and isinstance(expr.operand.value, int)
        and not isinstance(expr.operand.value, bool)
    ):
        return -expr.operand.value
    return None


def _range_parts(node: ast.For) -> tuple[ast.expr, ast.expr, int] | None:
    """(start, stop, literal step) when the loop matches the safe pattern."""
    it = node.iter
    if not (
        isinstance(node.target, ast.Name)
        and isinstance(it, ast.Call)
        and isinstance(it.func, ast.Name)
        and it.func.id == "range"
        and not it.keywords
        and 1 <= len(it.args) <= 3
        and not any(isinstance(a, ast.Starred) for a in it.args)
    ):
        return None
    if len(it.args) == 1:
        start: ast.expr = ast.Constant(value=0)
        stop = it.args[0]
        step = 1
    elif len(it.args) == 2:
        start, stop = it.args
        step = 1
    else:
        start, stop = it.args[0], it.args[1]
        literal = _literal_step(it.args[2])
        if literal is None or literal == 0:
            return None
        step = literal
    return start, stop, step


class NameHarvest(ast.NodeVisitor):
    def __init__(self) -> None:
        self.names: set[str] = set()
        self.range_rebound = False

    def visit_Name(self, node: ast.Name) -> None:
        self.names.add(node.id)
        if node.id == "range" and isinstance(node.ctx, (ast.Store, ast.Del)):
            self.range_rebound = True

    def visit_arg(self, node: ast.arg) -> None:
        self.names.add(node.arg)
        if node.arg == "range":
            self.range_rebound = True
        self.generic_visit(node)

    def _visit_def(self, node):
        self.names.add(node.name)
        if node.name == "range":
            self.range_rebound = True
        self.generic_visit(node)

    visit_FunctionDef = _visit_def
    visit_AsyncFunctionDef = _visit_def
    visit_ClassDef = _visit_def


class Fresh:
    def __init__(self, taken: set[str]) -> None:
        self.taken = set(taken)
        self.counter = 0

    def name(self, tag: str) -> str:
        while True:
            candidate = f"_{tag}{self.counter}"
            self.counter += 1
            if candidate not in self.taken:
                self.taken.add(candidate)
                return candidate


class ForToWhile(ast.NodeTransformer):
    def __init__(self, fresh: Fresh) -> None:
        self.fresh = fresh
        self.rewrote = False

    def visit_For(self, node: ast.For):
        self.generic_visit(node)
        parts = _range_parts(node)
        if parts is None:
            return node
        start, stop, step = parts
        cursor = self.fresh.name("fw_i")
        bound = self.fresh.name("fw_stop")
        comparison = ast.Lt() if step > 0 else ast.Gt()
        step_expr: ast.expr = ast.Constant(value=abs(step))
        advance_op = ast.Add() if step > 0 else ast.Sub()
        loop = ast.While(
            test=ast.Compare(
                left=ast.Name(id=cursor, ctx=ast.Load()),
                ops=[comparison],
                comparators=[ast.Name(id=bound, ctx=ast.Load())],
            ),
            body=[
                ast.Assign(
                    targets=[node.target],
                    value=ast.Name(id=cursor, ctx=ast.Load()),
                ),
                ast.AugAssign(
                    target=ast.Name(id=cursor, ctx=ast.Store()),
                    op=advance_op,
                    value=step_expr,
                ),
                *node.body,
            ],
            orelse=node.orelse,
        )
        self.rewrote = True
        return [
            ast.Assign(targets=[ast.Name(id=cursor, ctx=ast.Store())], value=start),
            ast.Assign(targets=[ast.Name(id=bound, ctx=ast.Store())], value=stop),
            loop,
        ]


def main() -> int:
    source = sys.stdin.read()
    try:
        tree = ast.parse(source)
    except SyntaxError:
        return 1
    harvest = NameHarvest()
    harvest.visit(tree)
    if harvest.range_rebound:
        sys.stdout.write(source)
        return 0
    rewriter = ForToWhile(Fresh(harvest.names))
    tree = rewriter.visit(tree)
    if not rewriter.rewrote:
        sys.stdout.write(source)
        return 0
    ast.fix_missing_locations(tree)
    sys.stdout.write(ast.unparse(tree) + "\n")
    return 0


if __name__ == "__main__":
    sys.exit(main())
