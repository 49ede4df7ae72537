"""Rename every user-defined identifier to v0, v1, ... by first occurrence.

Reads a program on stdin and writes the renamed program on stdout. The
mapping is flat and injective, so a name keeps one fresh spelling across the
whole file. Left untouched: builtin names, dunders, names bound by imports,
names bound directly in a class body (methods and class attributes reach
callers as attributes), and keyword-argument names at call sites. Programs
that touch dynamic-scope machinery (eval, exec, globals, locals, vars,
compile, __import__) pass through unchanged; a string-based lookup cannot
survive renaming. Unparseable input exits nonzero.
"""

import ast
import builtins
import sys

DYNAMIC = {"eval", "exec", "globals", "locals", "vars", "compile", "__import__"}
BUILTIN_NAMES = frozenset(dir(builtins))


class Survey(ast.NodeVisitor):
    """One pass over the tree: what is bound, and what must keep its name."""

    def __init__(self) -> None:
        self.bound: set[str] = set()
        self.imported: set[str] = set()
        self.kwarg_names: set[str] = set()
        self.class_members: set[str] = set()
        self.all_names: set[str] = set()
        self.uses_dynamic = False
        # (lineno, col, name) of every occurrence; sorted order = source order
        self.occurrences: list[tuple[int, int, str]] = []

    def _occur(self, node: ast.AST, name: str) -> None:
        self.all_names.add(name)
        self.occurrences.append((node.lineno, node.col_offset, name))

    def visit_Import(self, node: ast.Import) -> None:
        for alias in node.names:
            self.imported.add(alias.asname or alias.name.split(".")[0])

    def visit_ImportFrom(self, node: ast.ImportFrom) -> None:
        for alias in node.names:
            self.imported.add(alias.asname or alias.name)

    def visit_Name(self, node: ast.Name) -> None:
        self._occur(node, node.id)
        if node.id in DYNAMIC:
            self.uses_dynamic = True
        if isinstance(node.ctx, (ast.Store, ast.Del)):
            self.bound.add(node.id)

    def visit_arg(self, node: ast.arg) -> None:
        self._occur(node, node.arg)
        self.bound.add(node.arg)
        self.generic_visit(node)

    def _visit_def(self, node) -> None:
        self._occur(node, node.name)
        self.bound.add(node.name)
        self.generic_visit(node)

    visit_FunctionDef = _visit_def
    visit_AsyncFunctionDef = _visit_def

    def visit_ClassDef(self, node: ast.ClassDef) -> None:
        self._occur(node, node.name)
        self.bound.add(node.name)
        for stmt in node.body:
            if isinstance(stmt, (ast.FunctionDef, ast.AsyncFunctionDef)):
                self.class_members.add(stmt.name)
            elif isinstance(stmt, ast.Assign):
                for target in stmt.targets:
                    if isinstance(target, ast.Name):
                        self.class_members.add(target.id)
            elif isinstance(stmt, (ast.AnnAssign, ast.AugAssign)):
                if isinstance(stmt.target, ast.Name):
                    self.class_members.add(stmt.target.id)
        self.generic_visit(node)

    def _visit_scope_decl(self, node) -> None:
        for name in node.names:
            self._occur(node, name)
            self.bound.add(name)

    visit_Global = _visit_scope_decl
    visit_Nonlocal = _visit_scope_decl

    def visit_ExceptHandler(self, node: ast.ExceptHandler) -> None:
        if node.name:
            self._occur(node, node.name)
            self.bound.add(node.name)
        self.generic_visit(node)

    def visit_Call(self, node: ast.Call) -> None:
        for kw in node.keywords:
            if kw.arg:
                self.kwarg_names.add(kw.arg)
        self.generic_visit(node)


def build_mapping(survey: Survey) -> dict[str, str]:
    keep = (
        BUILTIN_NAMES
        | survey.imported
        | survey.kwarg_names
        | survey.class_members
        | {n for n in survey.bound if n.startswith("__") and n.endswith("__")}
    )
    renameable = survey.bound - keep
    mapping: dict[str, str] = {}
    counter = 0
    for _, _, name in sorted(survey.occurrences):
        if name not in renameable or name in mapping:
            continue
        fresh = f"v{counter}"
        while fresh in survey.all_names or fresh in BUILTIN_NAMES:
            counter += 1
            fresh = f"v{counter}"
        mapping[name] = fresh
        counter += 1
    return mapping


class Rename(ast.NodeTransformer):
    def __init__(self, mapping: dict[str, str]) -> None:
        self.mapping = mapping

    def visit_Name(self, node: ast.Name) -> ast.Name:
        if node.id in self.mapping:
            node.id = self.mapping[node.id]
        return node

    def visit_arg(self, node: ast.arg) -> ast.arg:
        if node.arg in self.mapping:
            node.arg = self.mapping[node.arg]
        self.generic_visit(node)
        return node

    def _visit_def(self, node):
        if node.name in self.mapping:
            node.name = self.mapping[node.name]
        self.generic_visit(node)
        return node

    visit_FunctionDef = _visit_def
    visit_AsyncFunctionDef = _visit_def
    visit_ClassDef = _visit_def

    def _visit_scope_decl(self, node):
        node.names = [self.mapping.get(n, n) for n in node.names]
        return node

    visit_Global = _visit_scope_decl
    visit_Nonlocal = _visit_scope_decl

    def visit_ExceptHandler(self, node: ast.ExceptHandler) -> ast.ExceptHandler:
        if node.name and node.name in self.mapping:
            node.name = self.mapping[node.name]
        self.generic_visit(node)
        return node


def main() -> int:
    source = sys.stdin.read()
    try:
        tree = ast.parse(source)
    except SyntaxError:
        return 1
    survey = Survey()
    survey.visit(tree)
    mapping = {} if survey.uses_dynamic else build_mapping(survey)
    if not mapping:
        sys.stdout.write(source)
        return 0
    sys.stdout.write(ast.unparse(Rename(mapping).visit(tree)) + "\n")
    return 0


if __name__ == "__main__":
    sys.exit(main())
