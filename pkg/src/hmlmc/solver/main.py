"""SMT-LIB2 command-line front end (the ``hmlmc-smt`` executable).

Reads commands from stdin (incrementally — forms may span lines), executes
them against a :class:`~hmlmc.solver.api.SolverContext`, and prints
responses to stdout. The supported command set covers what an incremental
bounded-model-checking driver needs: declarations, assertions, push/pop,
check-sat, get-value and get-model, plus the usual administrative no-ops.

Errors are reported as ``(error "...")`` on stdout and do not abort the
session, matching standard solver behavior.
"""

from __future__ import annotations

import sys

from hmlmc.solver.api import SolverContext, SolverError
from hmlmc.solver.sexpr import SExprError, StreamReader, to_text


def _unquote(tok: str) -> str:
    if len(tok) >= 2 and tok.startswith('"') and tok.endswith('"'):
        return tok[1:-1].replace('""', '"')
    return tok


def _error(msg: str) -> str:
    return '(error "{}")'.format(msg.replace('"', "'"))


class Session:
    def __init__(self) -> None:
        self.ctx = SolverContext()
        self.done = False

    def execute(self, form) -> str | None:
        if not isinstance(form, list) or not form or not isinstance(form[0], str):
            return _error("malformed command")
        cmd, *args = form
        match cmd:
            case "set-logic" | "set-info":
                return None
            case "set-option":
                if len(args) == 2 and args[0] == ":timeout":
                    try:
                        self.ctx.timeout_ms = int(args[1])
                    except (TypeError, ValueError):
                        return _error("bad :timeout value")
                return None
            case "declare-const":
                if len(args) != 2 or not isinstance(args[0], str):
                    return _error("declare-const expects a name and a sort")
                return self._guard(
                    lambda: self.ctx.declare_const(args[0], args[1])
                )
            case "declare-fun":
                if (
                    len(args) != 3
                    or not isinstance(args[0], str)
                    or args[1] != []
                ):
                    return _error("only 0-ary declare-fun is supported")
                return self._guard(
                    lambda: self.ctx.declare_const(args[0], args[2])
                )
            case "define-fun":
                if (
                    len(args) != 4
                    or not isinstance(args[0], str)
                    or args[1] != []
                ):
                    return _error("only 0-ary define-fun is supported")
                return self._guard(lambda: self.ctx.define(args[0], args[3]))
            case "assert":
                if len(args) != 1:
                    return _error("assert expects one term")
                return self._guard(lambda: self.ctx.assert_term(args[0]))
            case "push" | "pop":
                n = 1
                if args:
                    try:
                        n = int(args[0])
                    except (TypeError, ValueError):
                        return _error(f"bad {cmd} argument")
                fn = self.ctx.push if cmd == "push" else self.ctx.pop
                return self._guard(lambda: fn(n))
            case "check-sat":
                try:
                    return self.ctx.check_sat()
                except SolverError as e:
                    return _error(str(e))
            case "get-value":
                if len(args) != 1 or not isinstance(args[0], list) or not args[0]:
                    return _error("get-value expects a term list")
                try:
                    pairs = [
                        f"({to_text(t)} {self.ctx.value_of(t)})" for t in args[0]
                    ]
                except SolverError as e:
                    return _error(str(e))
                return "(" + " ".join(pairs) + ")"
            case "get-model":
                try:
                    entries = self.ctx.model_entries()
                except SolverError as e:
                    return _error(str(e))
                lines = [
                    f"  (define-fun {n} () {s} {v})" for n, s, v in entries
                ]
                return "(\n" + "\n".join(lines) + "\n)"
            case "get-info":
                if args and args[0] == ":name":
                    return '(:name "hmlmc-smt")'
                if args and args[0] == ":version":
                    return '(:version "0.1.0")'
                return _error("unsupported get-info")
            case "echo":
                if len(args) != 1 or not isinstance(args[0], str):
                    return _error("echo expects a string")
                return _unquote(args[0])
            case "reset":
                self.ctx.reset()
                return None
            case "reset-assertions":
                self.ctx.reset()
                return None
            case "exit":
                self.done = True
                return None
            case _:
                return _error(f"unsupported command: {cmd}")

    def _guard(self, fn) -> str | None:
        try:
            fn()
            return None
        except SolverError as e:
            return _error(str(e))


def main() -> int:
    session = Session()
    reader = StreamReader()
    out = sys.stdout
    for line in sys.stdin:
        try:
            forms = reader.feed(line)
        except SExprError as e:
            print(_error(f"parse error: {e}"), file=out, flush=True)
            reader = StreamReader()
            continue
        for form in forms:
            try:
                reply = session.execute(form)
            except SExprError as e:
                reply = _error(str(e))
            except RecursionError:
                reply = _error("term nesting too deep")
            if reply is not None:
                print(reply, file=out, flush=True)
            if session.done:
                return 0
    return 0


if __name__ == "__main__":
    sys.exit(main())
