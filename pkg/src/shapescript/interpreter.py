"""Tree-walking interpreter for ShapeScript bodies, programs, and samplers."""

from __future__ import annotations

import math
import random
from dataclasses import dataclass, field

from . import ast
from .ast import snap_float
from .errors import ExecError
from .model import CoordFrame, ExecLimits, Execution, Part


def group_parts(parts: list[Part]) -> CoordFrame:
    """Tightest axis-aligned frame containing every corner of every part."""
    if not parts:
        raise ExecError("group_parts called on an empty part list", code="EmptyGroup")
    los = [p.lo() for p in parts]
    his = [p.hi() for p in parts]
    lo = tuple(min(v[i] for v in los) for i in range(3))
    hi = tuple(max(v[i] for v in his) for i in range(3))
    center = tuple((a + b) / 2 for a, b in zip(lo, hi))
    dims = tuple(max(b - a, 1e-9) for a, b in zip(lo, hi))
    return CoordFrame(center, dims)


def _split_stream(seed: int, index: int) -> random.Random:
    # splitmix64-style mix so per-statement streams are independent of each other
    z = (seed + 0x9E3779B97F4A7C15 * (index + 1)) & 0xFFFFFFFFFFFFFFFF
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & 0xFFFFFFFFFFFFFFFF
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & 0xFFFFFFFFFFFFFFFF
    return random.Random(z ^ (z >> 31))


@dataclass
class _Ctx:
    lib: ast.Library
    limits: ExecLimits
    rng: random.Random | None = None
    steps: int = 0
    call_stack: list[str] = field(default_factory=list)
    flags: list[str] = field(default_factory=list)
    trace: list[ast.ProgStmt] | None = None  # set when recording a sampler run
    trace_parts: list[list[Part]] | None = None

    def tick(self):
        self.steps += 1
        if self.steps > self.limits.max_steps:
            raise ExecError("execution step limit exceeded", code="StepLimitExceeded")

    def draw(self) -> random.Random:
        if self.rng is None:
            raise ExecError("random builtin used in a deterministic context", code="RandomInDeterministic")
        return self.rng


class _ReturnSignal(Exception):
    def __init__(self, value):
        self.value = value


def _require_number(value, what: str) -> float:
    t = type(value)
    if t is float:
        if not math.isfinite(value):
            raise ExecError(f"{what} produced a non-finite value", code="NonFiniteValue")
        return value
    if t is int:
        return value
    raise ExecError(f"{what} expects a number, got {type(value).__name__}")


def _make_part(frame: CoordFrame, label: str = "") -> Part:
    return Part(label, frame.dims, frame.center)


def _frame_attr(frame: CoordFrame, name: str) -> float:
    w, h, d = frame.dims
    x, y, z = frame.center
    return {"w": w, "h": h, "d": d, "x": x, "y": y, "z": z}[name]


def _eval(expr: ast.Expr, env: dict, ctx: _Ctx):
    # Dispatch on exact class identity: AST nodes are never subclassed, and
    # this path dominates sampler-driven search, so it is kept branch-cheap.
    cls = type(expr)
    if cls is ast.Num or cls is ast.BoolLit or cls is ast.Str:
        return expr.value
    if cls is ast.Var:
        try:
            return env[expr.name]
        except KeyError:
            raise ExecError(f"undefined variable {expr.name!r}", code="UndefinedVariable") from None
    if cls is ast.BinOp:
        return _eval_binop(expr, env, ctx)
    if cls is ast.Attr:
        base = _eval(expr.base, env, ctx)
        if type(base) is not CoordFrame:
            raise ExecError(f"attribute {expr.name!r} requires a frame value")
        return _frame_attr(base, expr.name)
    if cls is ast.CallExpr:
        return _eval_call(expr, env, ctx)
    if cls is ast.ListLit:
        return [_eval(item, env, ctx) for item in expr.items]
    if cls is ast.UnOp:
        value = _eval(expr.operand, env, ctx)
        if expr.op == "not":
            if not isinstance(value, bool):
                raise ExecError("'not' expects a boolean")
            return not value
        return -_require_number(value, "unary minus")
    raise ExecError(f"cannot evaluate {cls.__name__}")


def _eval_binop(expr: ast.BinOp, env: dict, ctx: _Ctx):
    op = expr.op
    if op == "and":
        left = _eval(expr.left, env, ctx)
        if not isinstance(left, bool):
            raise ExecError("'and' expects booleans")
        return left and _eval(expr.right, env, ctx)
    if op == "or":
        left = _eval(expr.left, env, ctx)
        if not isinstance(left, bool):
            raise ExecError("'or' expects booleans")
        return left or _eval(expr.right, env, ctx)
    left = _eval(expr.left, env, ctx)
    right = _eval(expr.right, env, ctx)
    if op == "==":
        return left == right
    if op == "!=":
        return left != right
    if op == "<" or op == "<=" or op == ">" or op == ">=":
        a = _require_number(left, op)
        b = _require_number(right, op)
        if op == "<":
            return a < b
        if op == "<=":
            return a <= b
        if op == ">":
            return a > b
        return a >= b
    if op == "+" and type(left) is list and type(right) is list:
        return left + right
    a = _require_number(left, op)
    b = _require_number(right, op)
    if op == "*":
        result = a * b
    elif op == "+":
        result = a + b
    elif op == "-":
        result = a - b
    elif op == "/":
        if b == 0:
            raise ExecError("division by zero", code="NonFiniteValue")
        result = a / b
    elif op == "%":
        if b == 0:
            raise ExecError("modulo by zero", code="NonFiniteValue")
        result = a % b
    else:
        raise ExecError(f"unknown operator {op}")
    if type(result) is float and not math.isfinite(result):
        raise ExecError("arithmetic produced a non-finite value", code="NonFiniteValue")
    return result


def _as_int(value, what: str) -> int:
    value = _require_number(value, what)
    if isinstance(value, float):
        if value != int(value):
            raise ExecError(f"{what} expects an integer, got {value}")
        value = int(value)
    return value


def _b_frame(args, ctx):
    if len(args) != 6:
        raise ExecError("frame expects 6 arguments")
    w, h, d, x, y, z = (_require_number(a, "frame") for a in args)
    if min(w, h, d) <= 0:
        raise ExecError(f"frame dims must be positive, got ({w}, {h}, {d})", code="NonPositiveDims")
    return CoordFrame((x, y, z), (w, h, d))


def _b_part(args, ctx):
    if len(args) != 6:
        raise ExecError("part expects 6 arguments")
    w, h, d, x, y, z = (_require_number(a, "part") for a in args)
    if min(w, h, d) <= 0:
        raise ExecError(f"part dims must be positive, got ({w}, {h}, {d})", code="NonPositiveDims")
    return Part("", (w, h, d), (x, y, z))


def _b_make_part(args, ctx):
    if len(args) != 2 or not isinstance(args[0], CoordFrame) or not isinstance(args[1], str):
        raise ExecError("make_part expects (frame, label)")
    part = _make_part(_snap_frame(args[0]), args[1])
    if ctx.trace is not None and len(ctx.call_stack) == 1:
        ctx.trace.append(ast.MakePart(_frame_lit(part_frame(part)), args[1]))
        ctx.trace_parts.append([part])
    return [part]


def _b_group_parts(args, ctx):
    if len(args) != 1 or not isinstance(args[0], list):
        raise ExecError("group_parts expects a part list")
    if not all(isinstance(p, Part) for p in args[0]):
        raise ExecError("group_parts expects a part list")
    return group_parts(args[0])


def _b_len(args, ctx):
    if len(args) != 1 or not isinstance(args[0], list):
        raise ExecError("len expects a list")
    return len(args[0])


def _b_min(args, ctx):
    if len(args) < 2:
        raise ExecError("min expects at least 2 arguments")
    return min(_require_number(a, "min") for a in args)


def _b_max(args, ctx):
    if len(args) < 2:
        raise ExecError("max expects at least 2 arguments")
    return max(_require_number(a, "max") for a in args)


def _b_abs(args, ctx):
    if len(args) != 1:
        _bad_arity("abs")
    return abs(_require_number(args[0], "abs"))


def _b_floor(args, ctx):
    if len(args) != 1:
        _bad_arity("floor")
    return math.floor(_require_number(args[0], "floor"))


def _b_clamp(args, ctx):
    if len(args) != 3:
        _bad_arity("clamp")
    v, lo, hi = (_require_number(a, "clamp") for a in args)
    return min(max(v, lo), hi)


def _b_uniform(args, ctx):
    if len(args) != 2:
        _bad_arity("uniform")
    a, b = (_require_number(x, "uniform") for x in args)
    return ctx.draw().uniform(a, b)


def _b_randint(args, ctx):
    if len(args) != 2:
        _bad_arity("randint")
    a, b = (_as_int(x, "randint") for x in args)
    return ctx.draw().randint(a, b)


def _b_choice(args, ctx):
    if len(args) != 1 or not isinstance(args[0], list) or not args[0]:
        raise ExecError("choice expects a nonempty list")
    return ctx.draw().choice(args[0])


def _b_bernoulli(args, ctx):
    if len(args) != 1:
        _bad_arity("bernoulli")
    return ctx.draw().random() < _require_number(args[0], "bernoulli")


_BUILTINS = {
    "frame": _b_frame,
    "part": _b_part,
    "make_part": _b_make_part,
    "group_parts": _b_group_parts,
    "len": _b_len,
    "min": _b_min,
    "max": _b_max,
    "abs": _b_abs,
    "floor": _b_floor,
    "clamp": _b_clamp,
    "uniform": _b_uniform,
    "randint": _b_randint,
    "choice": _b_choice,
    "bernoulli": _b_bernoulli,
}


def _eval_call(expr: ast.CallExpr, env: dict, ctx: _Ctx):
    name = expr.name
    args = [_eval(a, env, ctx) for a in expr.args]
    builtin = _BUILTINS.get(name)
    if builtin is not None:
        return builtin(args, ctx)
    fn = ctx.lib.functions.get(name)
    if fn is None:
        raise ExecError(f"unknown function {name!r}", code="UnknownFunction")
    if not args or not isinstance(args[0], CoordFrame):
        raise ExecError(f"{name} expects a frame as its first argument")
    cf = args[0]
    rest = args[1:]
    if len(rest) != len(fn.params):
        raise ExecError(f"{name} expects {len(fn.params)} arguments after the frame", code="ArityMismatch")
    if ctx.trace is not None and len(ctx.call_stack) == 1:
        cf = _snap_frame(cf)
        rest = [_snap_value(v) for v in rest]
        parts = _run_body(fn, cf, rest, ctx)
        ctx.trace.append(ast.Call(name, _frame_lit(cf), tuple(rest)))
        ctx.trace_parts.append(list(parts))
        return parts
    return _run_body(fn, cf, rest, ctx)


def _bad_arity(name: str):
    raise ExecError(f"wrong number of arguments for {name}")


def _snap_value(v):
    return snap_float(v) if isinstance(v, float) and not isinstance(v, bool) else v


def _snap_frame(cf: CoordFrame) -> CoordFrame:
    return CoordFrame(tuple(snap_float(c) for c in cf.center), tuple(snap_float(s) for s in cf.dims))


def _frame_lit(cf: CoordFrame) -> ast.FrameLit:
    (w, h, d), (x, y, z) = cf.dims, cf.center
    return ast.FrameLit(w, h, d, x, y, z)


def part_frame(part: Part) -> CoordFrame:
    return CoordFrame(part.center, part.dims)


def _exec_stmts(stmts, env: dict, ctx: _Ctx) -> None:
    # Step accounting is per statement; expressions are finite per statement
    # and loops are bounded, so this still bounds total work.
    for stmt in stmts:
        ctx.steps += 1
        if ctx.steps > ctx.limits.max_steps:
            raise ExecError("execution step limit exceeded", code="StepLimitExceeded")
        cls = type(stmt)
        if cls is ast.Let:
            env[stmt.name] = _eval(stmt.expr, env, ctx)
        elif cls is ast.Append:
            target = env.get(stmt.name)
            if type(target) is not list:
                raise ExecError(f"append target {stmt.name!r} is not a list")
            value = _eval(stmt.expr, env, ctx)
            if type(value) is list:
                target.extend(value)
            else:
                target.append(value)
        elif cls is ast.Assign:
            if stmt.name not in env:
                raise ExecError(f"assignment to undefined variable {stmt.name!r}", code="UndefinedVariable")
            env[stmt.name] = _eval(stmt.expr, env, ctx)
        elif cls is ast.For:
            count = _as_int(_eval(stmt.count, env, ctx), "range")
            if count > ctx.limits.max_loop_iters:
                raise ExecError(
                    f"loop bound {count} exceeds limit {ctx.limits.max_loop_iters}", code="LoopLimitExceeded"
                )
            for i in range(count):
                env[stmt.var] = i
                _exec_stmts(stmt.body, env, ctx)
        elif cls is ast.If:
            cond = _eval(stmt.cond, env, ctx)
            if not isinstance(cond, bool):
                raise ExecError("if condition must be a boolean")
            _exec_stmts(stmt.then if cond else stmt.orelse, env, ctx)
        elif cls is ast.Return:
            raise _ReturnSignal(_eval(stmt.expr, env, ctx))
        else:
            raise ExecError(f"cannot execute {cls.__name__}")


def _run_body(fn: ast.LibraryFunction, cf: CoordFrame, args: list, ctx: _Ctx) -> list[Part]:
    if fn.body is None:
        raise ExecError(f"function {fn.name!r} has no body", code="NoBody")
    if fn.name in ctx.call_stack:
        raise ExecError(f"recursive call of {fn.name!r}", code="RecursionNotAllowed")
    env = {fn.frame_param: cf}
    for (pname, ptype), value in zip(fn.params, args):
        if ptype.kind is ast.ParamKind.FLOAT and isinstance(value, int) and not isinstance(value, bool):
            value = float(value)
        if not ptype.accepts(value):
            raise ExecError(f"argument {pname!r} of {fn.name} does not accept {value!r}", code="TypeMismatch")
        env[pname] = value
    ctx.call_stack.append(fn.name)
    try:
        _exec_stmts(fn.body, env, ctx)
        result: list = []
    except _ReturnSignal as sig:
        result = sig.value
    finally:
        ctx.call_stack.pop()
    if not isinstance(result, list) or not all(isinstance(p, Part) for p in result):
        raise ExecError(f"{fn.name} must return a list of parts", code="BadReturn")
    if len(result) > ctx.limits.max_parts:
        raise ExecError(f"{fn.name} produced more than {ctx.limits.max_parts} parts", code="PartLimitExceeded")
    _soft_checks(fn, cf, result, ctx)
    return result


def _soft_checks(fn: ast.LibraryFunction, cf: CoordFrame, parts: list[Part], ctx: _Ctx) -> None:
    if fn.doc.valid_options and len(parts) not in fn.doc.valid_options:
        ctx.flags.append(f"ValidOptionsMismatch:{fn.name}:{len(parts)}")
    if parts:
        slack = 0.05 * cf.diagonal()
        lo = tuple(c - s / 2 - slack for c, s in zip(cf.center, cf.dims))
        hi = tuple(c + s / 2 + slack for c, s in zip(cf.center, cf.dims))
        for part in parts:
            plo, phi = part.lo(), part.hi()
            if any(a < b for a, b in zip(plo, lo)) or any(a > b for a, b in zip(phi, hi)):
                ctx.flags.append(f"FrameOverflow:{fn.name}")
                break


def execute_function(
    lib: ast.Library,
    name: str,
    cf: CoordFrame,
    args: list,
    limits: ExecLimits = ExecLimits(),
    rng: random.Random | None = None,
    flags: list[str] | None = None,
) -> list[Part]:
    fn = lib.functions.get(name)
    if fn is None:
        raise ExecError(f"unknown function {name!r}", code="UnknownFunction")
    ctx = _Ctx(lib, limits, rng=rng)
    parts = _run_body(fn, cf, list(args), ctx)
    if flags is not None:
        flags.extend(ctx.flags)
    return parts


def execute_program(lib: ast.Library, prog: ast.ShapeProgram, limits: ExecLimits = ExecLimits()) -> Execution:
    ex = Execution()
    ctx = _Ctx(lib, limits)
    for index, stmt in enumerate(prog.statements):
        if isinstance(stmt, ast.MakePart):
            frame = stmt.frame
            part = Part(stmt.label, (frame.w, frame.h, frame.d), (frame.x, frame.y, frame.z))
            ex.parts.append(part)
            ex.provenance.append((index, "make_part"))
            continue
        fn = lib.functions.get(stmt.fn_name)
        if fn is None:
            raise ExecError(f"unknown function {stmt.fn_name!r}", code="UnknownFunction")
        cf = CoordFrame((stmt.frame.x, stmt.frame.y, stmt.frame.z), (stmt.frame.w, stmt.frame.h, stmt.frame.d))
        parts = _run_body(fn, cf, list(stmt.args), ctx)
        ex.parts.extend(parts)
        ex.provenance.extend((index, stmt.fn_name) for _ in parts)
    ex.flags = ctx.flags
    return ex


def run_sampler(
    lib: ast.Library,
    sampler: ast.LibraryFunction,
    cf: CoordFrame,
    seed: int,
    limits: ExecLimits = ExecLimits(),
) -> ast.ShapeProgram:
    """Run a stochastic sampler body, recording its library calls as a program.

    Each top-level statement of the sampler body draws from its own split RNG
    stream, so the trace is reproducible per (sampler, seed).
    """
    ctx = _Ctx(lib, limits)
    ctx.trace = []
    ctx.trace_parts = []
    env = {sampler.frame_param: cf}
    if sampler.params:
        raise ExecError("samplers must take only the frame parameter")
    if sampler.body is None:
        raise ExecError(f"sampler {sampler.name!r} has no body", code="NoBody")
    ctx.call_stack.append(sampler.name)
    try:
        for index, stmt in enumerate(sampler.body):
            ctx.rng = _split_stream(seed, index)
            try:
                _exec_stmts([stmt], env, ctx)
            except _ReturnSignal:
                break
    finally:
        ctx.call_stack.pop()
    if not ctx.trace:
        raise ExecError(f"sampler {sampler.name!r} emitted no statements", code="SamplerReturnedEmpty")
    return ast.ShapeProgram(tuple(ctx.trace))
