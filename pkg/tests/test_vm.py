import io

import pytest

from models import TraceConfig, TraceMode, VMFault

from vm import EXIT_EXCEPTION, EXIT_OK, CollectingTracer, FunctionRegistry, NullTracer, VirtualMachine

from tests.helpers import GOLDEN, compile_source


def _run(source: str, **kwargs):
    return VirtualMachine(**kwargs).run(compile_source(source))


class TestExecution:
    def test_output_and_globals(self):
        result = _run("x = 2\ny = x * 21\nprint(y)\n")
        assert result.status == EXIT_OK
        assert result.output == "42\n"
        assert result.environment["y"] == 42

    def test_stdout_can_be_redirected(self):
        stream = io.StringIO()
        result = _run('print("hi")\n', stdout=stream)
        assert stream.getvalue() == "hi\n"
        assert result.output == ""

    def test_recursion(self):
        source = "def fact(n) {\n    if n < 2 {\n        return 1\n    }\n    return n * fact(n - 1)\n}\nprint(fact(10))\n"
        assert _run(source).output == "3628800\n"

    def test_for_range_and_match(self):
        source = (
            "total = 0\n"
            "for i in range(5) {\n"
            "    match i % 3 {\n"
            "        case 0 { total = total + 10 }\n"
            "        case 1 { total = total + 1 }\n"
            "        case _ { pass }\n"
            "    }\n"
            "}\n"
            "print(total)\n"
        )
        assert _run(source).output == "22\n"

    def test_return_inside_loop(self):
        source = "def first(n) {\n    for i in range(n) {\n        if i == 3 {\n            return i\n        }\n    }\n    return -1\n}\nprint((first(10), first(2)))\n"
        assert _run(source).output == "(3, -1)\n"


class TestErrors:
    def test_uncaught_raise(self):
        result = _run("raise\n")
        assert result.status == EXIT_EXCEPTION
        assert result.error == "raise"

    def test_traceback_lists_innermost_first(self):
        result = _run("def f() {\n    raise\n}\nf()\n")
        assert result.traceback == [("prog.mini", "f", 2), ("prog.mini", "<module>", 4)]

    def test_exception_crosses_frames_into_handler(self):
        source = "def f() {\n    raise\n}\ntry {\n    f()\n} except {\n    print(\"caught\")\n}\nprint(\"after\")\n"
        result = _run(source)
        assert result.status == EXIT_OK
        assert result.output == "caught\nafter\n"

    def test_exception_inside_handler_propagates(self):
        result = _run("try {\n    raise\n} except {\n    x = 1 / 0\n}\n")
        assert result.status == EXIT_EXCEPTION
        assert "division" in result.error

    def test_nested_handlers(self):
        source = "try {\n    try {\n        raise\n    } except {\n        print(1)\n        raise\n    }\n} except {\n    print(2)\n}\n"
        assert _run(source).output == "1\n2\n"

    def test_host_errors_become_mini_exceptions(self):
        assert _run('x = 1 + "a"\n').status == EXIT_EXCEPTION
        assert _run("x = undefined_name\n").error == "name 'undefined_name' is not defined"

    def test_max_frames(self):
        result = _run("def f(n) {\n    return f(n + 1)\n}\nf(0)\n", max_frames=10)
        assert result.status == EXIT_EXCEPTION
        assert result.error == "maximum call depth exceeded"

    def test_call_depth_error_is_catchable(self):
        source = "def f(n) {\n    return f(n + 1)\n}\ntry {\n    f(0)\n} except {\n    print(\"deep\")\n}\n"
        assert _run(source, max_frames=20).output == "deep\n"

    def test_wrong_arity(self):
        result = _run("def f(a) {\n    return a\n}\nf(1, 2)\n")
        assert "takes 1 arguments (2 given)" in result.error

    def test_load_without_loader(self):
        assert _run('load("x.mini")\n').error == "load() is not available"


class TestRegistry:
    def test_next_call_runs_the_published_code(self):
        code = compile_source("def f() {\n    return 1\n}\nprint(f())\nprint(f())\n")
        (index, _), = code.children()
        (_, replacement), = compile_source("def f() {\n    return 2\n}\n").children()
        registry = FunctionRegistry()
        registry.publish("prog.mini", (index,), replacement)
        assert VirtualMachine(registry=registry).run(code).output == "2\n2\n"

    def test_publish_rebinds_defined_functions(self):
        code = compile_source("def f() {\n    return 1\n}\n")
        (index, child), = code.children()
        registry = FunctionRegistry()
        value = registry.define("m", (index,), child)
        newer = child.replace(name="f")
        registry.publish("m", (index,), newer)
        assert registry.code_of(value.registry_id) is newer
        assert registry.lookup("m", (index,)).rebinds == 1
        assert registry.define("m", (index,), child).registry_id == value.registry_id

    def test_rebinding_mid_recursion(self):
        template = "def f(n) {\n    if n > 0 {\n        f(n - 1)\n    }\n    print(%d)\n    return 0\n}\nf(3)\nf(0)\n"
        code = compile_source(template % 1)
        (index, _), = code.children()
        (_, newer), = compile_source(template % 2).children()
        registry = FunctionRegistry()
        vm = VirtualMachine(registry=registry)

        def publish_at_the_bottom(source, previous, line):
            # first reached by the innermost of four activations
            if line == 5 and registry.lookup("prog.mini", (index,)).rebinds == 0:
                registry.publish("prog.mini", (index,), newer)

        vm.tracer = publish_at_the_bottom
        result = vm.run(code)
        assert result.output == "1\n1\n1\n1\n2\n"
        assert registry.lookup("prog.mini", (index,)).rebinds == 1

    def test_rebind_unknown_id(self):
        with pytest.raises(VMFault):
            FunctionRegistry().rebind(3, compile_source("pass\n"))


class TestTracing:
    def _traced(self, name: str, mode: TraceMode = TraceMode.COLLECT):
        vm = VirtualMachine(trace=TraceConfig(mode=mode))
        result = vm.run(compile_source((GOLDEN / f"{name}.mini").read_text(), f"{name}.mini"))
        return vm.tracer, result

    def test_lines_and_arcs(self):
        tracer, result = self._traced("if_no_else")
        assert isinstance(tracer, CollectingTracer)
        assert result.output == "2\n"
        assert tracer.lines == {("if_no_else.mini", line) for line in (1, 2, 3, 5, 6)}
        assert tracer.arcs == {("if_no_else.mini", 1, 2), ("if_no_else.mini", 2, 3), ("if_no_else.mini", 3, 5), ("if_no_else.mini", 5, 6)}

    def test_backward_jumps_produce_arcs(self):
        tracer, _ = self._traced("loop")
        assert {(o, d) for _, o, d in tracer.arcs} == {(1, 2), (2, 3), (3, 2), (2, 5)}

    def test_prefix_filters_frames(self):
        vm = VirtualMachine(trace=TraceConfig(mode=TraceMode.COLLECT, path_prefix="/elsewhere"))
        vm.run(compile_source("x = 1\n"))
        assert vm.tracer.lines == set()

    def test_null_tracer_keeps_nothing(self):
        tracer, result = self._traced("loop", TraceMode.NULL)
        assert isinstance(tracer, NullTracer)
        assert result.output == "3\n"

    def test_tracing_off(self):
        assert VirtualMachine().tracer is None

    def test_switch_takes_effect_at_the_next_line(self):
        vm = VirtualMachine()
        seen = []

        def switching(source, previous, line):
            seen.append(line)
            if line == 2:
                vm.set_trace(TraceConfig(mode=TraceMode.COLLECT))

        vm.tracer = switching
        vm.run(compile_source("a = 1\nb = 2\nc = 3\nd = 4\n"))
        assert seen == [1, 2]
        assert vm.tracer.lines == {("prog.mini", 3), ("prog.mini", 4)}

    def test_switching_off_mid_frame(self):
        vm = VirtualMachine()
        seen = []

        def once(source, previous, line):
            seen.append(line)
            vm.set_trace(None)

        vm.tracer = once
        vm.run(compile_source("a = 1\nb = 2\nc = 3\n"))
        assert seen == [1]
