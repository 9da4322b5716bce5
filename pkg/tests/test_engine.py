import pytest

from models import CoverageEngineError, CoverageMode, Deinstrumentation, RunMode

from compiler import Op, verify
from engine import CoverageEngine
from frontend import enumerate_universe, parse
from instrumenter import probe_header_skip
from transform import transform
from vm import VirtualMachine

from tests.helpers import CORPUS, GOLDEN, compile_source, run_file

IF_NO_ELSE = (GOLDEN / "if_no_else.mini").read_text()
FUNCTION = "def f(x) {\n    return x + 1\n}\nprint(f(1))\n"


def _engine(source: str = IF_NO_ELSE, file: str = "if_no_else.mini", mode=CoverageMode.LINE, **kwargs) -> CoverageEngine:
    engine = CoverageEngine(**kwargs)
    tree = transform(parse(source, file))
    engine.instrument(compile_source(source, file, transformed=True), enumerate_universe(tree), mode, file)
    return engine


def _header(engine: CoverageEngine, probe_id: int) -> int:
    site = engine.probe_map.site(probe_id)
    return engine.probe_map.owner(site.module, site.code_path).code[site.offset]


class TestFullProtocol:
    def test_first_fire_records_and_later_fires_count(self):
        engine = _engine(threshold=3)
        engine.fire(0)
        assert ("if_no_else.mini", 1) in engine.snapshot()
        assert engine.state(0).no_record
        engine.fire(0)
        engine.fire(0)
        assert engine.state(0).counter == 2
        assert engine.stats().batches == 0

    def test_batch_runs_when_counter_reaches_threshold(self):
        engine = _engine(threshold=3)
        for _ in range(4):
            engine.fire(0)
        stats = engine.stats()
        assert stats.batches == 1
        assert stats.eliminated == 1
        assert engine.state(0).eliminated
        assert engine.state(0).counter == 0
        assert engine.store.known == {("if_no_else.mini", 1)}
        assert engine.store.newly_covered == set()

    def test_elimination_rewrites_the_header_into_a_jump(self):
        engine = _engine(threshold=1)
        engine.fire(0)
        engine.fire(0)
        site = engine.probe_map.site(0)
        code = engine.probe_map.owner("if_no_else.mini", ())
        assert code.code[site.offset] == Op.JUMP_FORWARD
        assert probe_header_skip(code, site.offset) == 2
        assert verify(code) == []
        assert engine.registry.latest("if_no_else.mini") is code

    def test_batch_takes_every_recorded_probe(self):
        engine = _engine(threshold=2)
        engine.fire(1)
        engine.fire(2)
        engine.fire(0)
        engine.fire(0)
        engine.fire(0)
        assert engine.stats().eliminated == 3
        assert _header(engine, 3) == Op.NOP
        assert _header(engine, 4) == Op.NOP

    def test_stale_fires_are_counted(self):
        engine = _engine(threshold=1)
        engine.fire(0)
        engine.fire(0)
        engine.fire(0)
        stats = engine.stats()
        assert stats.stale_fires == 1
        assert stats.fires == 3

    def test_empty_batch(self):
        engine = _engine()
        assert engine.eliminate_batch() == 0
        assert engine.stats().batches == 1

    def test_nested_child_rewrite_republishes_the_parent(self):
        engine = _engine(FUNCTION, "fn.mini", threshold=1)
        child_probe = next(s.probe_id for s in engine.probe_map.sites.values() if s.code_path)
        engine.fire(child_probe)
        engine.fire(child_probe)
        assert engine.stats().rewritten_code_objects == 2
        root = engine.probe_map.root("fn.mini")
        (index, child), = root.children()
        assert engine.probe_map.owner("fn.mini", (index,)) is child
        assert engine.registry.latest("fn.mini", (index,)) is child
        assert child.code[engine.probe_map.site(child_probe).offset] == Op.JUMP_FORWARD

    def test_unknown_probe(self):
        with pytest.raises(CoverageEngineError):
            _engine().fire(99)

    def test_threshold_must_be_positive(self):
        with pytest.raises(CoverageEngineError):
            CoverageEngine(threshold=0)


class TestAblations:
    def test_flag_only_never_rewrites(self):
        engine = _engine(threshold=1, deinstrumentation=Deinstrumentation.FLAG_ONLY)
        for _ in range(5):
            engine.fire(0)
        stats = engine.stats()
        assert stats.batches == 0
        assert stats.first_fires == 1
        assert engine.state(0).counter == 4
        assert _header(engine, 0) == Op.NOP

    def test_no_deinstrumentation_records_every_fire(self):
        engine = _engine(threshold=1, deinstrumentation=Deinstrumentation.NONE)
        for _ in range(5):
            engine.fire(0)
        assert engine.stats().fires == 5
        assert not engine.state(0).no_record
        assert engine.snapshot() == {("if_no_else.mini", 1)}


class TestInVirtualMachine:
    def test_running_function_switches_to_rewritten_code_on_next_call(self):
        source = "def f(x) {\n    return x + 1\n}\ntotal = 0\nfor i in range(20) {\n    total = total + f(i)\n}\nprint(total)\n"
        engine = _engine(source, "hot.mini", threshold=2, debug=True)
        vm = VirtualMachine(registry=engine.registry, probe_sink=engine, on_skip=engine.check_skip)
        result = vm.run(engine.probe_map.root("hot.mini"), "hot.mini")
        assert result.output == "210\n"
        stats = engine.stats()
        assert stats.batches >= 1
        assert stats.skip_violations == 0
        assert stats.fires < 20 * 2

    def test_straight_line_program_needs_no_batch(self):
        outcome = run_file(CORPUS / "straight_line.mini", threshold=1)
        assert outcome.stats.batches == 0
        assert outcome.stats.fires == outcome.stats.first_fires == 6

    @pytest.mark.parametrize("threshold", [1, 2, 64])
    def test_debug_skip_checks_stay_clean(self, threshold):
        outcome = run_file(CORPUS / "hot_helper.mini", branch=True, threshold=threshold)
        assert outcome.status == 0
        assert outcome.stats.skip_violations == 0
        if threshold < 64:
            assert outcome.stats.batches > 0

    def test_ablation_modes_agree_on_coverage(self):
        reports = [run_file(CORPUS / "hot_helper.mini", mode, branch=True).report for mode in (
            RunMode.PROBE_FULL, RunMode.PROBE_FLAG_ONLY, RunMode.PROBE_NO_DEINSTR,
        )]
        assert reports[0] == reports[1] == reports[2]
