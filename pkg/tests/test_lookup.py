import pytest

from semx.frontend import fixture_source, parse_world
from semx.lookup import (
    Activation, Frame, LookupCache, Selection, StrategyConfig,
    active_exts_bottom_up, active_exts_lexical, active_exts_top_down, lookup,
    lookup_in_class, lookup_in_extension, select_extensions_first,
    select_hierarchy_first,
)
from semx.model import GLOBAL, ExtensionRef, Signature

E2 = ExtensionRef("P2", "E2")
E3 = ExtensionRef("P3", "E3")
SIMPLE = ExtensionRef("SimpleLog", "Logging")
OBJECT = ExtensionRef("ObjectLog", "Logging")
XE1 = ExtensionRef("X", "e1")
XE2 = ExtensionRef("X", "e2")
REDEFINED = Signature("redefined", 0)
FOO = Signature("foo", 0)


@pytest.fixture(scope="module")
def fig6():
    return parse_world(fixture_source("fig6"))


@pytest.fixture(scope="module")
def decorators():
    return parse_world(fixture_source("decorators"))


@pytest.fixture(scope="module")
def sel():
    return parse_world(fixture_source("selection_example"))


def frames(world, *specs):
    out = []
    for spec in specs:
        if spec.startswith("script:"):
            out.append(Frame(world.find_script(spec[7:])))
        else:
            cls, _, sig = spec.partition(".")
            out.append(Frame(world.method(cls, Signature.parse(sig), GLOBAL)))
    return tuple(out)


def case_c_stack(fig6):
    return frames(fig6, "C3.sendRedefinedToVia/2", "C2.sendRedefinedTo/1")


def case_d_stack(fig6):
    return frames(fig6, "script:caseD", "C3.sendSelfSendToVia/2",
                  "C2.sendSelfSendTo/1", "C1.selfSend/0")


def test_empty_stack_activates_only_global(fig6):
    for fn in (active_exts_bottom_up, active_exts_top_down, active_exts_lexical):
        assert fn(fig6, ()) == (GLOBAL,)


def test_bottom_up_case_c(fig6):
    assert active_exts_bottom_up(fig6, case_c_stack(fig6)) == (E3, E2, GLOBAL)


def test_top_down_case_c(fig6):
    assert active_exts_top_down(fig6, case_c_stack(fig6)) == (E2, E3, GLOBAL)


def test_lexical_uses_the_sender(fig6):
    stack_a = frames(fig6, "script:caseA", "C2.sendRedefinedTo/1")
    assert active_exts_lexical(fig6, stack_a) == (E2, GLOBAL)
    stack_b = frames(fig6, "script:caseB", "C2.sendSelfSendTo/1", "C1.selfSend/0")
    assert active_exts_lexical(fig6, stack_b) == (GLOBAL,)


def test_decorator_case1_activations(decorators):
    stack = frames(decorators, "script:case1", "ReadOnlyDecorator.at/1", "RecordDecorator.at/1")
    assert active_exts_bottom_up(decorators, stack) == (SIMPLE, OBJECT, GLOBAL)
    assert active_exts_top_down(decorators, stack) == (OBJECT, SIMPLE, GLOBAL)


def test_lookup_in_class(fig6, sel):
    assert lookup_in_class(fig6, "C1", REDEFINED, ()) is None
    hit = lookup_in_class(sel, "B", FOO, (XE1, XE2, GLOBAL))
    assert (hit.class_name, hit.extension) == ("B", XE2)
    hit = lookup_in_class(fig6, "C1", REDEFINED, (E2, GLOBAL))
    assert (hit.class_name, hit.extension) == ("C1", E2)


def test_lookup_in_extension(fig6, sel):
    hit = lookup_in_extension(sel, "B", FOO, XE1)
    assert (hit.class_name, hit.extension) == ("A", XE1)
    assert lookup_in_extension(sel, "Object", FOO, XE2) is None
    hit = lookup_in_extension(fig6, "C1", Signature("selfSend", 0), GLOBAL)
    assert (hit.class_name, hit.extension) == ("C1", GLOBAL)


def test_selection_strategies_diverge(sel):
    exts = (XE1, XE2, GLOBAL)
    ext = select_extensions_first(sel, "B", FOO, exts)
    hrc = select_hierarchy_first(sel, "B", FOO, exts)
    assert (ext.class_name, ext.extension) == ("B", XE2)
    assert (hrc.class_name, hrc.extension) == ("A", XE1)


def test_selection_base_cases(fig6):
    assert select_hierarchy_first(fig6, "C1", REDEFINED, ()) is None
    assert select_extensions_first(fig6, "C1", REDEFINED, ()) is None
    # defined only in global on a superclass: both strategies agree
    sig = Signature("selfSend", 0)
    src = "package P { class Object { method q/0() { } } class A extends Object { } }"
    world = parse_world(src)
    for fn in (select_extensions_first, select_hierarchy_first):
        hit = fn(world, "A", Signature("q", 0), (GLOBAL,))
        assert (hit.class_name, hit.extension) == ("Object", GLOBAL)
    assert select_extensions_first(fig6, "C1", sig, (GLOBAL,)).class_name == "C1"


def test_extensions_first_picks_first_defining_extension(fig6):
    hit = select_extensions_first(fig6, "C1", REDEFINED, (E3, E2, GLOBAL))
    assert (hit.class_name, hit.extension) == ("C1", E3)


@pytest.mark.parametrize("activation, expected", [
    (Activation.BOTTOM_UP, E3),
    (Activation.TOP_DOWN, E2),
    (Activation.LEXICAL, GLOBAL),
])
def test_composed_lookup_case_d(fig6, activation, expected):
    cfg = StrategyConfig(activation, Selection.EXTENSIONS_FIRST)
    hit = lookup(fig6, "C1", REDEFINED, case_d_stack(fig6), cfg)
    assert (hit.class_name, hit.extension) == ("C1", expected)
    if expected.is_global:
        assert hit.label == "P1.global"


def test_composed_lookup_case_c_bottom_up(fig6):
    cfg = StrategyConfig(Activation.BOTTOM_UP, Selection.EXTENSIONS_FIRST)
    hit = lookup(fig6, "C1", REDEFINED, case_c_stack(fig6), cfg)
    assert hit.label == "P3.E3"


def test_cache_shares_entries_across_stacks(fig6):
    cache = LookupCache()
    cfg = StrategyConfig(Activation.LEXICAL, Selection.EXTENSIONS_FIRST)
    a = lookup(fig6, "C1", REDEFINED, frames(fig6, "C2.sendRedefinedTo/1"), cfg, cache)
    b = lookup(fig6, "C1", REDEFINED,
               frames(fig6, "script:caseC", "C3.sendRedefinedToVia/2", "C2.sendRedefinedTo/1"),
               cfg, cache)
    assert a == b
    assert (cache.hits, cache.misses, len(cache)) == (1, 1, 1)


def test_uncached_lookup_leaves_cache_untouched(fig6):
    cache = LookupCache()
    cfg = StrategyConfig(cache_enabled=False)
    lookup(fig6, "C1", REDEFINED, (), cfg, cache)
    assert len(cache) == 0


def test_max_depth_must_be_positive():
    with pytest.raises(ValueError):
        StrategyConfig(max_depth=0)


def test_shared_cache_under_threads(fig6):
    from concurrent.futures import ThreadPoolExecutor
    from semx.interp import evaluate

    cache = LookupCache()
    cfg = StrategyConfig(Activation.BOTTOM_UP, Selection.EXTENSIONS_FIRST)
    expected = [evaluate(fig6, s, StrategyConfig(Activation.BOTTOM_UP, Selection.EXTENSIONS_FIRST,
                                                  cache_enabled=False)).dispatches
                for s in ("caseA", "caseB", "caseC", "caseD")]
    with ThreadPoolExecutor(8) as pool:
        runs = list(pool.map(lambda s: evaluate(fig6, s, cfg, cache).dispatches,
                             ["caseA", "caseB", "caseC", "caseD"] * 25))
    for k, dispatches in enumerate(runs):
        assert dispatches == expected[k % 4]
