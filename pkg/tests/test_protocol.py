import json

import pytest
from hypothesis import given, settings, strategies as st

from delivery_bounds.errors import InvalidParameterError, ProtocolParseError
from delivery_bounds.protocol import (ProtocolNode, RepeaterSpec, SwitchSpec, build_repeater,
                                      build_switch, distill, generate, parse_protocol, rus,
                                      serialize_protocol)

probs = st.one_of(st.just(1.0), st.floats(0.01, 1.0, allow_nan=False))


def trees(max_leaves=8):
    leaves = st.builds(generate, probs)
    return st.recursive(
        leaves,
        lambda kids: st.builds(lambda p, cs, b: rus(p, cs, bound_mode=b),
                               probs, st.lists(kids, min_size=1, max_size=3), st.booleans()),
        max_leaves=max_leaves)


class TestBuilders:
    def test_level_zero_is_leaf(self):
        t = build_repeater(RepeaterSpec(0, 0.3, 0.5))
        assert t.is_leaf and t.p == 0.3

    def test_level_one(self):
        t = build_repeater(RepeaterSpec(1, 0.3, 0.5))
        assert t.kind == "rus" and t.p == 0.5
        assert [c.kind for c in t.children] == ["generate", "generate"]

    @pytest.mark.parametrize("n", range(6))
    def test_leaves_and_depth(self, n):
        t = build_repeater(RepeaterSpec(n, 0.5, 0.5))
        assert t.leaf_count() == 2 ** n
        assert t.depth() == n

    def test_switch_three_arms(self):
        t = build_switch(SwitchSpec(3, 0.5, generate(0.5)))
        assert t.p == 0.5 and len(t.children) == 3 and t.leaf_count() == 3

    def test_two_arm_switch_matches_one_level_chain(self):
        sw = build_switch(SwitchSpec(2, 0.4, generate(0.2)))
        ch = build_repeater(RepeaterSpec(1, 0.2, 0.4))
        assert sw.structure == ch.structure

    def test_switch_with_repeater_arms(self):
        arm = build_repeater(RepeaterSpec(2, 0.5, 0.5))
        t = build_switch(SwitchSpec(3, 0.5, arm))
        assert t.leaf_count() == 12
        assert len({c.structure for c in t.children}) == 1

    @pytest.mark.parametrize("kw", [dict(nesting_levels=-1, p_gen=0.5, p_swap=0.5),
                                    dict(nesting_levels=1, p_gen=0.0, p_swap=0.5),
                                    dict(nesting_levels=1, p_gen=0.5, p_swap=1.1),
                                    dict(nesting_levels=1, p_gen=0.5, p_swap=0.5, gen_model="x")])
    def test_bad_repeater_spec(self, kw):
        with pytest.raises(InvalidParameterError):
            RepeaterSpec(**kw)

    def test_bad_switch_spec(self):
        with pytest.raises(InvalidParameterError):
            SwitchSpec(1, 0.5, generate(0.5))


class TestNodeInvariants:
    def test_generate_with_children(self):
        with pytest.raises(InvalidParameterError):
            ProtocolNode("generate", 0.5, children=(generate(0.5),))

    def test_rus_without_children(self):
        with pytest.raises(InvalidParameterError):
            rus(0.5, ())

    @pytest.mark.parametrize("p", [0.0, -0.2, 1.5, True])
    def test_probability_range(self, p):
        with pytest.raises(InvalidParameterError):
            generate(p)

    def test_single_child_retry_allowed(self):
        assert rus(0.5, [generate(0.5)]).leaf_count() == 1

    def test_labels_do_not_affect_structure(self):
        assert generate(0.5, "a").structure == generate(0.5, "b").structure


class TestParse:
    def test_leaf(self):
        t = parse_protocol('{"kind":"generate","p":0.5}')
        assert t.is_leaf and t.p == 0.5 and not t.bound_mode

    def test_distill_then_swap_document(self):
        doc = {
            "kind": "rus", "p": 0.5, "label": "swap",
            "children": [
                {"kind": "rus", "p": 0.5, "bound_mode": True, "label": "distill",
                 "children": [{"kind": "generate", "p": 0.2},
                              {"kind": "generate", "p": 0.2}]},
                {"kind": "generate", "p": 0.2},
            ],
        }
        t = parse_protocol(json.dumps(doc))
        assert t.leaf_count() == 3
        assert t.children[0].bound_mode and not t.bound_mode
        assert t.has_bound_mode()

    def test_out_of_range_probability(self):
        with pytest.raises(ProtocolParseError, match="p=1.5"):
            parse_protocol('{"kind":"generate","p":1.5}')

    def test_syntax_error_has_location(self):
        with pytest.raises(ProtocolParseError) as exc:
            parse_protocol('{"kind": "generate",\n "p": }')
        assert exc.value.location == "2:7"

    def test_nested_error_path(self):
        doc = '{"kind":"rus","p":0.5,"children":[{"kind":"generate","p":0.5},{"kind":"generate","p":0}]}'
        with pytest.raises(ProtocolParseError) as exc:
            parse_protocol(doc)
        assert exc.value.location == "/children/1"

    @pytest.mark.parametrize("doc", [
        '{"kind":"generate","p":0.5,"children":[]}',
        '{"kind":"rus","p":0.5}',
        '{"kind":"rus","p":0.5,"children":[]}',
        '{"kind":"generate","p":0.5,"colour":"red"}',
        '{"kind":"swap","p":0.5}',
        '{"kind":"generate","p":"0.5"}',
        '{"kind":"generate","p":true}',
        '{"kind":"generate","p":0.5,"bound_mode":1}',
        '{"kind":"generate","p":0.5,"label":3}',
        '[1, 2]',
    ])
    def test_semantic_errors(self, doc):
        with pytest.raises(ProtocolParseError):
            parse_protocol(doc)

    def test_distill_helper_defaults(self):
        d = distill([generate(0.3), generate(0.3)])
        assert d.bound_mode and d.p == 0.5

    @settings(max_examples=100, deadline=None)
    @given(trees())
    def test_round_trip(self, tree):
        back = parse_protocol(serialize_protocol(tree))
        assert back.structure == tree.structure
        assert back == tree
