"""Sketching tests: mode semantics, name classification, the four
sketching laws, normalization, and voting."""

from __future__ import annotations

import os
import sys

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from sketchkit.errors import EmptyCandidateList, LexError
from sketchkit.lexer import TokenKind, tokenize
from sketchkit.sketch import (
    DEFAULT_SYMBOLS,
    SketchMode,
    SymbolTable,
    classify_names,
    detect_anonymous_symbols,
    has_anonymous_symbols,
    normalize,
    sketch_source,
    vote,
)

sys.path.insert(0, os.path.dirname(__file__))
from synthcorpus import make_corpus  # noqa: E402


# ------------------------------------------------------------ mode behavior


def test_constants_only_replaces_numbers_and_strings():
    sk = sketch_source('total = price * 1.07\nmsg = "hi"\n',
                       SketchMode.CONSTANTS_ONLY)
    assert sk.text == "total = price * number\nmsg = string\n"
    assert sk.anonymous_count == 2


def test_small_integers_are_kept():
    sk = sketch_source("a = 0\nb = 1\nc = 2\nd = 3\ne = 4\n",
                       SketchMode.CONSTANTS_ONLY)
    assert sk.text == "a = 0\nb = 1\nc = 2\nd = 3\ne = number\n"


@pytest.mark.parametrize("literal", ["0.0", "0x0", "1e0", "2j", "0b10"])
def test_kept_set_matches_exact_text_only(literal):
    sk = sketch_source(f"v = {literal}\n", SketchMode.CONSTANTS_ONLY)
    assert sk.text == "v = number\n"


def test_names_only_replaces_defined_names():
    source = (
        "def area(radius):\n"
        "    scale = 2\n"
        "    return scale * radius\n"
    )
    sk = sketch_source(source, SketchMode.NAMES_ONLY)
    assert sk.text == (
        "def function(variable):\n"
        "    variable = 2\n"
        "    return variable * variable\n"
    )


def test_class_names_get_their_own_symbol():
    source = (
        "class Point:\n"
        "    def norm(self):\n"
        "        return self.x\n"
        "p = Point()\n"
    )
    sk = sketch_source(source, SketchMode.NAMES_ONLY)
    lines = sk.text.splitlines()
    assert lines[0] == "class classname:"
    # self is a parameter, hence a variable binding like any other
    assert lines[1] == "    def function(variable):"
    assert lines[2] == "        return variable.x"
    assert lines[3] == "variable = classname()"


def test_imported_names_are_exempt():
    source = (
        "import numpy as np\n"
        "from os import path\n"
        "arr = np.zeros(5)\n"
        "loc = path\n"
    )
    sk = sketch_source(source, SketchMode.NAMES_ONLY)
    lines = sk.text.splitlines()
    assert lines[0] == "import numpy as np"
    assert lines[1] == "from os import path"
    assert lines[2] == "variable = np.zeros(5)"
    assert lines[3] == "variable = path"


def test_attribute_names_after_dot_are_untouched():
    sk = sketch_source("width = frame.width\n", SketchMode.NAMES_ONLY)
    assert sk.text == "variable = frame.width\n"


def test_keyword_arguments_are_not_assignment_targets():
    sk = sketch_source("r = plot(color=shade, width=3)\n", SketchMode.NAMES_ONLY)
    # color/width are call keywords, not bindings; shade is a free name
    assert sk.text == "variable = plot(color=shade, width=3)\n"


def test_names_and_constants_combines_both():
    sk = sketch_source("def f(x):\n    return x * 9\n",
                       SketchMode.NAMES_AND_CONSTANTS)
    assert sk.text == "def function(variable):\n    return variable * number\n"


def test_for_targets_and_walrus_and_global():
    source = (
        "for i, j in pairs:\n"
        "    pass\n"
        "if (n := fetch()) > 3:\n"
        "    global counter\n"
        "    counter = n\n"
    )
    sk = sketch_source(source, SketchMode.NAMES_ONLY)
    assert "for variable, variable in pairs:" in sk.text
    assert "(variable := fetch()) > 3" in sk.text
    assert "global variable" in sk.text


def test_comments_and_layout_survive_sketching():
    source = "x = 10  # answer\n\n# block\ny = 'a'\n"
    sk = sketch_source(source, SketchMode.CONSTANTS_ONLY)
    assert sk.text == "x = number  # answer\n\n# block\ny = string\n"


def test_collision_with_symbol_word_is_counted_not_replaced():
    source = "number = 5\nvalue = number\n"
    sk = sketch_source(source, SketchMode.CONSTANTS_ONLY)
    # the user name "number" coincides with the placeholder; it is left
    # alone (so sketching stays idempotent) and recorded
    assert sk.text == "number = number\nvalue = number\n"
    assert sk.symbol_collisions > 0


def test_custom_symbol_table():
    table = SymbolTable(number_symbol="NUM", string_symbol="STR")
    sk = sketch_source('v = 9\ns = "x"\n', SketchMode.CONSTANTS_ONLY, table)
    assert sk.text == "v = NUM\ns = STR\n"


def test_adjacency_never_fuses_tokens():
    # pathological spacing: replacement must not glue name-like tokens
    source = "x=42\n"
    sk = sketch_source(source, SketchMode.CONSTANTS_ONLY)
    assert sk.text == "x=number\n"
    relex = tokenize(sk.text)
    kinds = [t.kind for t in relex.tokens]
    assert kinds[:3] == [TokenKind.NAME, TokenKind.OP, TokenKind.NAME]


# --------------------------------------------------------- classify_names


def test_classify_names_categories():
    source = (
        "import json\n"
        "def push(item):\n"
        "    queue = []\n"
        "    queue.append(item)\n"
        "class Box:\n"
        "    pass\n"
    )
    cats, exempt = classify_names(tokenize(source))
    assert cats["push"] == "function"
    assert cats["Box"] == "class"
    assert cats["queue"] == "variable"
    assert cats["item"] == "variable"
    assert "json" in exempt


def test_classify_del_nonlocal_lambda():
    source = (
        "def outer():\n"
        "    acc = 0\n"
        "    f = lambda step: step + acc\n"
        "    def inner():\n"
        "        nonlocal acc\n"
        "        acc = 1\n"
        "    del f\n"
    )
    cats, _ = classify_names(tokenize(source))
    assert cats["outer"] == "function"
    assert cats["inner"] == "function"
    assert cats["acc"] == "variable"
    assert cats["step"] == "variable"
    assert cats["f"] == "variable"


def test_soft_keyword_match_as_name():
    # match used as a plain variable must not be treated as a binding head
    source = "match = finder(text)\nresult = match.group(0)\n"
    sk = sketch_source(source, SketchMode.NAMES_ONLY)
    assert sk.text == "variable = finder(text)\nvariable = variable.group(0)\n"


# ------------------------------------------------------------------- laws


@pytest.mark.parametrize("mode", list(SketchMode))
def test_laws_on_synthetic_corpus(mode):
    for text in make_corpus(40, seed=11):
        first = sketch_source(text, mode)
        # re-lexability
        relexed = tokenize(first.text)
        # token-count preservation
        assert len(relexed) == len(tokenize(text))
        # idempotence
        second = sketch_source(first.text, mode)
        assert second.text == first.text
        # determinism
        assert sketch_source(text, mode).text == first.text


def test_anonymous_symbol_detection():
    sk = sketch_source("x = 99\n", SketchMode.CONSTANTS_ONLY)
    assert has_anonymous_symbols(sk)
    assert detect_anonymous_symbols(sk.text, DEFAULT_SYMBOLS,
                                    SketchMode.CONSTANTS_ONLY) == 1
    done = sketch_source("x = done\n", SketchMode.CONSTANTS_ONLY)
    assert not has_anonymous_symbols(done)


def test_detect_anonymous_symbols_raises_on_unlexable():
    with pytest.raises(LexError):
        detect_anonymous_symbols('x = "open', DEFAULT_SYMBOLS,
                                 SketchMode.CONSTANTS_ONLY)


# -------------------------------------------------------------- normalize


def test_normalize_collapses_spacing_and_comments():
    a = "def f( x ):   # c\n    return x+1\n"
    b = "def f(x):\n    return x + 1\n"
    assert normalize(a) == normalize(b) == "def f ( x ) :\n    return x + 1"


def test_normalize_drops_blank_lines_and_reencodes_indent():
    text = "if a:\n\n\tb = 1\n"
    assert normalize(text) == "if a :\n    b = 1"


def test_normalize_raises_on_unlexable():
    with pytest.raises(LexError):
        normalize('x = "unclosed')


# ------------------------------------------------------------------- vote


def test_vote_majority_wins():
    assert vote(["a = 1\n", "a  =  1\n", "b = 2\n"]) == "a = 1"


def test_vote_tie_breaks_lexicographically():
    assert vote(["b = 2\n", "a = 1\n"]) == "a = 1"


def test_vote_empty_list_raises():
    with pytest.raises(EmptyCandidateList):
        vote([])


def test_vote_normalization_merges_variants():
    winner = vote([
        "x=5\n",
        "x = 5\n",
        "x   =   5  # note\n",
        "y = 6\n",
        "y = 6\n",
    ])
    assert winner == "x = 5"


# ---------------------------------------------------------------- property


@settings(max_examples=60, deadline=None)
@given(st.integers(min_value=0, max_value=500), st.sampled_from(list(SketchMode)))
def test_sketch_idempotence_property(seed, mode):
    text = make_corpus(1, seed=seed)[0]
    once = sketch_source(text, mode).text
    assert sketch_source(once, mode).text == once
