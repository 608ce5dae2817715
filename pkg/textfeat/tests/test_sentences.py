from textfeat import split_sentences


def test_basic_split():
    assert split_sentences("One here. Two there! Three?") == ["One here.", "Two there!", "Three?"]


def test_empty_and_whitespace():
    assert split_sentences("") == []
    assert split_sentences("   \n  ") == []


def test_no_terminal_punctuation_is_one_sentence():
    assert split_sentences("no punctuation at all") == ["no punctuation at all"]


def test_newlines_after_period_split():
    assert split_sentences("First.\nSecond.") == ["First.", "Second."]


def test_inner_abbreviation_limitation_is_deterministic():
    # simple splitter: splits after any ./!/? + whitespace, consistently
    assert split_sentences("e.g. a case. Done.") == ["e.g.", "a case.", "Done."]
