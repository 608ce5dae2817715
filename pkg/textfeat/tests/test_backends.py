import numpy as np
import pytest

from textfeat import BackendUnavailable, MockDiscourseClassifier, MockEmbedding
from textfeat.backends import load_discourse_backend, load_embedding_backend


class TestMockEmbedding:
    def test_letter_counts(self):
        backend = MockEmbedding(dim=4)
        out = backend.encode(["a cab.", "dad adds a bad cd."])
        assert out.tolist() == [[2, 1, 1, 0], [4, 1, 1, 6]]

    def test_case_insensitive(self):
        backend = MockEmbedding(dim=2)
        assert backend.encode(["A ba"]).tolist() == [[2, 1]]

    def test_deterministic(self):
        backend = MockEmbedding(dim=8)
        s = ["some review sentence.", "another one."]
        assert np.array_equal(backend.encode(s), backend.encode(s))


class TestMockClassifier:
    def test_rule_table(self):
        clf = MockDiscourseClassifier()
        sentences = [
            "Should this scale?",
            'He said "fine" today.',
            "See Table 2.",
            "The work is solid.",
            "We use CNNs.",
            "Ok.",
        ]
        assert clf.classify(sentences) == [
            "request", "quote", "reference", "evaluation", "fact", "nonarg",
        ]

    def test_request_wins_over_quote(self):
        clf = MockDiscourseClassifier()
        assert clf.classify(['Should we "try"?']) == ["request"]


class TestLoaders:
    def test_mock_flag_wins(self):
        backend = load_embedding_backend("some-model", mock=True, mock_dim=3)
        assert isinstance(backend, MockEmbedding)
        assert backend.dim == 3

    def test_no_model_defaults_to_mock_embedding(self):
        assert isinstance(load_embedding_backend(None, mock=False), MockEmbedding)

    def test_no_discourse_model_means_none(self):
        assert load_discourse_backend(None, mock=False) is None

    def test_missing_neural_model_raises_with_instructions(self, tmp_path):
        with pytest.raises(BackendUnavailable, match="--mock"):
            load_embedding_backend(str(tmp_path / "no-such-model"), mock=False)
