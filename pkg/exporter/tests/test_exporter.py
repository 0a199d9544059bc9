import numpy as np
import pytest

from nonword_exporter import (
    BASE_TEMPLATES,
    ExportJob,
    PairScores,
    StubEncoder,
    UntokenizableWordError,
    all_templates,
    export_embeddings,
    export_scores,
    fill,
)

# the primary toolkit is the compliance oracle for the emitted files
embedblend = pytest.importorskip("embedblend")


class PickyEncoder(StubEncoder):
    def encode(self, prompt):
        if "zz" in prompt:
            raise UntokenizableWordError(prompt)
        return super().encode(prompt)


def test_template_ensemble_shape():
    assert len(BASE_TEMPLATES) == 80
    templates = all_templates()
    assert len(templates) == 160
    assert all(t.endswith(".") for t in templates[:80])
    assert not any(t.endswith(".") for t in templates[80:])
    assert fill("a photo of a <WORD>", "calf") == "a photo of a calf"


def test_export_round_trips_through_primary_loader(tmp_path):
    job = ExportJob(words=["calf", "cave", "jar"],
                    prompt_template="a photo of a <WORD>",
                    output_dir=tmp_path / "out",
                    encoder=StubEncoder(dim=6, token_count=4))
    result = export_embeddings(job)
    assert result.exported_words == ["calf", "cave", "jar"]
    ds = embedblend.load_dataset(tmp_path / "out")
    assert ds.words == ["calf", "cave", "jar"]
    assert ds.pooled.shape == (3, 6)
    assert ds.hidden.shape == (3, 4, 6)


def test_export_is_byte_deterministic(tmp_path):
    encoder = StubEncoder(dim=5, token_count=3)
    for name in ("one", "two"):
        export_embeddings(ExportJob(words=["calf", "cave"],
                                    prompt_template="a photo of a <WORD>",
                                    output_dir=tmp_path / name,
                                    encoder=encoder))
    for fname in ("pooled.emb1", "hidden.emb1", "manifest.json"):
        assert (tmp_path / "one" / fname).read_bytes() == \
            (tmp_path / "two" / fname).read_bytes()


def test_duplicate_word_rejected_before_encoding(tmp_path):
    class ExplodingEncoder(StubEncoder):
        def encode(self, prompt):
            raise AssertionError("encoder must not be called")

    with pytest.raises(ValueError, match="duplicate"):
        ExportJob(words=["calf", "calf"], prompt_template="<WORD>",
                  output_dir=tmp_path, encoder=ExplodingEncoder())


def test_untokenizable_words_skipped_with_warning(tmp_path):
    job = ExportJob(words=["calf", "buzzword", "cave"],
                    prompt_template="a photo of a <WORD>",
                    output_dir=tmp_path / "out",
                    encoder=PickyEncoder(dim=4, token_count=2))
    result = export_embeddings(job)
    assert result.skipped_words == ["buzzword"]
    ds = embedblend.load_dataset(tmp_path / "out")
    assert ds.words == ["calf", "cave"]


def test_single_template_score_is_identity(tmp_path):
    pair = PairScores(pair_id="p0", concept_a="calf", concept_b="cave",
                      ratio=0.5, template_scores_a=[[0.2]],
                      template_scores_b=[[0.3]])
    path = tmp_path / "scores.csv"
    export_scores([pair], path)
    records = embedblend.blend.read_scores_csv(path)
    assert records[0].scores == [(0.2, 0.3)]


def test_score_csv_averages_templates(tmp_path):
    pair = PairScores(pair_id="p0", concept_a="calf", concept_b="cave",
                      ratio=0.4,
                      template_scores_a=[[0.1, 0.3], [0.2, 0.2]],
                      template_scores_b=[[0.4, 0.0], [0.1, 0.5]])
    path = tmp_path / "scores.csv"
    export_scores([pair], path)
    records = embedblend.blend.read_scores_csv(path)
    assert records[0].scores[0] == (pytest.approx(0.2), pytest.approx(0.2))
    assert records[0].scores[1] == (pytest.approx(0.2), pytest.approx(0.3))
    assert records[0].ratio == 0.4


def test_score_csv_parses_through_detect_blend(tmp_path):
    from embedblend.cli import run
    pair = PairScores(pair_id="p0", concept_a="calf", concept_b="cave",
                      ratio=0.5,
                      template_scores_a=[[0.2], [0.2]],
                      template_scores_b=[[0.2], [0.2]])
    export_scores([pair], tmp_path / "scores.csv")
    assert run(["detect-blend", "--scores", str(tmp_path / "scores.csv"),
                "--n", "2", "--output", str(tmp_path / "table.csv")]) == 0
    assert (tmp_path / "table.csv").exists()
