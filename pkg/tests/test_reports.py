import pytest

from interasr.errors import DegenerateInput, MalformedManifest
from interasr.gateway import ScenarioScript
from interasr.reports import (
    AnnotationRecord,
    JudgmentRecord,
    alignment_study,
    batch_result_from_dict,
    batch_result_to_dict,
    emit_report,
    load_annotations,
    load_judgments,
    render_alignment_table,
    render_csv,
    render_table,
)
from interasr.simulate import BatchResult, run_batch

from conftest import k_correction_scenario, make_gateway
from test_simulate import entry, k_batch

GOLDEN_TABLE = """\
Loop  demo
      WER     SER     S2ER
0     50.00   66.67   66.67
1     16.67   33.33   33.33
2     0.00    0.00    0.00
3     0.00    0.00    0.00
10    0.00    0.00    0.00
"""


@pytest.fixture
def k012_result(templates):
    gw, entries = k_batch([0, 1, 2])
    return run_batch(entries, gw, templates, max_loops=10)


class TestTable:
    def test_golden_table_shape(self, k012_result):
        assert render_table(k012_result) == GOLDEN_TABLE

    def test_loops_rows_capped_by_max_loops(self, templates):
        gw, entries = k_batch([0], max_loops=2)
        result = run_batch(entries, gw, templates, max_loops=2)
        table = render_table(result)
        rows = [line.split()[0] for line in table.splitlines()[2:]]
        assert rows == ["0", "1", "2"]

    def test_empty_results_header_only(self):
        result = BatchResult(reports={}, modes={}, trajectories=[], max_loops=10)
        table = render_table(result)
        assert table.splitlines()[0].startswith("Loop")
        assert len(table.splitlines()) == 2 + 5  # header + empty metric rows

    def test_multi_dataset_columns(self, templates):
        llm, asr = ScenarioScript(), ScenarioScript()
        entries = [
            entry("en-1", k_correction_scenario("en-1", 0, llm, asr), tag="english",
                  mode="word"),
            entry("zh-1", k_correction_scenario("zh-1", 0, llm, asr), tag="mandarin",
                  mode="char"),
        ]
        gw = make_gateway(llm_script=llm, asr_script=asr)
        result = run_batch(entries, gw, templates, max_loops=1)
        lines = render_table(result).splitlines()
        assert "english" in lines[0] and "mandarin" in lines[0]
        assert lines[1].split() == ["WER", "SER", "S2ER", "CER", "SER", "S2ER"]


class TestCsvAndCurves:
    def test_csv_contains_expected_s2er(self, k012_result):
        out = render_csv(k012_result)
        lines = out.splitlines()
        assert lines[0] == ("loop,dataset,token_metric,token_error_rate,"
                            "sentence_error_rate,s2er,n_utterances")
        s2er_column = [line.split(",")[5] for line in lines[1:]]
        assert s2er_column[:3] == ["0.6667", "0.3333", "0.0"]

    def test_curvedata_one_record_per_point(self, k012_result):
        out = emit_report(k012_result, "curvedata")
        lines = out.splitlines()
        assert lines[0] == "loop,metric,value,dataset"
        assert len(lines) - 1 == 11 * 3  # 11 loops x 3 metrics x 1 dataset
        assert "0,WER,0.5,demo" in lines

    def test_unknown_format(self, k012_result):
        with pytest.raises(ValueError):
            emit_report(k012_result, "xml")

    def test_batch_result_round_trip(self, k012_result):
        data = batch_result_to_dict(k012_result)
        restored = batch_result_from_dict(data)
        assert render_csv(restored) == render_csv(k012_result)


def annotations_for(consensus, experts=None):
    """Unanimous annotator pool realizing the given per-item consensus via
    four nonexpert raters, plus optional expert rating dicts."""
    records = []
    for item, value in consensus.items():
        ones = round(value * 4)
        for i in range(4):
            records.append(AnnotationRecord(
                item_id=item, annotator_id=f"n{i}", rating=1 if i < ones else 0,
                cohort="nonexpert"))
    for name, ratings in (experts or {}).items():
        for item, rating in ratings.items():
            records.append(AnnotationRecord(
                item_id=item, annotator_id=name, rating=rating, cohort="expert"))
    return records


class TestAlignmentStudy:
    def test_judge_matches_unanimous_consensus(self):
        judgments = [JudgmentRecord(f"i{k}", "giga", k % 2) for k in range(6)]
        annotations = annotations_for({f"i{k}": float(k % 2) for k in range(6)})
        rows = alignment_study(judgments, annotations)
        overall = rows[-1]
        assert overall.group == "Overall"
        assert overall.llm_r == pytest.approx(1.0, abs=1e-12)

    def test_judge_complement_of_consensus(self):
        judgments = [JudgmentRecord(f"i{k}", "giga", 1 - k % 2) for k in range(6)]
        annotations = annotations_for({f"i{k}": float(k % 2) for k in range(6)})
        rows = alignment_study(judgments, annotations)
        assert rows[-1].llm_r == pytest.approx(-1.0, abs=1e-12)

    def test_four_item_closed_form(self):
        # pearson([1,1,0,0], [1.0,0.75,0.25,0.0]) by the closed-form sums:
        # cov 0.75, var_x 1.0, var_y 0.625 -> 0.75/sqrt(0.625)
        judgments = [JudgmentRecord(f"i{k}", "d", o) for k, o in enumerate([1, 1, 0, 0])]
        annotations = annotations_for(
            {"i0": 1.0, "i1": 0.75, "i2": 0.25, "i3": 0.0})
        rows = alignment_study(judgments, annotations)
        expected = 0.75 / (0.625 ** 0.5)
        assert rows[-1].llm_r == pytest.approx(expected, abs=1e-12)

    def test_per_dataset_and_overall_rows(self):
        judgments = (
            [JudgmentRecord(f"a{k}", "giga", k % 2) for k in range(4)]
            + [JudgmentRecord(f"b{k}", "wenet", k % 2) for k in range(4)]
        )
        consensus = {f"a{k}": float(k % 2) for k in range(4)}
        consensus.update({f"b{k}": float(k % 2) for k in range(4)})
        experts = {"e1": {item: round(v) for item, v in consensus.items()}}
        rows = alignment_study(judgments, annotations_for(consensus, experts))
        assert [r.group for r in rows] == ["giga", "wenet", "Overall"]
        assert rows[-1].expert_r == pytest.approx(1.0, abs=1e-12)

    def test_judged_item_without_annotation(self):
        with pytest.raises(MalformedManifest):
            alignment_study([JudgmentRecord("x", "d", 1)], [])

    def test_degenerate_consensus(self):
        judgments = [JudgmentRecord(f"i{k}", "d", k % 2) for k in range(4)]
        annotations = annotations_for({f"i{k}": 1.0 for k in range(4)})
        with pytest.raises(DegenerateInput):
            alignment_study(judgments, annotations)

    def test_table_renders(self):
        judgments = [JudgmentRecord(f"i{k}", "giga", k % 2) for k in range(4)]
        rows = alignment_study(
            judgments, annotations_for({f"i{k}": float(k % 2) for k in range(4)}))
        table = render_alignment_table(rows)
        assert table.splitlines()[0].split() == ["Dataset", "LLM", "(r)", "Expert", "(r)", "N"]
        assert "Overall" in table


class TestLoaders:
    def test_load_judgments(self, tmp_path):
        path = tmp_path / "judgments.jsonl"
        path.write_text(
            '{"item_id": "a", "dataset_tag": "giga", "outcome": 1}\n'
            '{"item_id": "b", "dataset_tag": "giga", "outcome": 0}\n',
            encoding="utf-8")
        records = load_judgments(path)
        assert records == [JudgmentRecord("a", "giga", 1), JudgmentRecord("b", "giga", 0)]

    def test_load_judgments_rejects_non_binary(self, tmp_path):
        path = tmp_path / "judgments.jsonl"
        path.write_text('{"item_id": "a", "outcome": 2}\n', encoding="utf-8")
        with pytest.raises(MalformedManifest):
            load_judgments(path)

    def test_load_annotations(self, tmp_path):
        path = tmp_path / "annotations.csv"
        path.write_text(
            "item_id,annotator_id,cohort,rating\n"
            "a,n1,nonexpert,1\n"
            "a,e1,expert,0\n",
            encoding="utf-8")
        records = load_annotations(path)
        assert len(records) == 2
        assert records[1].cohort == "expert"

    def test_load_annotations_missing_column(self, tmp_path):
        path = tmp_path / "annotations.csv"
        path.write_text("item_id,rating\na,1\n", encoding="utf-8")
        with pytest.raises(MalformedManifest):
            load_annotations(path)
