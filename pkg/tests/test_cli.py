"""CLI pipeline: ingest, index, extract, synth, detect, evaluate, estimate."""

import json
from pathlib import Path

import pytest
from click.testing import CliRunner

from contracheck.cli import main
from contracheck.config import RunConfig
from contracheck.corpus import load_snapshot
from contracheck.facts import fact_from_block, save_facts
from contracheck.llm import ScriptedProvider

from conftest import make_corpus_records


@pytest.fixture
def runner():
    return CliRunner()


@pytest.fixture
def records_file(tmp_path):
    path = tmp_path / "records.jsonl"
    with open(path, "w", encoding="utf-8") as fh:
        for record in make_corpus_records(40):
            fh.write(json.dumps(record) + "\n")
    return path


@pytest.fixture
def pipeline(tmp_path, runner, records_file):
    """Shared ingest + index + facts scaffolding for downstream commands."""
    snapshot_dir = tmp_path / "snapshot"
    index_path = tmp_path / "index.bin"
    facts_path = tmp_path / "facts.jsonl"
    result = runner.invoke(
        main,
        ["ingest", "--input", str(records_file), "--output", str(snapshot_dir),
         "--snapshot-date", "2024-11-01"],
    )
    assert result.exit_code == 0, result.output
    result = runner.invoke(
        main, ["index", "--snapshot", str(snapshot_dir), "--output", str(index_path)]
    )
    assert result.exit_code == 0, result.output
    snapshot = load_snapshot(snapshot_dir)
    facts = [fact_from_block(b, b.text) for b in snapshot.blocks.values()]
    save_facts(facts, facts_path)
    return tmp_path, snapshot_dir, index_path, facts_path


def run_synth(runner, pipeline, out_name, seed=7, n=12):
    tmp_path, snapshot_dir, _, facts_path = pipeline
    out = tmp_path / out_name
    result = runner.invoke(
        main,
        ["synth", "--snapshot", str(snapshot_dir), "--facts", str(facts_path),
         "--n", str(n), "--seed", str(seed), "--output-dir", str(out)],
    )
    assert result.exit_code == 0, result.output
    return out


class TestIngestIndex:
    def test_ingest_reports_count(self, runner, records_file, tmp_path):
        result = runner.invoke(
            main, ["ingest", "--input", str(records_file), "--output", str(tmp_path / "s")]
        )
        assert result.exit_code == 0
        assert "40 blocks" in result.output

    def test_ingest_round_trip_is_lossless(self, runner, records_file, tmp_path):
        first = tmp_path / "first"
        second = tmp_path / "second"
        runner.invoke(main, ["ingest", "--input", str(records_file), "--output", str(first)])
        # re-ingest the serialized snapshot itself with permissive bounds
        result = runner.invoke(
            main,
            ["ingest", "--input", str(first / "blocks.jsonl"), "--output", str(second),
             "--min-chars", "0", "--max-chars", "100000"],
        )
        assert result.exit_code == 0
        assert (first / "blocks.jsonl").read_bytes() == (second / "blocks.jsonl").read_bytes()

    def test_bad_record_fails_with_stage(self, runner, tmp_path):
        bad = tmp_path / "bad.jsonl"
        bad.write_text('{"doc_title": "D", "kind": "passage", "text": ""}\n')
        result = runner.invoke(main, ["ingest", "--input", str(bad), "--output", str(tmp_path / "s")])
        assert result.exit_code == 1
        assert "[ingest]" in result.output


class TestExtract:
    def test_extract_with_scripted_transcript(self, runner, pipeline):
        tmp_path, snapshot_dir, _, _ = pipeline
        transcript = tmp_path / "transcript.jsonl"
        provider = ScriptedProvider().set_default(
            "fact_extraction", "<facts>\nA generic extracted fact.\n</facts>"
        )
        provider.save(transcript)
        out = tmp_path / "extracted.jsonl"
        result = runner.invoke(
            main,
            ["extract", "--snapshot", str(snapshot_dir), "--output", str(out),
             "--provider", "scripted", "--transcript", str(transcript),
             "--sample", "5", "--seed", "3"],
        )
        assert result.exit_code == 0, result.output
        assert "extracted 5 facts" in result.output

    def test_extract_without_transcript_is_usage_error(self, runner, pipeline):
        tmp_path, snapshot_dir, _, _ = pipeline
        result = runner.invoke(
            main, ["extract", "--snapshot", str(snapshot_dir), "--output", str(tmp_path / "f.jsonl")]
        )
        assert result.exit_code == 2
        assert "transcript" in result.output


class TestSynth:
    def test_same_seed_twice_is_byte_identical(self, runner, pipeline):
        out_a = run_synth(runner, pipeline, "synth_a", seed=7)
        out_b = run_synth(runner, pipeline, "synth_b", seed=7)
        for name in ("cases.jsonl", "benchmark.jsonl"):
            assert (out_a / name).read_bytes() == (out_b / name).read_bytes()
        assert (out_a / "mutated_snapshot" / "blocks.jsonl").read_bytes() == (
            out_b / "mutated_snapshot" / "blocks.jsonl"
        ).read_bytes()

    def test_different_seed_differs(self, runner, pipeline):
        out_a = run_synth(runner, pipeline, "seed7", seed=7)
        out_b = run_synth(runner, pipeline, "seed8", seed=8)
        assert (out_a / "cases.jsonl").read_bytes() != (out_b / "cases.jsonl").read_bytes()


class TestDetect:
    def detect_args(self, pipeline, synth_out, out_name, system="nli"):
        tmp_path, snapshot_dir, index_path, facts_path = pipeline
        return [
            "detect", "--system", system,
            "--snapshot", str(synth_out / "mutated_snapshot"),
            "--index", str(synth_out / "index.bin"),
            "--facts", str(facts_path),
            "--output-dir", str(tmp_path / out_name),
            "--provider", "oracle", "--cases", str(synth_out / "cases.jsonl"),
        ]

    def prepare(self, runner, pipeline):
        synth_out = run_synth(runner, pipeline, "synth_detect", seed=5, n=10)
        result = runner.invoke(
            main,
            ["index", "--snapshot", str(synth_out / "mutated_snapshot"),
             "--output", str(synth_out / "index.bin")],
        )
        assert result.exit_code == 0, result.output
        return synth_out

    def test_detect_runs_and_is_deterministic(self, runner, pipeline):
        tmp_path = pipeline[0]
        synth_out = self.prepare(runner, pipeline)
        args = self.detect_args(pipeline, synth_out, "run_twice")
        result = runner.invoke(main, args)
        assert result.exit_code == 0, result.output
        names = ("results.jsonl", "resolved_config.json", "run_log.jsonl")
        first = {n: (tmp_path / "run_twice" / n).read_bytes() for n in names}
        result = runner.invoke(main, args)
        assert result.exit_code == 0, result.output
        for name in names:
            assert (tmp_path / "run_twice" / name).read_bytes() == first[name]

    def test_missing_provider_config_is_exit_2(self, runner, pipeline):
        tmp_path, snapshot_dir, index_path, facts_path = pipeline
        result = runner.invoke(
            main,
            ["detect", "--system", "nli", "--snapshot", str(snapshot_dir),
             "--index", str(index_path), "--facts", str(facts_path),
             "--output-dir", str(tmp_path / "out")],
        )
        assert result.exit_code == 2
        assert "transcript" in result.output

    def test_unknown_flag_is_exit_2(self, runner):
        result = runner.invoke(main, ["detect", "--no-such-flag"])
        assert result.exit_code == 2

    def test_resolved_config_written_with_defaults(self, runner, pipeline):
        tmp_path = pipeline[0]
        synth_out = self.prepare(runner, pipeline)
        result = runner.invoke(main, self.detect_args(pipeline, synth_out, "run_cfg"))
        assert result.exit_code == 0, result.output
        config = json.loads((tmp_path / "run_cfg" / "resolved_config.json").read_text())
        assert config["budget"] == 10
        assert config["k_search"] == 15
        assert config["k_baseline"] == 20
        assert config["rerank"] is True
        assert config["threshold"] == 0.5


class TestEvaluate:
    def test_oracle_results_evaluate_cleanly(self, runner, pipeline):
        tmp_path = pipeline[0]
        synth_out = run_synth(runner, pipeline, "synth_eval", seed=5, n=10)
        result = runner.invoke(
            main,
            ["index", "--snapshot", str(synth_out / "mutated_snapshot"),
             "--output", str(synth_out / "index.bin")],
        )
        assert result.exit_code == 0
        # detect over ALL benchmark facts so coverage is exact
        from contracheck.evaluation import load_dataset

        benchmark = load_dataset(synth_out / "benchmark.jsonl")
        facts_path = tmp_path / "bench_facts.jsonl"
        save_facts([item.fact for item in benchmark], facts_path)
        result = runner.invoke(
            main,
            ["detect", "--system", "nli",
             "--snapshot", str(synth_out / "mutated_snapshot"),
             "--index", str(synth_out / "index.bin"),
             "--facts", str(facts_path),
             "--output-dir", str(tmp_path / "eval_run"),
             "--provider", "oracle", "--cases", str(synth_out / "cases.jsonl")],
        )
        assert result.exit_code == 0, result.output
        result = runner.invoke(
            main,
            ["evaluate", "--dataset", str(synth_out / "benchmark.jsonl"),
             "--results", str(tmp_path / "eval_run" / "results.jsonl"),
             "--threshold", "0.025", "--format", "records"],
        )
        assert result.exit_code == 0, result.output
        report = json.loads(result.output)
        assert report["accuracy"] == 1.0
        assert report["recall"] == 1.0
        assert report["counts"]["fp"] == 0

    def test_table_format(self, runner, pipeline, tmp_path):
        synth_out = run_synth(runner, pipeline, "synth_tbl", seed=5, n=10)
        # reuse the benchmark as both dataset and trivially correct results
        from contracheck.detectors import DetectionResult, save_results
        from contracheck.evaluation import load_dataset

        benchmark = load_dataset(synth_out / "benchmark.jsonl")
        results = [
            DetectionResult(
                fact_id=item.fact.fact_id,
                system="retrieve_verify",
                score=1.0 if item.gold_label == "inconsistent" else 0.0,
            )
            for item in benchmark
        ]
        results_path = tmp_path / "fake_results.jsonl"
        save_results(results, results_path)
        result = runner.invoke(
            main,
            ["evaluate", "--dataset", str(synth_out / "benchmark.jsonl"),
             "--results", str(results_path)],
        )
        assert result.exit_code == 0, result.output
        assert "accuracy" in result.output
        assert "never asserted" in result.output


class TestEstimate:
    def write_confirmations(self, path, confirmed, total):
        categories = ["history", "science"]
        with open(path, "w", encoding="utf-8") as fh:
            for i in range(total):
                fh.write(
                    json.dumps(
                        {
                            "fact_id": f"f{i}",
                            "category": categories[i % 2],
                            "confirmed": i < confirmed,
                        }
                    )
                    + "\n"
                )

    def test_reference_numbers(self, runner, tmp_path):
        path = tmp_path / "confirmations.jsonl"
        self.write_confirmations(path, 23, 700)
        result = runner.invoke(
            main,
            ["estimate", "--confirmations", str(path), "--format", "records",
             "--total-facts", "1000000"],
        )
        assert result.exit_code == 0, result.output
        payload = json.loads(result.output)
        assert payload["estimate"]["p_hat"] == pytest.approx(23 / 700)
        assert payload["estimate"]["margin"] == pytest.approx(0.01736, abs=2e-4)
        assert payload["extrapolated"][0] < payload["extrapolated"][1]

    def test_table_output_includes_categories(self, runner, tmp_path):
        path = tmp_path / "confirmations.jsonl"
        self.write_confirmations(path, 10, 100)
        result = runner.invoke(main, ["estimate", "--confirmations", str(path)])
        assert result.exit_code == 0, result.output
        assert "history" in result.output
        assert "science" in result.output


class TestServe:
    def test_serve_builds_app_and_calls_uvicorn(self, runner, pipeline, monkeypatch, tmp_path):
        _, snapshot_dir, index_path, _ = pipeline
        captured = {}

        def fake_run(app, host, port):
            captured["app"] = app
            captured["host_port"] = (host, port)

        monkeypatch.setattr("uvicorn.run", fake_run)
        transcript = tmp_path / "t.jsonl"
        ScriptedProvider().save(transcript)
        result = runner.invoke(
            main,
            ["serve", "--snapshot", str(snapshot_dir), "--index", str(index_path),
             "--provider", "scripted", "--transcript", str(transcript),
             "--port", "9000"],
        )
        assert result.exit_code == 0, result.output
        assert captured["host_port"] == ("127.0.0.1", 9000)
        routes = {route.path for route in captured["app"].routes}
        assert {"/analyze", "/jobs/{job_id}", "/queue", "/items/{item_id}", "/verdicts",
                "/export/dataset"} <= routes


def test_default_config_matches_reference_settings():
    config = RunConfig()
    assert config.budget == 10
    assert config.k_search == 15
    assert config.k_baseline == 20
    assert config.rerank is True
    assert config.threshold == 0.5
