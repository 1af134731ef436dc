"""Command line behavior and exit codes."""

import io
import json

import pytest

from claimver.cli import main

from conftest import APOLLO_RESPONSE, APOLLO_TEXT, chat_payload


@pytest.fixture
def input_file(tmp_path):
    path = tmp_path / "input.txt"
    path.write_text(APOLLO_TEXT, encoding="utf-8")
    return str(path)


def _verify_args(kg_path, input_file, url, *extra):
    return ["verify", "--kg", kg_path, "--input", input_file,
            "--backend-url", url, "--model", "test-model", *extra]


class TestVerify:
    def test_json_report_to_file(self, tsv_kg_path, input_file, tmp_path, scripted_server):
        server = scripted_server([(200, chat_payload(APOLLO_RESPONSE))])
        out = tmp_path / "report.json"
        code = main(_verify_args(tsv_kg_path, input_file, server.url,
                                 "--out", str(out)))
        assert code == 0
        report = json.loads(out.read_text(encoding="utf-8"))
        assert report["input_text"] == APOLLO_TEXT
        assert report["n"] == 2
        assert [c["prediction"] for c in report["claims"]] == [
            "Attributable", "Contradictory"]
        assert report["config"]["model"] == "test-model"

    def test_json_to_stdout(self, tsv_kg_path, input_file, scripted_server, capsys):
        server = scripted_server([(200, chat_payload(APOLLO_RESPONSE))])
        assert main(_verify_args(tsv_kg_path, input_file, server.url)) == 0
        report = json.loads(capsys.readouterr().out)
        assert report["n"] == 2

    def test_ansi_format(self, tsv_kg_path, input_file, scripted_server, capsys):
        server = scripted_server([(200, chat_payload(APOLLO_RESPONSE))])
        assert main(_verify_args(tsv_kg_path, input_file, server.url,
                                 "--format", "ansi")) == 0
        out = capsys.readouterr().out
        assert "\x1b[31m" in out and "KAS:" in out

    def test_html_format(self, tsv_kg_path, input_file, scripted_server, capsys):
        server = scripted_server([(200, chat_payload(APOLLO_RESPONSE))])
        assert main(_verify_args(tsv_kg_path, input_file, server.url,
                                 "--format", "html")) == 0
        assert "<!DOCTYPE html>" in capsys.readouterr().out

    def test_stdin_input(self, tsv_kg_path, scripted_server, capsys, monkeypatch):
        server = scripted_server([(200, chat_payload(APOLLO_RESPONSE))])
        monkeypatch.setattr("sys.stdin", io.StringIO(APOLLO_TEXT))
        assert main(_verify_args(tsv_kg_path, "-", server.url)) == 0
        assert json.loads(capsys.readouterr().out)["input_text"] == APOLLO_TEXT

    def test_jsonl_kg(self, jsonl_kg_path, input_file, scripted_server, capsys):
        server = scripted_server([(200, chat_payload(APOLLO_RESPONSE))])
        assert main(_verify_args(jsonl_kg_path, input_file, server.url,
                                 "--kg-format", "jsonl")) == 0
        assert json.loads(capsys.readouterr().out)["n"] == 2

    def test_missing_kg_exit_2(self, input_file, capsys):
        assert main(_verify_args("/no/such/file.tsv", input_file, "http://x")) == 2
        assert "error:" in capsys.readouterr().err

    def test_malformed_kg_exit_2(self, tmp_path, input_file):
        bad = tmp_path / "bad.tsv"
        bad.write_text("only\ttwo\n", encoding="utf-8")
        assert main(_verify_args(str(bad), input_file, "http://x")) == 2

    def test_backend_auth_failure_exit_3(self, tsv_kg_path, input_file, scripted_server):
        server = scripted_server([(401, "denied")])
        assert main(_verify_args(tsv_kg_path, input_file, server.url)) == 3

    def test_backend_down_exit_3(self, tsv_kg_path, input_file, scripted_server):
        server = scripted_server([(500, "boom")])
        assert main(_verify_args(tsv_kg_path, input_file, server.url)) == 3

    def test_unparseable_response_exit_4(self, tsv_kg_path, input_file, scripted_server):
        server = scripted_server([(200, chat_payload("no structured keys"))])
        assert main(_verify_args(tsv_kg_path, input_file, server.url)) == 4

    def test_bad_scoring_config_exit_2(self, tsv_kg_path, input_file):
        assert main(_verify_args(tsv_kg_path, input_file, "http://x",
                                 "--alpha", "-1")) == 2

    def test_missing_required_flag_exits_2(self, tsv_kg_path):
        with pytest.raises(SystemExit) as err:
            main(["verify", "--kg", tsv_kg_path])
        assert err.value.code == 2

    def test_custom_retrieval_flags_echoed(self, tsv_kg_path, input_file,
                                           scripted_server, capsys):
        server = scripted_server([(200, chat_payload(APOLLO_RESPONSE))])
        assert main(_verify_args(tsv_kg_path, input_file, server.url,
                                 "--max-hops", "2", "--max-paths", "3")) == 0
        report = json.loads(capsys.readouterr().out)
        assert report["config"]["retrieval"] == {"max_hops": 2, "max_paths_per_pair": 3}

    def test_embed_url_fallback_still_succeeds(self, tsv_kg_path, input_file,
                                               scripted_server, capsys):
        chat = scripted_server([(200, chat_payload(APOLLO_RESPONSE))])
        embed = scripted_server([(500, "down")])
        code = main(_verify_args(tsv_kg_path, input_file, chat.url,
                                 "--embed-url", embed.url, "--embed-model", "e"))
        assert code == 0
        captured = capsys.readouterr()
        assert json.loads(captured.out)["n"] == 2
        assert "built-in embedder" in captured.err


class TestDatagen:
    def test_emits_jsonl(self, tsv_kg_path, tmp_path, capsys):
        doc_file = tmp_path / "docs.txt"
        doc_file.write_text(APOLLO_TEXT + "\n\nApollo 11 orbited Earth.\n",
                            encoding="utf-8")
        assert main(["datagen", "--kg", tsv_kg_path, "--input", str(doc_file)]) == 0
        lines = [json.loads(l) for l in capsys.readouterr().out.splitlines()]
        assert len(lines) == 3  # two sentences + one single-sentence document
        assert all({"full_text", "text_span", "triplets", "prompt"} <= set(l) for l in lines)
        assert "response" not in lines[0]

    def test_with_backend_includes_responses(self, tsv_kg_path, tmp_path,
                                             scripted_server, capsys):
        server = scripted_server([(200, chat_payload('- "prediction": "Attributable"'))])
        doc_file = tmp_path / "docs.txt"
        doc_file.write_text("Apollo 11 landed on the Moon.\n", encoding="utf-8")
        assert main(["datagen", "--kg", tsv_kg_path, "--input", str(doc_file),
                     "--backend-url", server.url, "--model", "m"]) == 0
        lines = [json.loads(l) for l in capsys.readouterr().out.splitlines()]
        assert lines[0]["response"] == '- "prediction": "Attributable"'

    def test_backend_url_without_model_exit_2(self, tsv_kg_path, tmp_path):
        doc_file = tmp_path / "docs.txt"
        doc_file.write_text("x\n", encoding="utf-8")
        assert main(["datagen", "--kg", tsv_kg_path, "--input", str(doc_file),
                     "--backend-url", "http://x"]) == 2

    def test_out_file(self, tsv_kg_path, tmp_path):
        doc_file = tmp_path / "docs.txt"
        doc_file.write_text("Apollo 11 landed on the Moon.\n", encoding="utf-8")
        out = tmp_path / "records.jsonl"
        assert main(["datagen", "--kg", tsv_kg_path, "--input", str(doc_file),
                     "--out", str(out)]) == 0
        assert json.loads(out.read_text(encoding="utf-8").splitlines()[0])["text_span"]
