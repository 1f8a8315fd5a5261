#!/usr/bin/env python3
# -*- coding: utf-8 -*-
# Author: i2cy(i2cy@outlook.com)
# Project: LambdaCGD
# Filename: test_cli
# Created on: 2026/10/19

import csv
import io
import json
import time

import pytest

from lambdacgd.cli import run
from lambdacgd.sweeps import (OUTPUT_DIR_ENV, SWEEP_HEADER, RATIO_HEADER, parallel_map, ratio_grid, resolve_output,
                              rmse_table, write_csv, write_json)
from lambdacgd import ParticipationSchema, normalized_rmse_ratio, rmse_lambda_closed


def read_csv(text: str):
    return list(csv.reader(io.StringIO(text)))


class TestCommands:

    def test_bounds_single_step(self, capsys):
        assert run(["bounds", "--n", "1"]) == 0
        out = json.loads(capsys.readouterr().out)
        assert out["schema_version"] == 1
        assert (out["trivial"], out["diagonal"], out["lower"]) == (1.0, 1.0, 1.0)

    def test_sens_lambda_zero(self, capsys):
        assert run(["sens", "--n", "8", "--k", "4", "--b", "2", "--lambda", "0"]) == 0
        out = json.loads(capsys.readouterr().out)
        assert out["structural"] == pytest.approx(2.0)
        assert out["closed_form"] == pytest.approx(2.0)
        assert out["bruteforce"] == pytest.approx(2.0)
        assert out["agree"] is True

    def test_sens_skips_brute_force(self, capsys):
        assert run(["sens", "--n", "64", "--k", "4", "--b", "16", "--lambda", "0.9", "--normalized"]) == 0
        out = json.loads(capsys.readouterr().out)
        assert out["bruteforce"] is None
        assert out["agree"] is True

    def test_sweep_lambda_full_batch(self, capsys):
        assert run(["sweep-lambda", "--n", "64", "--k", "64", "--b", "1", "--grid", "64"]) == 0
        captured = capsys.readouterr()
        rows = read_csv(captured.out)
        assert rows[0] == SWEEP_HEADER
        assert len(rows) == 1 + 63
        summary = json.loads(captured.err.strip().splitlines()[-1])
        assert summary["lambda_star"] == 0.0
        assert summary["grid_lambda_star"] == 0.0

    def test_sweep_lambda_to_file(self, tmp_path, capsys):
        path = tmp_path / "sweep.csv"
        assert run(["sweep-lambda", "--n", "32", "--k", "2", "--b", "16", "--grid", "16", "--metric", "maxse",
                    "-o", str(path)]) == 0
        summary = json.loads(capsys.readouterr().out)
        assert summary["metric"] == "maxse"
        assert 0.0 <= summary["lambda_star"] < 1.0
        assert read_csv(path.read_text())[0] == SWEEP_HEADER

    def test_sweep_lambda_json(self, capsys):
        assert run(["sweep-lambda", "--n", "16", "--k", "2", "--b", "8", "--grid", "8", "--normalized",
                    "--format", "json"]) == 0
        out = json.loads(capsys.readouterr().out)
        assert out["normalized"] is True
        assert len(out["rows"]) == 7
        assert set(out["rows"][0]) == set(SWEEP_HEADER)

    def test_rmse_table(self, capsys):
        assert run(["rmse-table", "--n-list", "64,128", "--k-list", "1,4", "--lambdas", "0,0.5"]) == 0
        rows = read_csv(capsys.readouterr().out)
        assert len(rows) == 1 + 2 * 2 * 2
        assert [int(v) for v in rows[1][:3]] == [64, 1, 64]

    def test_ratio_normalized(self, tmp_path, monkeypatch):
        monkeypatch.setenv(OUTPUT_DIR_ENV, str(tmp_path))
        assert run(["ratio-normalized", "--b", "8", "--k-list", "1,2", "--lambdas", "0.5,0.9",
                    "-o", "ratio.csv"]) == 0
        rows = read_csv((tmp_path / "ratio.csv").read_text())
        assert rows[0] == RATIO_HEADER
        assert len(rows) == 5
        assert float(rows[1][4]) == normalized_rmse_ratio(8, 1, 8, 0.5)

    def test_bench_noise(self, capsys):
        assert run(["bench-noise", "--d", "8", "--steps", "10", "--mode", "banded_inverse", "--p", "3",
                    "--workers", "2"]) == 0
        rows = read_csv(capsys.readouterr().out)
        assert len(rows) == 3
        assert rows[1][4:] == ["10", str(1 + 2 * 8)]

    def test_train(self, tmp_path, capsys):
        config = tmp_path / "run.json"
        config.write_text(json.dumps({"dim": 3, "dataset_size": 32, "batch_size": 4, "epochs": 2}))
        trace = tmp_path / "trace.jsonl"
        assert run(["train", "--config", str(config), "--lambda", "0.8", "--seed", "5",
                    "--trace", str(trace)]) == 0
        out = json.loads(capsys.readouterr().out)
        assert out["iterations"] == 16
        assert out["config"]["lam"] == 0.8
        assert len(out["final_theta"]) == 3
        assert len(trace.read_text().splitlines()) == 1 + 16 + 1

    def test_test_vectors(self, tmp_path, capsys):
        path = tmp_path / "vectors.json"
        assert run(["test-vectors", "--emit", str(path)]) == 0
        assert run(["test-vectors", "--check", str(path)]) == 0
        assert json.loads(capsys.readouterr().out.strip().splitlines()[-1])["passed"] is True

        payloads = json.loads(path.read_text())
        payloads[0]["outputs"][0][0] += 1.0
        path.write_text(json.dumps(payloads))
        assert run(["test-vectors", "--check", str(path)]) == 1


class TestDeterminism:
    """
    identical flags and seed give identical bytes, whatever the worker count
    """

    @staticmethod
    def run_twice(argv, capsys):
        outputs = []
        for _ in range(2):
            assert run(argv) == 0
            captured = capsys.readouterr()
            outputs.append((captured.out, captured.err.strip().splitlines()[-1:]))
        return outputs

    @pytest.mark.parametrize("argv", [
        ["sweep-lambda", "--n", "64", "--k", "4", "--b", "16", "--grid", "32", "--metric", "maxse"],
        ["rmse-table", "--n-list", "64,128", "--k-list", "1,2,4", "--lambdas", "0,0.5,0.9", "--workers", "4"],
        ["ratio-normalized", "--b", "8", "--k-list", "1,2,4", "--lambdas", "0.3,0.6,0.9", "--workers", "4"],
    ])
    def test_repeated_runs(self, argv, capsys):
        first, second = self.run_twice(argv, capsys)
        assert first[0] and first == second

    @pytest.mark.parametrize("command", ["rmse-table", "ratio-normalized"])
    def test_worker_count_does_not_change_output(self, command, capsys):
        argv = {"rmse-table": ["rmse-table", "--n-list", "64,128", "--k-list", "1,2,4", "--lambdas", "0,0.5,0.9"],
                "ratio-normalized": ["ratio-normalized", "--b", "8", "--k-list", "1,2,4",
                                     "--lambdas", "0.3,0.6,0.9"]}[command]
        assert run(argv + ["--workers", "1"]) == 0
        serial = capsys.readouterr().out
        assert run(argv + ["--workers", "4"]) == 0
        assert capsys.readouterr().out == serial

    def test_train(self, tmp_path, capsys):
        config = tmp_path / "run.json"
        config.write_text(json.dumps({"dim": 3, "dataset_size": 32, "batch_size": 4, "epochs": 2}))
        outputs, traces = [], []
        for name in ("a.jsonl", "b.jsonl"):
            assert run(["train", "--config", str(config), "--lambda", "0.9", "--seed", "3",
                        "--trace", str(tmp_path / name)]) == 0
            outputs.append(capsys.readouterr().out)
            traces.append((tmp_path / name).read_bytes())
        assert outputs[0] == outputs[1]
        assert traces[0] == traces[1]


class TestExitCodes:

    def test_unknown_flag(self, capsys):
        assert run(["bounds", "--n", "4", "--frobnicate"]) == 2

    def test_missing_command(self, capsys):
        assert run([]) == 2

    def test_invalid_schema(self, capsys):
        assert run(["sens", "--n", "4", "--k", "3", "--b", "2", "--lambda", "0.5"]) == 1
        assert capsys.readouterr().err.startswith("lambdacgd sens:")

    def test_lambda_out_of_range(self, capsys):
        assert run(["sens", "--n", "4", "--k", "2", "--b", "2", "--lambda", "1.0"]) == 1

    def test_bad_train_config(self, tmp_path, capsys):
        config = tmp_path / "run.json"
        config.write_text(json.dumps({"dataset_size": 30, "batch_size": 4}))
        assert run(["train", "--config", str(config)]) == 1

    def test_amplified_training(self, tmp_path, capsys):
        config = tmp_path / "run.json"
        config.write_text(json.dumps({"dim": 2, "dataset_size": 8, "batch_size": 4, "amplification": "bnb"}))
        assert run(["train", "--config", str(config)]) == 1
        assert "not implemented" in capsys.readouterr().err


class TestSweeps:

    def test_parallel_map_keeps_order(self):
        def slow(x):
            time.sleep(0.01 * (5 - x))
            return x * x

        assert parallel_map(slow, range(5), workers=4) == [0, 1, 4, 9, 16]
        assert parallel_map(slow, [3, 1, 2], workers=2, key=lambda item, result: item) == [1, 4, 9]

    def test_rmse_table_matches_closed_form(self):
        schemas = [ParticipationSchema(64, 4, 16), ParticipationSchema(32, 2, 16)]
        rows = rmse_table(schemas, [0.9, 0.0], workers=2)
        assert [row[:4] for row in rows] == [[32, 2, 16, 0.0], [32, 2, 16, 0.9], [64, 4, 16, 0.0],
                                             [64, 4, 16, 0.9]]
        assert rows[-1][4] == rmse_lambda_closed(64, 4, 16, 0.9)

    def test_ratio_grid_horizon(self):
        assert [row[0] for row in ratio_grid(8, [1, 4], [0.5])] == [8, 32]
        assert [row[0] for row in ratio_grid(8, [1, 4], [0.5], n=64)] == [64, 64]

    def test_output_resolution(self, tmp_path, monkeypatch):
        monkeypatch.setenv(OUTPUT_DIR_ENV, str(tmp_path))
        assert resolve_output(None) is None
        assert resolve_output("-") is None
        assert resolve_output("a.csv") == str(tmp_path / "a.csv")

    def test_writers(self, tmp_path):
        write_csv(["a", "b"], [[1, 0.1]], str(tmp_path / "t.csv"))
        assert (tmp_path / "t.csv").read_text() == "a,b\n1,0.1\n"
        write_json({"x": 1}, str(tmp_path / "sub" / "t.json"))
        assert json.loads((tmp_path / "sub" / "t.json").read_text()) == {"schema_version": 1, "x": 1}
